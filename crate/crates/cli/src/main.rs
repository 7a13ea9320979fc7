//! `critsys`: regime reports, sharp constants, ground-state export,
//! sweeps, ε-approximation runs and cone calculus.
//!
//! Exit status is 0 on success, 1 on invalid input and 2 when the regime
//! rules out the requested object (inadmissible coupling, no positive
//! ground state).

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use critsys::approx::{s_eps_monotonicity_sweep, write_sweep_csv};
use critsys::cones::{
    attainment_calculus, gluing_energy, intermediate_value_locate, validate_table, Bracket,
    ConeConstantTable,
};
use critsys::coupling::CouplingParams;
use critsys::exponents::{two_star, Exponents};
use critsys::format::num;
use critsys::groundstate::{
    build_ground_state, decay_check, energy_direct, mu_s_minimize, mu_s_quadrature,
    pohozaev_residual, system_residuals,
};
use critsys::radial::{BumpSampler, RadialGrid};
use critsys::regime::{
    classify, ground_state_energy, sweep, Classification, RegimeReport, SweepParam,
};

const RESIDUAL_TOL: f64 = 1e-3;
const POHOZAEV_TOL: f64 = 1e-3;
const ENERGY_TOL: f64 = 1e-6;

#[derive(Parser)]
#[command(
    name = "critsys",
    version,
    about = "Sharp constants and ground states of critical Hardy-Sobolev systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the extremals of the sharp constant
    Regime {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Compute t0, inf g, mu_s, S and the ground-state energy
    SharpConstant {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Also minimize the scalar quotient from a random bump
        #[arg(long)]
        descent_check: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Build the ground-state pair and verify it
    GroundState {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Member of a degenerate family (defaults to 1)
        #[arg(long)]
        t0: Option<f64>,
        #[arg(long, default_value = ".")]
        output_dir: PathBuf,
    },
    /// Classify along a range of one coupling parameter
    Sweep {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, value_enum)]
        param: ParamName,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long, default_value_t = 20)]
        steps: usize,
        #[command(flatten)]
        jobs: JobArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Minimize the a_eps-regularized quotient for several eps
    Approx {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_delimiter = ',', default_value = "0.05,0.1,0.2")]
        eps: Vec<f64>,
        #[command(flatten)]
        jobs: JobArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Calculus on cone-indexed sharp constants
    Cones {
        #[command(subcommand)]
        op: ConeOp,
    },
}

#[derive(Subcommand)]
enum ConeOp {
    /// Report monotonicity violations of a `theta,S,provenance` table
    Validate {
        #[arg(long)]
        table: PathBuf,
    },
    /// Bracket the aperture at which S equals tau
    Locate {
        #[arg(long)]
        table: PathBuf,
        #[arg(long)]
        tau: f64,
    },
    /// Energies c_k of the glued sign-changing solutions
    Gluing {
        #[arg(long = "N")]
        n: u32,
        #[arg(long)]
        s: f64,
        /// Sub-cone constant; alternatively one row per table entry
        #[arg(long, conflicts_with = "table")]
        s_subcone: Option<f64>,
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long, default_value_t = 5)]
        k_max: u32,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Decide attainment from S(Omega), S0 and S_inf
    Attain {
        #[arg(long)]
        s_omega: f64,
        #[arg(long)]
        s0: f64,
        #[arg(long)]
        s_inf: f64,
    },
}

#[derive(Args)]
struct SystemArgs {
    #[arg(long = "N", default_value_t = 3)]
    n: u32,
    /// Common singularity order; shorthand for --s1 S --s2 S
    #[arg(long, conflicts_with_all = ["s1", "s2"])]
    s: Option<f64>,
    #[arg(long, requires = "s2")]
    s1: Option<f64>,
    #[arg(long, requires = "s1")]
    s2: Option<f64>,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    beta: f64,
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    mu: f64,
    #[arg(long, allow_hyphen_values = true)]
    kappa: f64,
}

impl SystemArgs {
    fn exponents(&self) -> Result<Exponents> {
        let (s1, s2) = match (self.s, self.s1, self.s2) {
            (Some(s), _, _) => (s, s),
            (None, Some(a), Some(b)) => (a, b),
            _ => bail!("one of --s or --s1/--s2 is required"),
        };
        Ok(Exponents::new(self.n, s1, s2)?)
    }

    fn params(&self) -> Result<CouplingParams> {
        Ok(CouplingParams::new(
            self.lambda,
            self.mu,
            self.kappa,
            self.alpha,
            self.beta,
        )?)
    }

    fn resolve(&self) -> Result<(Exponents, CouplingParams)> {
        let e = self.exponents()?;
        let c = self.params()?;
        c.check_critical(&e)?;
        Ok((e, c))
    }
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, default_value_t = 1e-6)]
    r_min: f64,
    #[arg(long, default_value_t = 1e6)]
    r_max: f64,
    #[arg(long = "M", default_value_t = 4096)]
    m: usize,
}

impl GridArgs {
    fn build(&self, n: u32) -> Result<Arc<RadialGrid>> {
        Ok(Arc::new(RadialGrid::new(
            n, self.r_min, self.r_max, self.m,
        )?))
    }
}

#[derive(Args)]
struct JobArgs {
    /// Worker threads for sweeps (default: all cores)
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct OutArgs {
    /// Write to this file instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

impl OutArgs {
    fn emit(&self, text: &str) -> Result<()> {
        match &self.output {
            Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
            None => {
                io::stdout().write_all(text.as_bytes())?;
                Ok(())
            }
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ParamName {
    Lambda,
    Mu,
    Kappa,
}

/// The regime rules out what was asked for.
#[derive(Debug)]
struct Forbidden(String);

impl std::fmt::Display for Forbidden {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Forbidden {}

fn json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn with_jobs<T: Send>(jobs: &JobArgs, f: impl FnOnce() -> T + Send) -> Result<T> {
    #[cfg(feature = "parallel")]
    if let Some(n) = jobs.jobs {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build()?;
        return Ok(pool.install(f));
    }
    #[cfg(not(feature = "parallel"))]
    let _ = jobs;
    Ok(f())
}

fn cmd_regime(system: &SystemArgs, out: &OutArgs) -> Result<()> {
    let (e, c) = system.resolve()?;
    let report = classify(&e, &c)?;
    out.emit(&json(&report)?)?;
    if report.classification == Classification::Inadmissible {
        let thr = c.admissibility_threshold(e.two_star_s1)?;
        return Err(Forbidden(format!(
            "inadmissible coupling: kappa = {} <= {thr}",
            c.kappa
        ))
        .into());
    }
    Ok(())
}

#[derive(Serialize)]
struct SharpConstant {
    classification: Classification,
    t0: Option<f64>,
    g_min: f64,
    mu_s: f64,
    #[serde(rename = "S")]
    s: f64,
    c0: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    mu_s_descent: Option<f64>,
}

fn admissible_report(e: &Exponents, c: &CouplingParams) -> Result<(RegimeReport, f64)> {
    let report = classify(e, c)?;
    match report.sharp_ratio {
        Some(r) => Ok((report, r)),
        None => Err(Forbidden(format!(
            "inadmissible coupling: kappa = {} <= {}",
            c.kappa,
            c.admissibility_threshold(e.two_star_s1)?
        ))
        .into()),
    }
}

fn cmd_sharp_constant(
    system: &SystemArgs,
    grid: &GridArgs,
    descent_check: bool,
    seed: u64,
    out: &OutArgs,
) -> Result<()> {
    let (e, c) = system.resolve()?;
    let s = e.common_s()?;
    let (report, ratio) = admissible_report(&e, &c)?;
    let g = grid.build(e.n)?;
    let mu_s = mu_s_quadrature(&g, s)?;
    let mu_s_descent = if descent_check {
        let bump = BumpSampler::new(seed).sample(&g);
        Some(mu_s_minimize(&bump, s)?.value)
    } else {
        None
    };
    let res = SharpConstant {
        classification: report.classification,
        t0: report.t0,
        g_min: ratio,
        mu_s,
        s: ratio * mu_s,
        c0: ground_state_energy(ratio, mu_s, e.two_star_s1)?,
        mu_s_descent,
    };
    out.emit(&json(&res)?)
}

#[derive(Serialize)]
struct CheckEntry {
    value: f64,
    tolerance: f64,
    pass: bool,
}

#[derive(Serialize)]
struct Checks {
    residual_u: CheckEntry,
    residual_v: CheckEntry,
    pohozaev: CheckEntry,
    decay: bool,
    energy_consistency: CheckEntry,
    all_pass: bool,
}

fn check(value: f64, tolerance: f64) -> CheckEntry {
    CheckEntry {
        value,
        tolerance,
        pass: value < tolerance,
    }
}

fn cmd_ground_state(
    system: &SystemArgs,
    grid: &GridArgs,
    t0: Option<f64>,
    dir: &Path,
) -> Result<()> {
    let (e, c) = system.resolve()?;
    let s = e.common_s()?;
    let (report, _) = admissible_report(&e, &c)?;
    match report.classification {
        Classification::NontrivialGroundState | Classification::DegenerateFamily => {}
        other => {
            return Err(Forbidden(format!(
                "{} ({}): no positive ground state to build",
                other.as_str(),
                report.rule_fired
            ))
            .into())
        }
    }
    if t0.is_some() && report.classification != Classification::DegenerateFamily {
        bail!("--t0 only applies to a degenerate family");
    }
    let g = grid.build(e.n)?;
    let mu_s = mu_s_quadrature(&g, s)?;
    let pair = build_ground_state(&report, mu_s, &g, s, &c, t0)?;

    let (ru, rv) = system_residuals(&pair.u, &pair.v, s, &c)?;
    let ph = pohozaev_residual(&pair.u, &pair.v, &e, &c)?;
    let direct = energy_direct(&pair.u, &pair.v, s, &c);
    let checks = Checks {
        residual_u: check(ru, RESIDUAL_TOL),
        residual_v: check(rv, RESIDUAL_TOL),
        pohozaev: check(ph, POHOZAEV_TOL),
        decay: decay_check(&pair.u) && decay_check(&pair.v),
        energy_consistency: check((direct / pair.energy - 1.0).abs(), ENERGY_TOL),
        all_pass: false,
    };
    let checks = Checks {
        all_pass: checks.residual_u.pass
            && checks.residual_v.pass
            && checks.pohozaev.pass
            && checks.decay
            && checks.energy_consistency.pass,
        ..checks
    };

    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut csv = Vec::new();
    pair.write_csv(&mut csv)?;
    fs::write(dir.join("profile.csv"), csv)?;
    fs::write(dir.join("meta.json"), json(&pair.meta_json())?)?;
    let checks_text = json(&checks)?;
    fs::write(dir.join("checks.json"), &checks_text)?;
    print!("{checks_text}");
    Ok(())
}

fn cmd_sweep(
    system: &SystemArgs,
    param: ParamName,
    (from, to, steps): (f64, f64, usize),
    jobs: &JobArgs,
    out: &OutArgs,
) -> Result<()> {
    let (e, c) = system.resolve()?;
    if steps < 2 {
        bail!("--steps must be at least 2");
    }
    let values: Vec<f64> = (0..steps)
        .map(|i| from + (to - from) * i as f64 / (steps - 1) as f64)
        .collect();
    let param = match param {
        ParamName::Lambda => SweepParam::Lambda,
        ParamName::Mu => SweepParam::Mu,
        ParamName::Kappa => SweepParam::Kappa,
    };
    let reports = with_jobs(jobs, || sweep(&e, &c, param, &values))?;
    let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
    let mut text = String::from("value,classification,sharp_ratio,t0,rule_fired,numeric_agrees\n");
    for (v, r) in values.iter().zip(reports) {
        let r = r.with_context(|| format!("at value {v}"))?;
        text += &format!(
            "{},{},{},{},{},{}\n",
            num(*v),
            r.classification.as_str(),
            opt(r.sharp_ratio),
            opt(r.t0),
            r.rule_fired,
            r.numeric_agrees
        );
    }
    out.emit(&text)
}

fn cmd_approx(
    system: &SystemArgs,
    grid: &GridArgs,
    eps: &[f64],
    jobs: &JobArgs,
    out: &OutArgs,
) -> Result<()> {
    let (e, c) = system.resolve()?;
    let g = grid.build(e.n)?;
    let rows = with_jobs(jobs, || s_eps_monotonicity_sweep(&g, &e, &c, eps))??;
    let mut buf = Vec::new();
    write_sweep_csv(&rows, &mut buf)?;
    out.emit(std::str::from_utf8(&buf)?)
}

fn read_table(path: &Path) -> Result<ConeConstantTable> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(ConeConstantTable::read_csv(file)?)
}

fn cmd_cones(op: &ConeOp) -> Result<()> {
    match op {
        ConeOp::Validate { table } => {
            let t = read_table(table)?;
            let v = validate_table(&t);
            let rows: Vec<_> = v
                .iter()
                .map(|x| serde_json::json!({"narrower": x.narrower, "wider": x.wider}))
                .collect();
            print!(
                "{}",
                json(&serde_json::json!({"consistent": v.is_empty(), "violations": rows}))?
            );
        }
        ConeOp::Locate { table, tau } => {
            let t = read_table(table)?;
            let value = match intermediate_value_locate(&t, *tau)? {
                Bracket::Between { theta_lo, theta_hi } => {
                    serde_json::json!({"bracket": "between", "theta_lo": theta_lo, "theta_hi": theta_hi})
                }
                Bracket::OpenEnd { theta_hi } => {
                    serde_json::json!({"bracket": "open", "theta_lo": 0.0, "theta_hi": theta_hi})
                }
            };
            print!("{}", json(&value)?);
        }
        ConeOp::Gluing {
            n,
            s,
            s_subcone,
            table,
            k_max,
            out,
        } => {
            let p = two_star(*n, *s)?;
            let sources: Vec<(String, f64)> = match (s_subcone, table) {
                (Some(v), _) => vec![(String::new(), *v)],
                (None, Some(path)) => read_table(path)?
                    .entries()
                    .iter()
                    .map(|e| (num(e.theta), e.s_value))
                    .collect(),
                (None, None) => bail!("one of --s-subcone or --table is required"),
            };
            let mut text = String::from("theta,S,k,c_k\n");
            for (theta, sv) in &sources {
                for k in 1..=*k_max {
                    let ck = gluing_energy(k, *n, p, *sv)?;
                    text += &format!("{theta},{},{k},{}\n", num(*sv), num(ck));
                }
            }
            out.emit(&text)?;
        }
        ConeOp::Attain { s_omega, s0, s_inf } => {
            let v = attainment_calculus(*s_omega, *s0, *s_inf)?;
            print!("{}", json(&serde_json::json!({"verdict": v}))?);
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Regime { system, out } => cmd_regime(system, out),
        Command::SharpConstant {
            system,
            grid,
            descent_check,
            seed,
            out,
        } => cmd_sharp_constant(system, grid, *descent_check, *seed, out),
        Command::GroundState {
            system,
            grid,
            t0,
            output_dir,
        } => cmd_ground_state(system, grid, *t0, output_dir),
        Command::Sweep {
            system,
            param,
            from,
            to,
            steps,
            jobs,
            out,
        } => cmd_sweep(system, *param, (*from, *to, *steps), jobs, out),
        Command::Approx {
            system,
            grid,
            eps,
            jobs,
            out,
        } => cmd_approx(system, grid, eps, jobs, out),
        Command::Cones { op } => cmd_cones(op),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.downcast_ref::<Forbidden>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
