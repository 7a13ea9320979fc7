//! The instanton, the scalar constant `μ_s(ℝ^N)` and ground-state pairs.
//!
//! `U(r) = (1 + r^{2-s})^{-(N-2)/(2-s)}` solves
//! `-ΔU = (N-2)(N-s) U^{2*(s)-1}/|x|^s` and realizes `μ_s(ℝ^N)`. Every
//! extremal of the coupled problem is built from the rescaling
//! `Û = U/|U|_{2*(s),s}`, which satisfies `-ΔÛ = μ_s Û^{2*(s)-1}/|x|^s`.
//! The normalization is taken with the grid quadrature, so that
//! `∫|∇Û|² = μ_s` and `∫Û^{2*(s)}|x|^{-s} = 1` hold exactly on the grid
//! and the energy identities below are satisfied to rounding.

use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::coupling::CouplingParams;
use crate::descent::{Descent, DescentOptions, PowerConstraint};
use crate::error::{domain, Error, Result};
use crate::exponents::{two_star, Exponents};
use crate::fiber::FiberMap;
use crate::format::num;
use crate::radial::{RadialGrid, RadialProfile};
use crate::regime::{ground_state_energy, Classification, RegimeReport};

/// Stopping tolerance of [`mu_s_minimize`] on the relative decrease.
pub const SCALAR_TOL: f64 = 1e-10;
pub const MAX_ITER: usize = 20_000;

fn check_s(s: f64) -> Result<()> {
    if !(s > 0.0 && s < 2.0) {
        return domain(format!("s = {s} must lie in (0, 2)"));
    }
    Ok(())
}

/// `(N-2)(N-s)`, the constant in the instanton's equation.
pub fn instanton_constant(n: u32, s: f64) -> f64 {
    let n = n as f64;
    (n - 2.0) * (n - s)
}

pub fn instanton(grid: &Arc<RadialGrid>, s: f64) -> Result<RadialProfile> {
    check_s(s)?;
    let n = grid.dim() as f64;
    let a = 2.0 - s;
    let e = -(n - 2.0) / a;
    RadialProfile::from_fn(Arc::clone(grid), |r| (1.0 + r.powf(a)).powf(e))
}

/// Rayleigh quotient `∫|∇U|² / |U|²_{2*(s),s}` at the instanton.
pub fn mu_s_quadrature(grid: &Arc<RadialGrid>, s: f64) -> Result<f64> {
    let u = instanton(grid, s)?;
    let p = two_star(grid.dim(), s)?;
    let norm = u.weighted_lp_norm(p, s)?;
    let q = u.dirichlet_energy() / (norm * norm);
    if !q.is_finite() {
        return Err(Error::NonFinite("mu_s quadrature"));
    }
    Ok(q)
}

/// `Û = U / |U|_{2*(s),s}`.
pub fn normalized_extremal(grid: &Arc<RadialGrid>, s: f64) -> Result<RadialProfile> {
    let u = instanton(grid, s)?;
    let p = two_star(grid.dim(), s)?;
    let norm = u.weighted_lp_norm(p, s)?;
    Ok(u.scaled(1.0 / norm))
}

#[derive(Debug, Clone)]
pub struct ScalarMinimum {
    pub value: f64,
    /// Minimizer with `|u|_{2*(s),s} = 1`.
    pub profile: RadialProfile,
    /// Quotient after every iteration; non-increasing.
    pub trace: Vec<f64>,
    pub iterations: usize,
}

/// Minimizes the Rayleigh quotient from `seed` by projected descent.
pub fn mu_s_minimize(seed: &RadialProfile, s: f64) -> Result<ScalarMinimum> {
    check_s(s)?;
    if seed.values().iter().all(|&x| x == 0.0) {
        return Err(Error::ZeroNorm("descent seed"));
    }
    let grid = seed.shared_grid();
    let p = two_star(grid.dim(), s)?;
    let constraint = PowerConstraint::scalar(grid.measure(s), p);
    let opts = DescentOptions {
        tol: SCALAR_TOL,
        max_iter: MAX_ITER,
    };
    let out = Descent::new(&grid, &constraint, opts).run(vec![seed.values().to_vec()])?;
    let values = out.blocks.into_iter().next().expect("one block");
    Ok(ScalarMinimum {
        value: out.value,
        profile: RadialProfile::new(grid, values)?,
        trace: out.trace,
        iterations: out.iterations,
    })
}

/// Positive solution `(u, v) = C(t₀)(Û, t₀Û)` of the system.
#[derive(Debug, Clone)]
pub struct GroundStatePair {
    pub u: RadialProfile,
    pub v: RadialProfile,
    pub t0: f64,
    pub c_t0: f64,
    pub energy: f64,
    pub sharp_constant: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PairMeta {
    t0: f64,
    #[serde(rename = "C_t0")]
    c_t0: f64,
    energy: f64,
    sharp_constant: f64,
}

impl GroundStatePair {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["r", "u", "v"])?;
        let r = self.u.grid().nodes();
        for ((r, u), v) in r.iter().zip(self.u.values()).zip(self.v.values()) {
            w.write_record([num(*r), num(*u), num(*v)])?;
        }
        w.flush()?;
        Ok(())
    }

    /// `t0`, `C_t0`, `energy` and `sharp_constant` as a JSON object.
    pub fn meta_json(&self) -> serde_json::Value {
        serde_json::to_value(PairMeta {
            t0: self.t0,
            c_t0: self.c_t0,
            energy: self.energy,
            sharp_constant: self.sharp_constant,
        })
        .expect("meta serializes")
    }
}

/// Builds the ground state selected by `report`.
///
/// For a degenerate family any `t0 > 0` is admissible and `t0 = 1` is
/// used when none is given; otherwise `t0` comes from the report.
pub fn build_ground_state(
    report: &RegimeReport,
    mu_s: f64,
    grid: &Arc<RadialGrid>,
    s: f64,
    params: &CouplingParams,
    t0: Option<f64>,
) -> Result<GroundStatePair> {
    let p = two_star(grid.dim(), s)?;
    params.check_critical(&Exponents::single(grid.dim(), s)?)?;
    if !(mu_s > 0.0 && mu_s.is_finite()) {
        return domain(format!("mu_s = {mu_s} must be positive"));
    }
    let fiber = FiberMap::new(*params, p)?;
    let (t0, ratio) = match report.classification {
        Classification::NontrivialGroundState => {
            if t0.is_some() {
                return domain("t0 can only be chosen inside a degenerate family");
            }
            let t = report.t0.ok_or_else(|| {
                Error::ClassificationMismatch("nontrivial report without an interior t0".into())
            })?;
            let ratio = report.sharp_ratio.ok_or_else(|| {
                Error::ClassificationMismatch("report without a sharp ratio".into())
            })?;
            (t, ratio)
        }
        Classification::DegenerateFamily => {
            let t = t0.unwrap_or(1.0);
            if !(t > 0.0 && t.is_finite()) {
                return domain(format!("t0 = {t} must be positive"));
            }
            (t, fiber.g(t)?)
        }
        other => {
            return Err(Error::ClassificationMismatch(format!(
                "{} admits no positive ground state",
                other.as_str()
            )))
        }
    };
    let sharp = ratio * mu_s;
    let c = sharp.powf(1.0 / (p - 2.0)) * fiber.denominator(t0).powf(-1.0 / p);
    let hat = normalized_extremal(grid, s)?;
    Ok(GroundStatePair {
        u: hat.scaled(c),
        v: hat.scaled(c * t0),
        t0,
        c_t0: c,
        energy: ground_state_energy(ratio, mu_s, p)?,
        sharp_constant: sharp,
    })
}

fn pow_signed(x: f64, e: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * x.abs().powf(e)
    }
}

/// Relative residuals of the two equations of the system for `s1 = s2 = s`.
pub fn system_residuals(
    u: &RadialProfile,
    v: &RadialProfile,
    s: f64,
    params: &CouplingParams,
) -> Result<(f64, f64)> {
    let p = params.alpha + params.beta;
    let grid = u.shared_grid();
    let r = grid.nodes();
    let (a, b) = (params.alpha, params.beta);
    let (uu, vv) = (u.values(), v.values());
    let rhs_u: Vec<f64> = (0..r.len())
        .map(|i| {
            r[i].powf(-s)
                * (params.lambda * pow_signed(uu[i], p - 1.0)
                    + params.kappa * a * pow_signed(uu[i], a - 1.0) * vv[i].abs().powf(b))
        })
        .collect();
    let rhs_v: Vec<f64> = (0..r.len())
        .map(|i| {
            r[i].powf(-s)
                * (params.mu * pow_signed(vv[i], p - 1.0)
                    + params.kappa * b * uu[i].abs().powf(a) * pow_signed(vv[i], b - 1.0))
        })
        .collect();
    let ru = u.laplacian_residual(&RadialProfile::new(Arc::clone(&grid), rhs_u)?)?;
    let rv = v.laplacian_residual(&RadialProfile::new(grid, rhs_v)?)?;
    Ok((ru, rv))
}

/// `Φ(u, v)` evaluated by quadrature.
pub fn energy_direct(u: &RadialProfile, v: &RadialProfile, s: f64, params: &CouplingParams) -> f64 {
    let p = params.alpha + params.beta;
    let dens: Vec<f64> = u
        .values()
        .iter()
        .zip(v.values())
        .map(|(x, y)| {
            let (x, y) = (x.abs(), y.abs());
            params.lambda * x.powf(p)
                + params.mu * y.powf(p)
                + p * params.kappa * x.powf(params.alpha) * y.powf(params.beta)
        })
        .collect();
    0.5 * (u.dirichlet_energy() + v.dirichlet_energy()) - u.grid().integrate(&dens, s) / p
}

/// `|LHS - RHS| / |RHS|` for the Pohozaev identity
/// `2(N-s1)∫G₁ + 2(N-s2)∫G₂ = (N-2)∫|∇u|² + |∇v|²`.
pub fn pohozaev_residual(
    u: &RadialProfile,
    v: &RadialProfile,
    exps: &Exponents,
    params: &CouplingParams,
) -> Result<f64> {
    let grid = u.grid();
    let n = grid.dim() as f64;
    let p1 = exps.two_star_s1;
    let (uu, vv) = (u.values(), v.values());
    let g1: Vec<f64> = uu
        .iter()
        .zip(vv)
        .map(|(x, y)| (params.lambda * x.abs().powf(p1) + params.mu * y.abs().powf(p1)) / p1)
        .collect();
    let g2: Vec<f64> = uu
        .iter()
        .zip(vv)
        .map(|(x, y)| params.kappa * x.abs().powf(params.alpha) * y.abs().powf(params.beta))
        .collect();
    let lhs = 2.0 * (n - exps.s1) * grid.integrate(&g1, exps.s1)
        + 2.0 * (n - exps.s2) * grid.integrate(&g2, exps.s2);
    let rhs = (n - 2.0) * (u.dirichlet_energy() + v.dirichlet_energy());
    if rhs == 0.0 {
        if lhs == 0.0 {
            return Ok(0.0);
        }
        return Err(Error::ZeroNorm("Pohozaev right-hand side"));
    }
    Ok((lhs - rhs).abs() / rhs.abs())
}

/// Rayleigh quotients `∫|∇v|² / ∫U_λ^{2*(s)-2}v²|x|^{-s}` of the linearized
/// problem at `U_λ = (μ_s/λ)^{1/(2*(s)-2)}Û`: the value at `v = U_λ` and
/// the minimum over `tests`.
pub fn eigen_eta1_check(
    grid: &Arc<RadialGrid>,
    s: f64,
    lambda: f64,
    tests: &[RadialProfile],
) -> Result<(f64, f64)> {
    if !(lambda > 0.0) {
        return domain(format!("lambda = {lambda} must be > 0"));
    }
    let p = two_star(grid.dim(), s)?;
    let mu_s = mu_s_quadrature(grid, s)?;
    let u_l = normalized_extremal(grid, s)?.scaled((mu_s / lambda).powf(1.0 / (p - 2.0)));
    let pot: Vec<f64> = u_l.values().iter().map(|x| x.abs().powf(p - 2.0)).collect();
    let quotient = |v: &RadialProfile| -> Result<f64> {
        let d: Vec<f64> = pot.iter().zip(v.values()).map(|(w, x)| w * x * x).collect();
        let den = grid.integrate(&d, s);
        if den == 0.0 {
            return Err(Error::ZeroNorm("eigenvalue denominator"));
        }
        Ok(v.dirichlet_energy() / den)
    };
    let at = quotient(&u_l)?;
    let mut min = f64::INFINITY;
    for t in tests {
        min = min.min(quotient(t)?);
    }
    Ok((at, min))
}

/// Flatness of `|u| r^{N-2}` on the outer decade of the grid: the
/// supremum is at most twice the median.
pub fn decay_check(profile: &RadialProfile) -> bool {
    let grid = profile.grid();
    let r = grid.nodes();
    let n = grid.dim() as f64;
    let cut = grid.r_max() / 10.0;
    let mut c: Vec<f64> = r
        .iter()
        .zip(profile.values())
        .filter(|(&r, _)| r >= cut)
        .map(|(&r, u)| u.abs() * r.powf(n - 2.0))
        .collect();
    if c.is_empty() {
        return false;
    }
    c.sort_by(|a, b| a.total_cmp(b));
    let median = c[c.len() / 2];
    let sup = c[c.len() - 1];
    median > 0.0 && sup <= 2.0 * median
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::BumpSampler;
    use crate::regime::classify;
    use approx::assert_relative_eq;

    fn grid(m: usize) -> Arc<RadialGrid> {
        Arc::new(RadialGrid::new(3, 1e-6, 1e6, m).unwrap())
    }

    fn oracle() -> f64 {
        2.0 * (2.0 * std::f64::consts::PI / 3.0).sqrt()
    }

    #[test]
    fn instanton_basics() {
        let g = grid(512);
        let u = instanton(&g, 1.0).unwrap();
        for (r, x) in g.nodes().iter().zip(u.values()) {
            assert_relative_eq!(*x, 1.0 / (1.0 + r), max_relative = 1e-14);
        }
        assert_eq!(instanton_constant(3, 1.0), 2.0);
        assert!(instanton(&g, 2.0).is_err());
        assert!(decay_check(&u));
    }

    #[test]
    fn mu_s_matches_beta_oracle() {
        let g = grid(4096);
        let q = mu_s_quadrature(&g, 1.0).unwrap();
        assert!((q / oracle() - 1.0).abs() < 1e-3);
        let q2 = mu_s_quadrature(&grid(8192), 1.0).unwrap();
        assert!((q2 / q - 1.0).abs() < 1e-6);
    }

    #[test]
    fn nehari_at_instanton() {
        let g = grid(4096);
        let u = instanton(&g, 1.0).unwrap();
        let lhs = u.dirichlet_energy();
        let rhs = instanton_constant(3, 1.0) * u.weighted_lp_norm(4.0, 1.0).unwrap().powi(4);
        assert!((lhs / rhs - 1.0).abs() < 1e-3);
    }

    #[test]
    fn minimize_from_instanton_is_fixed() {
        let g = grid(2048);
        let seed = instanton(&g, 1.0).unwrap();
        let out = mu_s_minimize(&seed, 1.0).unwrap();
        let q = mu_s_quadrature(&g, 1.0).unwrap();
        assert!((out.value / q - 1.0).abs() < 1e-6);
        assert!(out.trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn minimize_from_bump() {
        let g = grid(2048);
        let seed = BumpSampler::new(7).sample(&g);
        let out = mu_s_minimize(&seed, 1.0).unwrap();
        assert!((out.value / oracle() - 1.0).abs() < 5e-3, "{}", out.value);
        assert!(out.trace.windows(2).all(|w| w[1] <= w[0]));
        assert!(mu_s_minimize(&RadialProfile::zeros(g), 1.0).is_err());
    }

    #[test]
    fn nontrivial_pair() {
        let g = grid(4096);
        let e = Exponents::single(3, 1.0).unwrap();
        let c = CouplingParams::new(1.0, 1.0, 1.0, 2.0, 2.0).unwrap();
        let rep = classify(&e, &c).unwrap();
        let mu = mu_s_quadrature(&g, 1.0).unwrap();
        let pair = build_ground_state(&rep, mu, &g, 1.0, &c, None).unwrap();
        assert!((pair.t0 - 1.0).abs() < 1e-10);
        let s = (2.0 / 6f64.sqrt()) * mu;
        assert_relative_eq!(pair.c_t0, s.sqrt() * 6f64.powf(-0.25), max_relative = 1e-9);
        let (ru, rv) = system_residuals(&pair.u, &pair.v, 1.0, &c).unwrap();
        assert!(ru < 1e-3 && rv < 1e-3, "{ru} {rv}");
        assert!(pohozaev_residual(&pair.u, &pair.v, &e, &c).unwrap() < 1e-3);
        let direct = energy_direct(&pair.u, &pair.v, 1.0, &c);
        assert!((direct / pair.energy - 1.0).abs() < 1e-6);
        assert!(decay_check(&pair.u) && decay_check(&pair.v));
        for (a, b) in pair.u.values().iter().zip(pair.v.values()) {
            assert_relative_eq!(*b, pair.t0 * a, max_relative = 1e-15);
        }
    }

    #[test]
    fn degenerate_pair_closed_form() {
        let g = grid(1024);
        let e = Exponents::single(3, 1.0).unwrap();
        let c = CouplingParams::new(2.0, 2.0, 1.0, 2.0, 2.0).unwrap();
        let rep = classify(&e, &c).unwrap();
        let mu = mu_s_quadrature(&g, 1.0).unwrap();
        let hat = normalized_extremal(&g, 1.0).unwrap();
        for t in [0.3, 1.0, 2.5] {
            let pair = build_ground_state(&rep, mu, &g, 1.0, &c, Some(t)).unwrap();
            let k = (mu / (2.0 * 1.0 * (1.0 + t * t))).sqrt();
            for i in (0..g.len()).step_by(97) {
                assert_relative_eq!(
                    pair.u.values()[i],
                    k * hat.values()[i],
                    max_relative = 1e-12
                );
                assert_relative_eq!(
                    pair.v.values()[i],
                    k * t * hat.values()[i],
                    max_relative = 1e-12
                );
            }
        }
        let semi = classify(&e, &CouplingParams::new(3.0, 3.0, 1.0, 2.0, 2.0).unwrap()).unwrap();
        assert!(matches!(
            build_ground_state(&semi, mu, &g, 1.0, &c, None),
            Err(Error::ClassificationMismatch(_))
        ));
    }

    #[test]
    fn pohozaev_cases() {
        let g = grid(4096);
        let e = Exponents::single(3, 1.0).unwrap();
        let c = CouplingParams::new(1.0, 1.0, 1.0, 2.0, 2.0).unwrap();
        let z = RadialProfile::zeros(Arc::clone(&g));
        assert_eq!(pohozaev_residual(&z, &z, &e, &c).unwrap(), 0.0);
        let mu = mu_s_quadrature(&g, 1.0).unwrap();
        // (U_1, 0) solves the system with λ = 1
        let u1 = normalized_extremal(&g, 1.0).unwrap().scaled(mu.sqrt());
        assert!(pohozaev_residual(&u1, &z, &e, &c).unwrap() < 1e-3);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        use rand::{Rng, SeedableRng};
        let noisy: Vec<f64> = u1
            .values()
            .iter()
            .map(|x| x * (1.0 + 0.05 * rng.gen_range(-1.0..1.0)))
            .collect();
        let noisy = RadialProfile::new(Arc::clone(&g), noisy).unwrap();
        let base = pohozaev_residual(&u1, &z, &e, &c).unwrap();
        assert!(pohozaev_residual(&noisy, &z, &e, &c).unwrap() >= 10.0 * base);
    }

    #[test]
    fn eta1_examples() {
        let g = grid(4096);
        let mut sampler = BumpSampler::new(11);
        let tests: Vec<_> = (0..20).map(|_| sampler.sample(&g)).collect();
        let (at, min) = eigen_eta1_check(&g, 1.0, 1.0, &tests).unwrap();
        assert!((at - 1.0).abs() < 1e-4);
        assert!(min >= 1.0 - 1e-3);
        let (at3, _) = eigen_eta1_check(&g, 1.0, 3.0, &[]).unwrap();
        assert!((at3 / 3.0 - 1.0).abs() < 1e-4);
    }

    #[test]
    fn decay_rejects_constant() {
        let g = grid(512);
        let one = RadialProfile::from_fn(g, |_| 1.0).unwrap();
        assert!(!decay_check(&one));
    }

    #[test]
    fn pair_outputs() {
        let g = grid(64);
        let e = Exponents::single(3, 1.0).unwrap();
        let c = CouplingParams::new(2.0, 2.0, 1.0, 2.0, 2.0).unwrap();
        let rep = classify(&e, &c).unwrap();
        let pair = build_ground_state(&rep, 2.9, &g, 1.0, &c, None).unwrap();
        let mut buf = Vec::new();
        pair.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("r,u,v\n"));
        assert_eq!(text.lines().count(), 65);
        let meta = pair.meta_json();
        assert_eq!(meta["t0"], 1.0);
        assert!(meta.get("C_t0").is_some());
    }
}
