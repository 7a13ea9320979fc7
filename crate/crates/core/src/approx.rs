//! The `a_ε`-regularized problem
//!
//! ```text
//! S^ε = inf { ∫|∇u|² + |∇v|² : ∫ a_ε [λ|u|^p + μ|v|^p + pκ|u|^α|v|^β] = 1 }
//! ```
//!
//! with `a_ε = |x|^{-(s-ε)}` inside the unit ball and `|x|^{-(s+ε)}`
//! outside. The weight is milder than `|x|^{-s}` everywhere, so `S^ε`
//! decreases to the sharp constant as `ε → 0`. Minimization is radial
//! and runs on the same log grid as everything else.

use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::coupling::CouplingParams;
use crate::descent::{Descent, DescentOptions, PowerConstraint};
use crate::error::{domain, Error, Result};
use crate::exponents::Exponents;
use crate::format::num;
use crate::groundstate::normalized_extremal;
use crate::par;
use crate::radial::{RadialGrid, RadialProfile};
use crate::regime::{classify, Classification};

pub const PAIR_TOL: f64 = 1e-8;
pub const MAX_ITER: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsWeight {
    pub s: f64,
    pub eps: f64,
}

impl EpsWeight {
    pub fn new(s: f64, eps: f64) -> Result<Self> {
        if !(s > 0.0 && s < 2.0) {
            return domain(format!("s = {s} must lie in (0, 2)"));
        }
        if !(0.0..s).contains(&eps) {
            return domain(format!("eps = {eps} must lie in [0, s)"));
        }
        Ok(Self { s, eps })
    }

    pub fn eval(&self, r: f64) -> f64 {
        if r < 1.0 {
            r.powf(-(self.s - self.eps))
        } else {
            r.powf(-(self.s + self.eps))
        }
    }

    /// Quadrature weights of `∫ f a_ε dx` on `grid`.
    pub fn measure(&self, grid: &RadialGrid) -> Vec<f64> {
        grid.measure(0.0)
            .iter()
            .zip(grid.nodes())
            .map(|(w, &r)| w * self.eval(r))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct EpsMinimum {
    pub s_eps: f64,
    pub u: RadialProfile,
    pub v: RadialProfile,
    /// Constraint integral at the returned pair.
    pub constraint: f64,
    pub trace: Vec<f64>,
    pub iterations: usize,
}

fn constraint_for(
    weight: &EpsWeight,
    grid: &RadialGrid,
    params: &CouplingParams,
) -> PowerConstraint {
    PowerConstraint {
        weights: weight.measure(grid),
        p: params.alpha + params.beta,
        lambda: params.lambda,
        mu: params.mu,
        kappa: params.kappa,
        alpha: params.alpha,
        beta: params.beta,
    }
}

fn check_instance(exps: &Exponents, params: &CouplingParams, eps: f64) -> Result<EpsWeight> {
    let s = exps.common_s()?;
    params.check_critical(exps)?;
    if eps <= 0.0 {
        return domain(format!("eps = {eps} must be > 0"));
    }
    EpsWeight::new(s, eps)
}

/// Minimizes the `a_ε` quotient from the seed pair by alternating
/// projected descent.
pub fn minimize_s_eps(
    exps: &Exponents,
    params: &CouplingParams,
    eps: f64,
    seeds: (&RadialProfile, &RadialProfile),
) -> Result<EpsMinimum> {
    let weight = check_instance(exps, params, eps)?;
    if params.kappa <= 0.0 {
        return domain("the regularized problem needs kappa > 0");
    }
    let grid = seeds.0.shared_grid();
    if seeds.1.grid() != seeds.0.grid() {
        return domain("seed profiles must share a grid");
    }
    let constraint = constraint_for(&weight, &grid, params);
    let start = vec![seeds.0.values().to_vec(), seeds.1.values().to_vec()];
    if !(constraint.value(&start) > 0.0) {
        return Err(Error::ZeroNorm("constraint integral of the seeds"));
    }
    let opts = DescentOptions {
        tol: PAIR_TOL,
        max_iter: MAX_ITER,
    };
    let out = Descent::new(&grid, &constraint, opts).run(start)?;
    let total = constraint.value(&out.blocks);
    let mut it = out.blocks.into_iter();
    let u = RadialProfile::new(Arc::clone(&grid), it.next().expect("u"))?;
    let v = RadialProfile::new(grid, it.next().expect("v"))?;
    Ok(EpsMinimum {
        s_eps: out.value,
        u,
        v,
        constraint: total,
        trace: out.trace,
        iterations: out.iterations,
    })
}

/// `(Û, t₀Û)` when a nontrivial ground state is known, `(Û, Û)` otherwise.
pub fn default_seeds(
    grid: &Arc<RadialGrid>,
    exps: &Exponents,
    params: &CouplingParams,
) -> Result<(RadialProfile, RadialProfile)> {
    let s = exps.common_s()?;
    let hat = normalized_extremal(grid, s)?;
    let report = classify(exps, params)?;
    let t = match (report.classification, report.t0) {
        (Classification::NontrivialGroundState, Some(t)) => t,
        _ => 1.0,
    };
    let v = hat.scaled(t);
    Ok((hat, v))
}

/// Constraint mass inside and outside the unit ball.
fn split_mass(
    u: &RadialProfile,
    v: &RadialProfile,
    weight: &EpsWeight,
    params: &CouplingParams,
) -> (f64, f64) {
    let grid = u.grid();
    let c = constraint_for(weight, grid, params);
    let blocks = [u.values().to_vec(), v.values().to_vec()];
    let mut inner = 0.0;
    let mut outer = 0.0;
    for (i, &r) in grid.nodes().iter().enumerate() {
        let m = c.weights[i] * c.density(&blocks, i);
        if r < 1.0 {
            inner += m;
        } else {
            outer += m;
        }
    }
    (inner, outer)
}

/// `|mass(B₁) - mass(B₁ᶜ)|` of the `a_ε` constraint density.
pub fn half_mass_balance(
    u: &RadialProfile,
    v: &RadialProfile,
    exps: &Exponents,
    params: &CouplingParams,
    eps: f64,
) -> Result<f64> {
    let weight = EpsWeight::new(exps.common_s()?, eps)?;
    let (inner, outer) = split_mass(u, v, &weight, params);
    Ok((inner - outer).abs())
}

/// Relative residuals of `-Δu = S^ε a_ε (λu^{p-1} + καu^{α-1}v^β)` and
/// its partner equation.
pub fn euler_lagrange_residual(
    min: &EpsMinimum,
    exps: &Exponents,
    params: &CouplingParams,
    eps: f64,
) -> Result<(f64, f64)> {
    let weight = EpsWeight::new(exps.common_s()?, eps)?;
    let grid = min.u.shared_grid();
    let p = params.alpha + params.beta;
    let (a, b) = (params.alpha, params.beta);
    let (uu, vv) = (min.u.values(), min.v.values());
    let sp = |x: f64, e: f64| {
        if x == 0.0 {
            0.0
        } else {
            x.signum() * x.abs().powf(e)
        }
    };
    let mut ru = Vec::with_capacity(grid.len());
    let mut rv = Vec::with_capacity(grid.len());
    for (i, &r) in grid.nodes().iter().enumerate() {
        let w = min.s_eps * weight.eval(r);
        ru.push(
            w * (params.lambda * sp(uu[i], p - 1.0)
                + params.kappa * a * sp(uu[i], a - 1.0) * vv[i].abs().powf(b)),
        );
        rv.push(
            w * (params.mu * sp(vv[i], p - 1.0)
                + params.kappa * b * uu[i].abs().powf(a) * sp(vv[i], b - 1.0)),
        );
    }
    let eu = min
        .u
        .laplacian_residual(&RadialProfile::new(Arc::clone(&grid), ru)?)?;
    let ev = min.v.laplacian_residual(&RadialProfile::new(grid, rv)?)?;
    Ok((eu, ev))
}

/// `S^ε` for each `ε` in a strictly increasing list, computed in parallel
/// from the default seeds.
pub fn s_eps_monotonicity_sweep(
    grid: &Arc<RadialGrid>,
    exps: &Exponents,
    params: &CouplingParams,
    eps_list: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let s = exps.common_s()?;
    if eps_list.windows(2).any(|w| w[1] <= w[0]) {
        return domain("eps list must be strictly increasing");
    }
    if let Some(e) = eps_list.iter().find(|&&e| !(e > 0.0 && e < s)) {
        return domain(format!("eps = {e} must lie in (0, s)"));
    }
    let (u0, v0) = default_seeds(grid, exps, params)?;
    par::map_indexed(eps_list, |_, &eps| {
        minimize_s_eps(exps, params, eps, (&u0, &v0)).map(|m| (eps, m.s_eps))
    })
    .into_iter()
    .collect()
}

/// Whether `values` is non-decreasing up to `rel_slack`.
pub fn is_non_decreasing(values: &[f64], rel_slack: f64) -> bool {
    values
        .windows(2)
        .all(|w| w[1] >= w[0] - rel_slack * w[0].abs())
}

/// Linear extrapolation to `ε = 0` through the last two points.
pub fn extrapolate_to_zero(rows: &[(f64, f64)]) -> Option<f64> {
    let n = rows.len();
    if n < 2 {
        return None;
    }
    let (e1, s1) = rows[n - 2];
    let (e2, s2) = rows[n - 1];
    Some(s1 - e1 * (s2 - s1) / (e2 - e1))
}

pub fn write_sweep_csv<W: Write>(rows: &[(f64, f64)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["eps", "S_eps"])?;
    for &(e, s) in rows {
        w.write_record([num(e), num(s)])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groundstate::mu_s_quadrature;

    #[test]
    fn weight_examples() {
        let w = EpsWeight::new(1.0, 0.3).unwrap();
        assert_eq!(w.eval(1.0), 1.0);
        let w0 = EpsWeight::new(1.5, 0.0).unwrap();
        for r in [1e-3, 0.5, 2.0, 1e3] {
            assert_eq!(w0.eval(r), r.powf(-1.5));
        }
        let a = EpsWeight::new(1.0, 0.1).unwrap();
        let b = EpsWeight::new(1.0, 0.2).unwrap();
        for r in [1e-4, 0.3, 0.999, 1.001, 7.0, 1e4] {
            assert!(a.eval(r) > b.eval(r));
            assert!(a.eval(r) < r.powf(-1.0));
        }
        assert!(EpsWeight::new(1.0, 1.0).is_err());
        assert!(EpsWeight::new(1.0, -0.1).is_err());
    }

    #[test]
    fn half_mass_of_inner_profile_is_total() {
        let g = Arc::new(RadialGrid::new(3, 1e-3, 1e3, 256).unwrap());
        let e = Exponents::single(3, 1.0).unwrap();
        let c = CouplingParams::new(1.0, 1.0, 1.0, 2.0, 2.0).unwrap();
        let u =
            RadialProfile::from_fn(Arc::clone(&g), |r| if r < 1.0 { 1.0 } else { 0.0 }).unwrap();
        let z = RadialProfile::zeros(Arc::clone(&g));
        let w = EpsWeight::new(1.0, 0.1).unwrap();
        let (inner, outer) = split_mass(&u, &z, &w, &c);
        assert_eq!(outer, 0.0);
        assert_eq!(half_mass_balance(&u, &z, &e, &c, 0.1).unwrap(), inner);
    }

    #[test]
    fn degenerate_minimization() {
        let g = Arc::new(RadialGrid::new(3, 1e-6, 1e6, 1024).unwrap());
        let e = Exponents::single(3, 1.0).unwrap();
        let c = CouplingParams::new(2.0, 2.0, 1.0, 2.0, 2.0).unwrap();
        let (u0, v0) = default_seeds(&g, &e, &c).unwrap();
        let m = minimize_s_eps(&e, &c, 0.1, (&u0, &v0)).unwrap();
        assert!((m.constraint - 1.0).abs() < 1e-10);
        let s = mu_s_quadrature(&g, 1.0).unwrap() / 2f64.sqrt();
        assert!(m.s_eps >= s);
        assert!(m.trace.windows(2).all(|w| w[1] <= w[0]));
        assert!(half_mass_balance(&m.u, &m.v, &e, &c, 0.1).unwrap() < 0.01);
        let (ru, rv) = euler_lagrange_residual(&m, &e, &c, 0.1).unwrap();
        assert!(ru < 1e-2 && rv < 1e-2, "{ru} {rv}");
    }

    #[test]
    fn semi_trivial_seed_is_not_better() {
        let g = Arc::new(RadialGrid::new(3, 1e-6, 1e6, 1024).unwrap());
        let e = Exponents::single(3, 1.0).unwrap();
        let c = CouplingParams::new(1.0, 1.0, 1.0, 2.0, 2.0).unwrap();
        let (u0, v0) = default_seeds(&g, &e, &c).unwrap();
        let both = minimize_s_eps(&e, &c, 0.1, (&u0, &v0)).unwrap();
        let z = RadialProfile::zeros(Arc::clone(&g));
        let semi = minimize_s_eps(&e, &c, 0.1, (&u0, &z)).unwrap();
        assert!(semi.v.values().iter().all(|&x| x == 0.0));
        assert!(semi.s_eps >= both.s_eps);
    }

    #[test]
    fn sweep_validation_and_csv() {
        let g = Arc::new(RadialGrid::new(3, 1e-3, 1e3, 64).unwrap());
        let e = Exponents::single(3, 1.0).unwrap();
        let c = CouplingParams::new(2.0, 2.0, 1.0, 2.0, 2.0).unwrap();
        assert!(s_eps_monotonicity_sweep(&g, &e, &c, &[0.2, 0.1]).is_err());
        assert!(s_eps_monotonicity_sweep(&g, &e, &c, &[0.1, 1.0]).is_err());
        let mut buf = Vec::new();
        write_sweep_csv(&[(0.1, 2.0)], &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("eps,S_eps\n"));
        assert!(is_non_decreasing(&[1.0, 1.0 - 1e-6, 2.0], 1e-4));
        assert!(!is_non_decreasing(&[1.0, 0.9], 1e-4));
        assert_eq!(extrapolate_to_zero(&[(0.1, 2.0), (0.2, 3.0)]), Some(1.0));
    }
}
