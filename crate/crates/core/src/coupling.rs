//! Coupling parameters, the best Young constant and the admissibility
//! threshold of the mixed functional
//! `λ|u|^p + μ|v|^p + pκ|u|^α|v|^β` with `p = α + β`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::exponents::Exponents;

/// Relative tolerance for the `α + β = 2*(s)` binding.
const COUPLING_TOL: f64 = 1e-12;
/// Borderline `κ = threshold` is inadmissible within this tolerance.
pub const THRESHOLD_TOL: f64 = 1e-12;

/// `(λ, μ, κ, α, β)` of the system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingParams {
    pub lambda: f64,
    pub mu: f64,
    pub kappa: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl CouplingParams {
    pub fn new(lambda: f64, mu: f64, kappa: f64, alpha: f64, beta: f64) -> Result<Self> {
        let finite = [lambda, mu, kappa, alpha, beta]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return domain("coupling parameters must be finite");
        }
        if lambda <= 0.0 {
            return domain(format!("lambda = {lambda} must be > 0"));
        }
        if mu <= 0.0 {
            return domain(format!("mu = {mu} must be > 0"));
        }
        if kappa == 0.0 {
            return domain("kappa must be nonzero");
        }
        if alpha <= 1.0 {
            return domain(format!("alpha = {alpha} must be > 1"));
        }
        if beta <= 1.0 {
            return domain(format!("beta = {beta} must be > 1"));
        }
        Ok(Self {
            lambda,
            mu,
            kappa,
            alpha,
            beta,
        })
    }

    /// Checks `α + β = 2*(s2)` for the given exponents.
    pub fn check_critical(&self, exps: &Exponents) -> Result<()> {
        check_sum(self.alpha, self.beta, exps.two_star_s2)
    }

    /// `(cλ, cμ, cκ)` with the same exponents.
    pub fn rescaled(&self, c: f64) -> Self {
        Self {
            lambda: c * self.lambda,
            mu: c * self.mu,
            kappa: c * self.kappa,
            ..*self
        }
    }

    pub fn admissibility_threshold(&self, two_star_s: f64) -> Result<f64> {
        admissibility_threshold(self.alpha, self.beta, self.lambda, self.mu, two_star_s)
    }

    /// `κ > threshold` with the borderline counted as inadmissible.
    pub fn is_admissible(&self, two_star_s: f64) -> Result<bool> {
        let t = self.admissibility_threshold(two_star_s)?;
        Ok(self.kappa > t + THRESHOLD_TOL * t.abs().max(1.0))
    }
}

fn check_sum(alpha: f64, beta: f64, two_star_s: f64) -> Result<()> {
    if ((alpha + beta) - two_star_s).abs() > COUPLING_TOL * two_star_s.abs().max(1.0) {
        return domain(format!(
            "coupling mismatch: alpha + beta = {} but 2*(s) = {two_star_s}",
            alpha + beta
        ));
    }
    Ok(())
}

/// `κ(α,β,λ,μ) = (α+β)(λ/α)^{α/(α+β)}(μ/β)^{β/(α+β)}`.
pub fn best_young_constant(alpha: f64, beta: f64, lambda: f64, mu: f64) -> f64 {
    let sum = alpha + beta;
    sum * (lambda / alpha).powf(alpha / sum) * (mu / beta).powf(beta / sum)
}

/// Ratio `t = (λβ/(μα))^{1/(α+β)}` at which `(u, t·u)` is extremal.
pub fn young_extremal_ratio(alpha: f64, beta: f64, lambda: f64, mu: f64) -> f64 {
    (lambda * beta / (mu * alpha)).powf(1.0 / (alpha + beta))
}

/// `λX + μY - κ_best X^{α/(α+β)} Y^{β/(α+β)}` for `X, Y ≥ 0`.
pub fn young_slack(alpha: f64, beta: f64, lambda: f64, mu: f64, x: f64, y: f64) -> f64 {
    let sum = alpha + beta;
    lambda * x + mu * y
        - best_young_constant(alpha, beta, lambda, mu) * x.powf(alpha / sum) * y.powf(beta / sum)
}

/// `-(λ/α)^{α/p}(μ/β)^{β/p}`; the functional is positive on every
/// nonzero pair iff `κ` exceeds this value.
pub fn admissibility_threshold(
    alpha: f64,
    beta: f64,
    lambda: f64,
    mu: f64,
    two_star_s: f64,
) -> Result<f64> {
    check_sum(alpha, beta, two_star_s)?;
    let p = two_star_s;
    Ok(-(lambda / alpha).powf(alpha / p) * (mu / beta).powf(beta / p))
}
