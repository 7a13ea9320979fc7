//! Fiber map, sign polynomial and Nehari projection.
//!
//! Restricting the sharp-constant quotient to pairs `(u, t·u)` with `u` a
//! scalar extremal reduces it to
//!
//! ```text
//! g(t) = (1 + t²) / [λ + μt^p + pκt^β]^{2/p}
//! g'(t) = -2t [λ + μt^p + pκt^β]^{-2/p-1} · h(t)
//! h(t) = μt^{p-2} - καt^β + κβt^{β-2} - λ
//! ```
//!
//! so interior minimizers of `g` are the `+ → -` sign changes of `h`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::coupling::CouplingParams;
use crate::error::{domain, Error, Result};
use crate::format::num;

pub const SCAN_T_MIN: f64 = 1e-8;
pub const SCAN_T_MAX: f64 = 1e8;
pub const SCAN_POINTS: usize = 2048;
/// Relative bracket width at which root polishing stops.
pub const BISECTION_WIDTH: f64 = 1e-14;
/// Relative tolerance separating an interior minimum from an endpoint.
pub const TIE_TOL: f64 = 1e-10;

/// Where the infimum of `g` over `[0, ∞]` sits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FiberArg {
    Zero,
    Interior(f64),
    /// `t → ∞`; never used inside arithmetic.
    Infinity,
}

/// Shape of the minimization outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FiberOutcome {
    /// An interior point is strictly below both endpoints.
    Interior,
    /// The infimum is an endpoint value and no interior point reaches it.
    Endpoint,
    /// An interior critical point ties with the endpoint minimum.
    Tie,
    /// `g` is constant on `[0, ∞)`.
    Flat,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberMinimum {
    pub t_star: FiberArg,
    pub g_min: f64,
    pub outcome: FiberOutcome,
}

/// `g` and `h` for one parameter set with `s1 = s2 = s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberMap {
    params: CouplingParams,
    two_star_s: f64,
}

impl FiberMap {
    pub fn new(params: CouplingParams, two_star_s: f64) -> Result<Self> {
        params.admissibility_threshold(two_star_s)?;
        Ok(Self { params, two_star_s })
    }

    pub fn params(&self) -> &CouplingParams {
        &self.params
    }

    pub fn two_star_s(&self) -> f64 {
        self.two_star_s
    }

    /// `λ + μt^p + pκt^β`.
    pub fn denominator(&self, t: f64) -> f64 {
        let c = &self.params;
        let p = self.two_star_s;
        c.lambda + c.mu * t.powf(p) + p * c.kappa * t.powf(c.beta)
    }

    pub fn g(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) || !t.is_finite() {
            return domain(format!("g needs finite t >= 0, got {t}"));
        }
        let d = self.denominator(t);
        if d <= 0.0 {
            return Err(Error::Inadmissible {
                kappa: self.params.kappa,
                threshold: self.params.admissibility_threshold(self.two_star_s)?,
            });
        }
        Ok((1.0 + t * t) / d.powf(2.0 / self.two_star_s))
    }

    /// `λ^{-2/p}`.
    pub fn g_at_zero(&self) -> f64 {
        self.params.lambda.powf(-2.0 / self.two_star_s)
    }

    /// `lim_{t→∞} g(t) = μ^{-2/p}`.
    pub fn g_at_infinity(&self) -> f64 {
        self.params.mu.powf(-2.0 / self.two_star_s)
    }

    pub fn h(&self, t: f64) -> f64 {
        let c = &self.params;
        let p = self.two_star_s;
        c.mu * t.powf(p - 2.0) - c.kappa * c.alpha * t.powf(c.beta)
            + c.kappa * c.beta * t.powf(c.beta - 2.0)
            - c.lambda
    }

    /// Sum of the magnitudes of the terms of `h`, for relative tests.
    fn h_scale(&self, t: f64) -> f64 {
        let c = &self.params;
        let p = self.two_star_s;
        c.mu * t.powf(p - 2.0)
            + (c.kappa * c.alpha).abs() * t.powf(c.beta)
            + (c.kappa * c.beta).abs() * t.powf(c.beta - 2.0)
            + c.lambda
    }

    /// `g'(t)` through the product form with `h`.
    pub fn g_prime(&self, t: f64) -> Result<f64> {
        let d = self.denominator(t);
        if d <= 0.0 {
            return Err(Error::Inadmissible {
                kappa: self.params.kappa,
                threshold: self.params.admissibility_threshold(self.two_star_s)?,
            });
        }
        Ok(-2.0 * t * d.powf(-2.0 / self.two_star_s - 1.0) * self.h(t))
    }

    fn polish_root(&self, mut lo: f64, mut hi: f64) -> f64 {
        let mut h_lo = self.h(lo);
        while hi / lo - 1.0 > BISECTION_WIDTH {
            let mid = (lo * hi).sqrt();
            if mid <= lo || mid >= hi {
                break;
            }
            let hm = self.h(mid);
            if hm == 0.0 {
                return mid;
            }
            if (hm > 0.0) == (h_lo > 0.0) {
                lo = mid;
                h_lo = hm;
            } else {
                hi = mid;
            }
        }
        (lo * hi).sqrt()
    }

    /// Infimum of `g` over `[0, ∞]`.
    ///
    /// Interior candidates are the `+ → -` sign changes of `h` on a
    /// 2048-point log scan of `[1e-8, 1e8]`, polished by bisection.
    pub fn minimize_g(&self) -> Result<FiberMinimum> {
        if !self.params.is_admissible(self.two_star_s)? {
            return Err(Error::Inadmissible {
                kappa: self.params.kappa,
                threshold: self.params.admissibility_threshold(self.two_star_s)?,
            });
        }
        let g0 = self.g_at_zero();
        let ginf = self.g_at_infinity();
        let (end_arg, end_val) = if g0 <= ginf {
            (FiberArg::Zero, g0)
        } else {
            (FiberArg::Infinity, ginf)
        };

        let ts = log_space(SCAN_T_MIN, SCAN_T_MAX, SCAN_POINTS);
        let hs: Vec<f64> = ts.iter().map(|&t| self.h(t)).collect();

        let flat = ts
            .iter()
            .zip(&hs)
            .all(|(&t, &h)| h.abs() <= 1e-12 * self.h_scale(t));
        if flat {
            let g1 = self.g(1.0)?;
            return Ok(FiberMinimum {
                t_star: FiberArg::Interior(1.0),
                g_min: g1.min(end_val),
                outcome: FiberOutcome::Flat,
            });
        }

        let mut best: Option<(f64, f64)> = None;
        for i in 0..ts.len() - 1 {
            if hs[i] > 0.0 && hs[i + 1] <= 0.0 {
                let root = if hs[i + 1] == 0.0 {
                    ts[i + 1]
                } else {
                    self.polish_root(ts[i], ts[i + 1])
                };
                let val = self.g(root)?;
                if best.is_none_or(|(_, b)| val < b) {
                    best = Some((root, val));
                }
            }
        }

        let tol = TIE_TOL * end_val;
        Ok(match best {
            Some((t, val)) if val < end_val - tol => FiberMinimum {
                t_star: FiberArg::Interior(t),
                g_min: val,
                outcome: FiberOutcome::Interior,
            },
            Some((_, val)) if (val - end_val).abs() <= tol => FiberMinimum {
                t_star: end_arg,
                g_min: val.min(end_val),
                outcome: FiberOutcome::Tie,
            },
            _ => FiberMinimum {
                t_star: end_arg,
                g_min: end_val,
                outcome: FiberOutcome::Endpoint,
            },
        })
    }

    /// Writes `t,g,h` rows for the given sample points (`t > 0`).
    pub fn write_samples_csv<W: Write>(&self, ts: &[f64], out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "g", "h"])?;
        for &t in ts {
            if !(t > 0.0) {
                return domain(format!("sample point t = {t} must be > 0"));
            }
            w.write_record([num(t), num(self.g(t)?), num(self.h(t))])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// Coefficients of the fiber equation `a = b t^{p1-2} + p2 κ c t^{p2-2}`
/// along the ray `t ↦ (t·u, t·v)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NehariCoefficients {
    /// `‖(u,v)‖²`.
    pub a: f64,
    /// `λ|u|^{p1}_{p1,s1} + μ|v|^{p1}_{p1,s1}`.
    pub b: f64,
    /// `∫ |u|^α |v|^β |x|^{-s2} dx`.
    pub c: f64,
    pub two_star_s1: f64,
    pub two_star_s2: f64,
    pub kappa: f64,
}

impl NehariCoefficients {
    pub fn new(
        a: f64,
        b: f64,
        c: f64,
        two_star_s1: f64,
        two_star_s2: f64,
        kappa: f64,
    ) -> Result<Self> {
        if !(a > 0.0) {
            return domain(format!("a = {a} must be > 0"));
        }
        if !(b > 0.0) {
            return domain(format!("b = {b} must be > 0"));
        }
        if !(c >= 0.0) {
            return domain(format!("c = {c} must be >= 0"));
        }
        if !(two_star_s1 > 2.0 && two_star_s2 > 2.0) {
            return domain("critical exponents must exceed 2");
        }
        if !kappa.is_finite() {
            return domain("kappa must be finite");
        }
        Ok(Self {
            a,
            b,
            c,
            two_star_s1,
            two_star_s2,
            kappa,
        })
    }

    /// `a - b t^{p1-2} - p2 κ c t^{p2-2}`.
    pub fn residual(&self, t: f64) -> f64 {
        self.a
            - self.b * t.powf(self.two_star_s1 - 2.0)
            - self.two_star_s2 * self.kappa * self.c * t.powf(self.two_star_s2 - 2.0)
    }

    /// `b + p2 κ c`; for `s1 = s2` the fiber equation has a unique
    /// positive root iff this is positive.
    pub fn positivity_margin(&self) -> f64 {
        self.b + self.two_star_s2 * self.kappa * self.c
    }

    fn unique_root_guaranteed(&self) -> bool {
        self.kappa > 0.0
            || self.c == 0.0
            || (self.two_star_s1 == self.two_star_s2 && self.positivity_margin() > 0.0)
    }

    /// Unique `t > 0` with `(t·u, t·v)` on the Nehari manifold.
    pub fn nehari_project(&self) -> Result<f64> {
        if !self.unique_root_guaranteed() {
            return Err(Error::NoSignChange(
                "Nehari fiber equation (kappa < 0 outside the s1 = s2 positivity regime)",
            ));
        }
        let f = |t: f64| self.residual(t);
        let (mut lo, mut hi) = (1.0f64, 1.0f64);
        while f(lo) <= 0.0 {
            lo *= 0.5;
            if lo < 1e-300 {
                return Err(Error::NoSignChange("Nehari fiber equation"));
            }
        }
        while f(hi) > 0.0 {
            hi *= 2.0;
            if hi > 1e300 {
                return Err(Error::NoSignChange("Nehari fiber equation"));
            }
        }
        let target = 1e-12 * self.a;
        loop {
            let mid = (lo * hi).sqrt();
            let r = f(mid);
            if r.abs() < target || mid <= lo || mid >= hi || hi / lo - 1.0 < 1e-16 {
                return Ok(mid);
            }
            if r > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }

    /// `Φ(t·u, t·v)` on the Nehari manifold:
    /// `(1/2 - 1/p2) a t² + (1/p2 - 1/p1) b t^{p1}`.
    pub fn fiber_energy(&self, t: f64) -> f64 {
        let (p1, p2) = (self.two_star_s1, self.two_star_s2);
        (0.5 - 1.0 / p2) * self.a * t * t + (1.0 / p2 - 1.0 / p1) * self.b * t.powf(p1)
    }

    /// Number of sign changes of the fiber residual on a log scan of
    /// `[lo, hi]` with `n` points.
    pub fn count_roots(&self, lo: f64, hi: f64, n: usize) -> usize {
        let ts = log_space(lo, hi, n);
        let signs: Vec<bool> = ts.iter().map(|&t| self.residual(t) > 0.0).collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    }
}
