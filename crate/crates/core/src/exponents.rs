//! Critical and interpolation exponents.
//!
//! `2*(s) = 2(N-s)/(N-2)` is the Hardy–Sobolev exponent for the weight
//! `|x|^{-s}`. The interpolation inequality
//!
//! ```text
//! |u|_{2*(s2),s2} <= |u|_{2*(s1),s1}^θ · |u|_{2*(s3),s3}^{1-θ},   s1 < s2 < s3
//! ```
//!
//! follows from Hölder's inequality with the split
//! `s2 = a·s1 + (1-a)·s3`, `a = (s3-s2)/(s3-s1)`. The same split holds for
//! the discrete quadrature measure, so [`certify_interpolation`] is exact up
//! to rounding on any sampled profile.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::radial::RadialProfile;

fn check_dim(n: u32) -> Result<()> {
    if n < 3 {
        return domain(format!("dimension N = {n} must be >= 3"));
    }
    Ok(())
}

fn check_closed(name: &str, s: f64) -> Result<()> {
    if !(0.0..=2.0).contains(&s) {
        return domain(format!("{name} = {s} must lie in [0, 2]"));
    }
    Ok(())
}

/// Hardy–Sobolev critical exponent `2(N-s)/(N-2)`.
pub fn two_star(n: u32, s: f64) -> Result<f64> {
    check_dim(n)?;
    check_closed("s", s)?;
    let n = n as f64;
    Ok(2.0 * (n - s) / (n - 2.0))
}

/// Interpolation exponent `θ = (N-s1)(s3-s2) / ((N-s2)(s3-s1))`.
pub fn interp_theta(n: u32, s1: f64, s2: f64, s3: f64) -> Result<f64> {
    check_dim(n)?;
    check_closed("s1", s1)?;
    check_closed("s3", s3)?;
    if !(s1 < s2 && s2 < s3) {
        return domain(format!(
            "interpolation needs s1 < s2 < s3, got ({s1}, {s2}, {s3})"
        ));
    }
    let n = n as f64;
    Ok((n - s1) * (s3 - s2) / ((n - s2) * (s3 - s1)))
}

/// `ϑ(s1,s2) = N(s2-s1) / (s2(N-s1))`.
pub fn vartheta(n: u32, s1: f64, s2: f64) -> Result<f64> {
    check_dim(n)?;
    check_closed("s1", s1)?;
    check_closed("s2", s2)?;
    if s1 > s2 {
        return domain(format!("vartheta needs s1 <= s2, got ({s1}, {s2})"));
    }
    if s2 == 0.0 {
        return domain("vartheta is undefined for s2 = 0 (division by zero)");
    }
    let n = n as f64;
    Ok(n * (s2 - s1) / (s2 * (n - s1)))
}

/// `ς(s1,s2) = (N-s1)(2-s2) / ((N-s2)(2-s1))`.
pub fn varsigma(n: u32, s1: f64, s2: f64) -> Result<f64> {
    check_dim(n)?;
    check_closed("s1", s1)?;
    check_closed("s2", s2)?;
    if s1 > s2 {
        return domain(format!("varsigma needs s1 <= s2, got ({s1}, {s2})"));
    }
    if s1 == s2 {
        return Ok(1.0);
    }
    let n = n as f64;
    Ok((n - s1) * (2.0 - s2) / ((n - s2) * (2.0 - s1)))
}

/// Dimension and singularity orders with their critical exponents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    pub n: u32,
    pub s1: f64,
    pub s2: f64,
    pub two_star_s1: f64,
    pub two_star_s2: f64,
}

impl Exponents {
    /// Both orders must lie in the open interval `(0, 2)`.
    pub fn new(n: u32, s1: f64, s2: f64) -> Result<Self> {
        for (name, s) in [("s1", s1), ("s2", s2)] {
            if !(s > 0.0 && s < 2.0) {
                return domain(format!("{name} = {s} must lie in (0, 2)"));
            }
        }
        Ok(Self {
            n,
            s1,
            s2,
            two_star_s1: two_star(n, s1)?,
            two_star_s2: two_star(n, s2)?,
        })
    }

    /// The `s1 = s2 = s` case used throughout the sharp-constant analysis.
    pub fn single(n: u32, s: f64) -> Result<Self> {
        Self::new(n, s, s)
    }

    pub fn is_single(&self) -> bool {
        self.s1 == self.s2
    }

    /// `s` of a single-order instance, or an error when `s1 != s2`.
    pub fn common_s(&self) -> Result<f64> {
        if !self.is_single() {
            return domain(format!(
                "operation needs s1 = s2, got ({}, {})",
                self.s1, self.s2
            ));
        }
        Ok(self.s1)
    }
}

/// Hölder slack `|u|^θ_{2*(s1),s1} |u|^{1-θ}_{2*(s3),s3} - |u|_{2*(s2),s2}`.
///
/// Non-negative up to rounding; a negative value larger than `1e-10`
/// in magnitude indicates a broken quadrature.
pub fn certify_interpolation(profile: &RadialProfile, s1: f64, s2: f64, s3: f64) -> Result<f64> {
    let n = profile.grid().dim();
    let theta = interp_theta(n, s1, s2, s3)?;
    let norm = |s: f64| -> Result<f64> {
        let p = two_star(n, s)?;
        profile.weighted_lp_norm(p, s)
    };
    let (n1, n2, n3) = (norm(s1)?, norm(s2)?, norm(s3)?);
    let slack = n1.powf(theta) * n3.powf(1.0 - theta) - n2;
    if !slack.is_finite() {
        return Err(Error::NonFinite("interpolation slack"));
    }
    Ok(slack)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn two_star_examples() {
        assert_eq!(two_star(3, 1.0).unwrap(), 4.0);
        assert_eq!(two_star(3, 0.0).unwrap(), 6.0);
        assert_eq!(two_star(4, 2.0).unwrap(), 2.0);
        assert!(two_star(2, 1.0).is_err());
        assert!(two_star(3, 2.5).is_err());
        assert!(two_star(3, -0.1).is_err());
    }

    #[test]
    fn theta_examples() {
        assert_relative_eq!(interp_theta(3, 0.0, 1.0, 2.0).unwrap(), 0.75);
        assert_relative_eq!(interp_theta(4, 0.0, 1.0, 2.0).unwrap(), 4.0 / 6.0);
        assert!(interp_theta(3, 1.0, 1.0, 2.0).is_err());
        assert!(interp_theta(3, 1.5, 1.0, 2.0).is_err());
    }

    #[test]
    fn vartheta_examples() {
        assert_relative_eq!(vartheta(3, 1.0, 2.0).unwrap(), 0.75);
        assert_eq!(vartheta(3, 1.0, 1.0).unwrap(), 0.0);
        assert_relative_eq!(vartheta(3, 0.0, 2.0).unwrap(), 1.0);
        assert!(matches!(vartheta(3, 0.0, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn varsigma_examples() {
        assert_relative_eq!(varsigma(3, 0.0, 1.0).unwrap(), 0.75);
        assert_eq!(varsigma(3, 1.0, 1.0).unwrap(), 1.0);
        assert_eq!(varsigma(3, 0.0, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn exponents_struct() {
        let e = Exponents::single(3, 1.0).unwrap();
        assert_eq!(e.two_star_s1, 4.0);
        assert!(e.is_single());
        assert!(Exponents::new(3, 0.0, 1.0).is_err());
        assert!(Exponents::new(3, 1.0, 2.0).is_err());
        assert!(Exponents::new(3, 0.5, 1.0).unwrap().common_s().is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn theta_in_unit_interval_and_decreasing(
                n in 3u32..9,
                a in 0.0f64..2.0,
                b in 0.0f64..2.0,
                c in 0.0f64..2.0,
                frac in 0.01f64..0.99,
            ) {
                let mut v = [a, b, c];
                v.sort_by(|x, y| x.partial_cmp(y).unwrap());
                let (s1, s3) = (v[0], v[2]);
                prop_assume!(s3 - s1 > 1e-3);
                let s2 = s1 + frac * (s3 - s1);
                let th = interp_theta(n, s1, s2, s3).unwrap();
                prop_assert!(th > 0.0 && th < 1.0);
                let s2b = s1 + (frac + 0.5 * (1.0 - frac)) * (s3 - s1);
                let thb = interp_theta(n, s1, s2b, s3).unwrap();
                prop_assert!(thb < th);
            }

            #[test]
            fn two_star_decreasing_above_two(n in 3u32..12, s in 0.0f64..1.999, ds in 1e-4f64..0.5) {
                let a = two_star(n, s).unwrap();
                prop_assert!(a > 2.0);
                prop_assert!(a <= 2.0 * n as f64 / (n as f64 - 2.0));
                let t = (s + ds).min(2.0);
                prop_assert!(two_star(n, t).unwrap() < a);
            }
        }
    }
}
