//! Calculus on sharp constants indexed by circular cones
//! `Ω_θ = {x : x·ν > |x| cos θ}`.
//!
//! `S(Ω_θ)` is non-increasing in the aperture and has no closed form for
//! `θ < π`, so the values are supplied by the caller. For `N ≥ 4` the
//! entry at `θ = π` coincides with the whole-space constant.

use std::f64::consts::PI;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::format::num;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeEntry {
    pub theta: f64,
    pub s_value: f64,
    pub provenance: String,
}

/// Entries sorted by increasing aperture.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ConeConstantTable {
    entries: Vec<ConeEntry>,
}

impl ConeConstantTable {
    pub fn new(mut entries: Vec<ConeEntry>) -> Result<Self> {
        for e in &entries {
            if !(e.theta > 0.0 && e.theta <= PI + 1e-12) {
                return domain(format!("theta = {} must lie in (0, pi]", e.theta));
            }
            if !(e.s_value > 0.0 && e.s_value.is_finite()) {
                return domain(format!("S = {} must be positive", e.s_value));
            }
        }
        entries.sort_by(|a, b| a.theta.total_cmp(&b.theta));
        Ok(Self { entries })
    }

    /// Table holding the single whole-space entry `(π, S(ℝ^N))`, valid for `N ≥ 4`.
    pub fn whole_space(n: u32, s_rn: f64) -> Result<Self> {
        if n < 4 {
            return domain(format!(
                "the full cone equals R^N only up to a null set for N >= 4, got N = {n}"
            ));
        }
        Self::new(vec![ConeEntry {
            theta: PI,
            s_value: s_rn,
            provenance: "R^N".into(),
        }])
    }

    pub fn entries(&self) -> &[ConeEntry] {
        &self.entries
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["theta", "S", "provenance"] {
            return Err(Error::Parse(format!("unexpected header {headers:?}")));
        }
        let mut entries = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let field = |i: usize| -> Result<f64> {
                rec[i]
                    .trim()
                    .parse()
                    .map_err(|e| Error::Parse(format!("{:?}: {e}", &rec[i])))
            };
            entries.push(ConeEntry {
                theta: field(0)?,
                s_value: field(1)?,
                provenance: rec[2].to_string(),
            });
        }
        Self::new(entries)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["theta", "S", "provenance"])?;
        for e in &self.entries {
            w.write_record([num(e.theta), num(e.s_value), e.provenance.clone()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Pair of entries with `θ_i < θ_j` but `S_i < S_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub narrower: usize,
    pub wider: usize,
}

pub fn validate_table(table: &ConeConstantTable) -> Vec<Violation> {
    let e = table.entries();
    let mut out = Vec::new();
    for i in 0..e.len() {
        for j in i + 1..e.len() {
            if e[i].theta < e[j].theta && e[i].s_value < e[j].s_value {
                out.push(Violation {
                    narrower: i,
                    wider: j,
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bracket {
    /// Adjacent apertures with `S(θ_lo) ≥ τ ≥ S(θ_hi)`.
    Between { theta_lo: f64, theta_hi: f64 },
    /// `τ` exceeds every entry; the cone lies in `(0, theta_hi)`.
    OpenEnd { theta_hi: f64 },
}

/// Locates apertures between which `S(Ω_θ) = τ`.
pub fn intermediate_value_locate(table: &ConeConstantTable, tau: f64) -> Result<Bracket> {
    let e = table.entries();
    let Some(last) = e.last() else {
        return domain("empty cone table");
    };
    if !validate_table(table).is_empty() {
        return domain("cone table is not monotone in theta");
    }
    if tau < last.s_value {
        return Err(Error::BelowInfimum {
            target: tau,
            infimum: last.s_value,
        });
    }
    if tau > e[0].s_value {
        return Ok(Bracket::OpenEnd {
            theta_hi: e[0].theta,
        });
    }
    for w in e.windows(2) {
        if w[0].s_value >= tau && tau >= w[1].s_value {
            return Ok(Bracket::Between {
                theta_lo: w[0].theta,
                theta_hi: w[1].theta,
            });
        }
    }
    // τ equals the single entry
    Ok(Bracket::Between {
        theta_lo: last.theta,
        theta_hi: last.theta,
    })
}

/// `c_k = (1/2 - 1/p) S^{2/(p-2)} 2^{k(N-1)}`.
pub fn gluing_energy(k: u32, n: u32, two_star_s: f64, s_subcone: f64) -> Result<f64> {
    if k < 1 {
        return domain("k must be >= 1");
    }
    if !(s_subcone > 0.0) {
        return domain(format!("S = {s_subcone} must be positive"));
    }
    if !(two_star_s > 2.0) {
        return domain(format!("2*(s) = {two_star_s} must exceed 2"));
    }
    let p = two_star_s;
    let scale = 2f64.powi((k * (n - 1)) as i32);
    Ok((0.5 - 1.0 / p) * s_subcone.powf(2.0 / (p - 2.0)) * scale)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Attainment {
    Attained,
    NotDecidable,
}

/// Decides attainment from `S(Ω) ≤ min{S⁰(Ω), S^∞(Ω)}`.
pub fn attainment_calculus(s_omega: f64, s0: f64, s_inf: f64) -> Result<Attainment> {
    if !(s_omega > 0.0 && s0 > 0.0 && s_inf > 0.0) {
        return domain("constants must be positive");
    }
    let m = s0.min(s_inf);
    if s_omega > m + 1e-9 {
        return Err(Error::Inconsistent(format!(
            "S = {s_omega} exceeds min(S0, Sinf) = {m}"
        )));
    }
    if s_omega < m - 1e-12 {
        Ok(Attainment::Attained)
    } else {
        Ok(Attainment::NotDecidable)
    }
}
