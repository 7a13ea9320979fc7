//! Radial functions on `ℝ^N` sampled on a log-spaced grid.
//!
//! With `x = ln r` the singular-weight integrals become
//!
//! ```text
//! ∫ f(|x|) |x|^{-s} dx = ω_{N-1} ∫ f(e^x) e^{(N-s)x} dx
//! ```
//!
//! and the integrand decays exponentially at both ends for every profile
//! of interest, so the composite trapezoid rule in `x` converges
//! spectrally. The Dirichlet energy is discretized on cell midpoints with
//! a staggered fourth-order difference plus the exact energy of the
//! harmonic extension `u(R)(R/r)^{N-2}` beyond the last node.

use std::io::{Read, Write};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Error, Result};
use crate::format::num;

pub const DEFAULT_R_MIN: f64 = 1e-6;
pub const DEFAULT_R_MAX: f64 = 1e6;
pub const DEFAULT_NODES: usize = 4096;
pub const MIN_NODES: usize = 16;

/// Surface measure of the unit sphere `S^{N-1}`.
pub fn sphere_area(n: u32) -> f64 {
    use std::f64::consts::PI;
    match n {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI / (n as f64 - 2.0) * sphere_area(n - 2),
    }
}

/// Log-spaced nodes `r_min = r_0 < ... < r_{M-1} = r_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    dim: u32,
    nodes: Vec<f64>,
    logs: Vec<f64>,
    step: f64,
    omega: f64,
}

impl RadialGrid {
    pub fn new(dim: u32, r_min: f64, r_max: f64, m: usize) -> Result<Self> {
        if dim < 3 {
            return domain(format!("dimension N = {dim} must be >= 3"));
        }
        if !(r_min > 0.0 && r_min.is_finite()) {
            return domain(format!("r_min = {r_min} must be positive"));
        }
        if !(r_max > r_min && r_max.is_finite()) {
            return domain(format!("r_max = {r_max} must exceed r_min = {r_min}"));
        }
        if m < MIN_NODES {
            return domain(format!("grid needs at least {MIN_NODES} nodes, got {m}"));
        }
        let (a, b) = (r_min.ln(), r_max.ln());
        let step = (b - a) / (m - 1) as f64;
        let logs: Vec<f64> = (0..m)
            .map(|i| if i == m - 1 { b } else { a + step * i as f64 })
            .collect();
        let mut nodes: Vec<f64> = logs.iter().map(|x| x.exp()).collect();
        nodes[0] = r_min;
        nodes[m - 1] = r_max;
        Ok(Self {
            dim,
            nodes,
            logs,
            step,
            omega: sphere_area(dim),
        })
    }

    /// Defaults: `r ∈ [1e-6, 1e6]`, 4096 nodes.
    pub fn with_defaults(dim: u32) -> Result<Self> {
        Self::new(dim, DEFAULT_R_MIN, DEFAULT_R_MAX, DEFAULT_NODES)
    }

    /// Rebuilds a grid from sampled radii, which must be log-uniform.
    pub fn from_nodes(dim: u32, radii: &[f64]) -> Result<Self> {
        if radii.len() < MIN_NODES {
            return domain(format!("grid needs at least {MIN_NODES} nodes"));
        }
        let grid = Self::new(dim, radii[0], radii[radii.len() - 1], radii.len())?;
        for (a, b) in grid.nodes.iter().zip(radii) {
            if (a - b).abs() > 1e-9 * a {
                return domain(format!("radius {b} does not lie on a log-uniform grid"));
            }
        }
        Ok(grid)
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn r_min(&self) -> f64 {
        self.nodes[0]
    }

    pub fn r_max(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Spacing in `ln r`.
    pub fn log_step(&self) -> f64 {
        self.step
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub(crate) fn log_nodes(&self) -> &[f64] {
        &self.logs
    }

    /// Trapezoid weight of node `i` in the log variable.
    #[inline]
    pub(crate) fn log_weight(&self, i: usize) -> f64 {
        if i == 0 || i == self.nodes.len() - 1 {
            0.5 * self.step
        } else {
            self.step
        }
    }

    /// Per-node weights `w_i` with `Σ w_i f_i ≈ ∫ f(|x|) |x|^{-s} dx`.
    pub fn measure(&self, s: f64) -> Vec<f64> {
        let e = self.dim as f64 - s;
        (0..self.len())
            .map(|i| self.omega * self.log_weight(i) * (e * self.logs[i]).exp())
            .collect()
    }

    /// `∫ f(|x|) |x|^{-s} dx` for nodal values `f`.
    pub fn integrate(&self, values: &[f64], s: f64) -> f64 {
        self.measure(s).iter().zip(values).map(|(w, f)| w * f).sum()
    }

    pub(crate) fn dirichlet(&self) -> DirichletForm {
        DirichletForm::new(self)
    }
}

/// Quadratic form `∫|∇u|² dx` on a grid.
///
/// Interior cells use `(u_{i-1} - 27u_i + 27u_{i+1} - u_{i+2}) / 24h` at
/// the cell midpoint, the two end cells the two-point difference.
#[derive(Debug, Clone)]
pub(crate) struct DirichletForm {
    omega: f64,
    step: f64,
    cell_weight: Vec<f64>,
    exterior: f64,
}

impl DirichletForm {
    fn new(grid: &RadialGrid) -> Self {
        let m = grid.len();
        let n = grid.dim as f64;
        let h = grid.step;
        let cell_weight = (0..m - 1)
            .map(|c| {
                let mid = 0.5 * (grid.logs[c] + grid.logs[c + 1]);
                h * ((n - 2.0) * mid).exp()
            })
            .collect();
        Self {
            omega: grid.omega,
            step: h,
            cell_weight,
            exterior: (n - 2.0) * grid.r_max().powf(n - 2.0),
        }
    }

    fn cells(&self) -> usize {
        self.cell_weight.len()
    }

    #[inline]
    fn diff(&self, u: &[f64], c: usize) -> f64 {
        let last = self.cells() - 1;
        if c == 0 || c == last {
            (u[c + 1] - u[c]) / self.step
        } else {
            (u[c - 1] - 27.0 * u[c] + 27.0 * u[c + 1] - u[c + 2]) / (24.0 * self.step)
        }
    }

    pub(crate) fn energy(&self, u: &[f64]) -> f64 {
        let inner: f64 = (0..self.cells())
            .map(|c| {
                let d = self.diff(u, c);
                self.cell_weight[c] * d * d
            })
            .sum();
        let tail = u[u.len() - 1];
        self.omega * (inner + self.exterior * tail * tail)
    }

    /// Euclidean gradient of [`Self::energy`].
    pub(crate) fn gradient(&self, u: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; u.len()];
        let last = self.cells() - 1;
        for c in 0..self.cells() {
            let w = 2.0 * self.omega * self.cell_weight[c] * self.diff(u, c);
            if c == 0 || c == last {
                let k = w / self.step;
                g[c] -= k;
                g[c + 1] += k;
            } else {
                let k = w / (24.0 * self.step);
                g[c - 1] += k;
                g[c] -= 27.0 * k;
                g[c + 1] += 27.0 * k;
                g[c + 2] -= k;
            }
        }
        let m = u.len() - 1;
        g[m] += 2.0 * self.omega * self.exterior * u[m];
        g
    }

    /// Solves `P x = rhs` for the two-point stiffness matrix `P`, which is
    /// spectrally equivalent to the Hessian of [`Self::energy`].
    pub(crate) fn precondition(&self, rhs: &[f64]) -> Vec<f64> {
        let m = rhs.len();
        let mut diag = vec![0.0; m];
        let mut off = vec![0.0; m - 1];
        for c in 0..self.cells() {
            let k = 2.0 * self.omega * self.cell_weight[c] / (self.step * self.step);
            diag[c] += k;
            diag[c + 1] += k;
            off[c] = -k;
        }
        diag[m - 1] += 2.0 * self.omega * self.exterior;
        solve_symmetric_tridiagonal(&diag, &off, rhs)
    }
}

/// Thomas algorithm for a symmetric positive-definite tridiagonal system.
fn solve_symmetric_tridiagonal(diag: &[f64], off: &[f64], rhs: &[f64]) -> Vec<f64> {
    let m = diag.len();
    let mut c = vec![0.0; m];
    let mut d = vec![0.0; m];
    c[0] = if m > 1 { off[0] / diag[0] } else { 0.0 };
    d[0] = rhs[0] / diag[0];
    for i in 1..m {
        let denom = diag[i] - off[i - 1] * c[i - 1];
        if i < m - 1 {
            c[i] = off[i] / denom;
        }
        d[i] = (rhs[i] - off[i - 1] * d[i - 1]) / denom;
    }
    let mut x = vec![0.0; m];
    x[m - 1] = d[m - 1];
    for i in (0..m - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// A radial function sampled at the nodes of a [`RadialGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
}

impl RadialProfile {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return domain(format!(
                "profile has {} values for {} nodes",
                values.len(),
                grid.len()
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("profile values"));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self::new(grid, values)
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let values = vec![0.0; grid.len()];
        Self { grid, values }
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn shared_grid(&self) -> Arc<RadialGrid> {
        Arc::clone(&self.grid)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    /// `|u|_{p,s} = (∫ |u|^p |x|^{-s} dx)^{1/p}`.
    pub fn weighted_lp_norm(&self, p: f64, s: f64) -> Result<f64> {
        if p < 1.0 {
            return domain(format!("norm exponent p = {p} must be >= 1"));
        }
        if !(0.0..=2.0).contains(&s) {
            return domain(format!("weight order s = {s} must lie in [0, 2]"));
        }
        let pow: Vec<f64> = self.values.iter().map(|v| v.abs().powf(p)).collect();
        let norm = self.grid.integrate(&pow, s).powf(1.0 / p);
        if !norm.is_finite() {
            return Err(Error::NonFinite(
                "weighted norm (under-resolved singularity)",
            ));
        }
        Ok(norm)
    }

    /// `∫ |∇u|² dx`.
    pub fn dirichlet_energy(&self) -> f64 {
        self.grid.dirichlet().energy(&self.values)
    }

    /// `-Δu` at nodes `1..M-1` from three-point non-uniform differences.
    ///
    /// Entry `i` of the result corresponds to node `i + 1`.
    pub fn neg_laplacian(&self) -> Vec<f64> {
        let r = self.grid.nodes();
        let u = &self.values;
        let n = self.grid.dim() as f64;
        (1..r.len() - 1)
            .map(|i| {
                let h1 = r[i] - r[i - 1];
                let h2 = r[i + 1] - r[i];
                let d1 = -h2 / (h1 * (h1 + h2)) * u[i - 1]
                    + (h2 - h1) / (h1 * h2) * u[i]
                    + h1 / (h2 * (h1 + h2)) * u[i + 1];
                let d2 = 2.0
                    * (u[i - 1] / (h1 * (h1 + h2)) - u[i] / (h1 * h2)
                        + u[i + 1] / (h2 * (h1 + h2)));
                -d2 - (n - 1.0) * d1 / r[i]
            })
            .collect()
    }

    /// Relative `L²(ℝ^N)` residual of `-Δu = rhs` over nodes `2..M-2`.
    pub fn laplacian_residual(&self, rhs: &RadialProfile) -> Result<f64> {
        if rhs.values.len() != self.values.len() {
            return domain("residual needs profiles on the same grid");
        }
        let lap = self.neg_laplacian();
        let m = self.values.len();
        let w = self.grid.measure(0.0);
        let (mut num2, mut den2) = (0.0, 0.0);
        for i in 2..m - 2 {
            let diff = lap[i - 1] - rhs.values[i];
            num2 += w[i] * diff * diff;
            den2 += w[i] * rhs.values[i] * rhs.values[i];
        }
        if den2 == 0.0 {
            if num2 == 0.0 {
                return Ok(0.0);
            }
            return Err(Error::ZeroNorm("laplacian residual right-hand side"));
        }
        Ok((num2 / den2).sqrt())
    }

    /// `r ↦ u(r/σ)` by linear interpolation in `ln r`; values beyond the
    /// grid are clamped to the end values.
    pub fn dilated(&self, sigma: f64) -> Self {
        let logs = self.grid.log_nodes();
        let h = self.grid.log_step();
        let shift = sigma.ln();
        let m = logs.len();
        let values = logs
            .iter()
            .map(|&x| {
                let pos = (x - shift - logs[0]) / h;
                if pos <= 0.0 {
                    self.values[0]
                } else if pos >= (m - 1) as f64 {
                    self.values[m - 1]
                } else {
                    let i = pos.floor() as usize;
                    let t = pos - i as f64;
                    (1.0 - t) * self.values[i] + t * self.values[(i + 1).min(m - 1)]
                }
            })
            .collect();
        Self {
            grid: Arc::clone(&self.grid),
            values,
        }
    }

    /// Writes `r,value` rows in node order.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["r", "value"])?;
        for (r, v) in self.grid.nodes().iter().zip(&self.values) {
            w.write_record([num(*r), num(*v)])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a profile written by [`Self::write_csv`].
    pub fn read_csv<R: Read>(dim: u32, input: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(input);
        let headers = rd.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["r", "value"] {
            return Err(Error::Parse(format!(
                "expected header r,value, got {headers:?}"
            )));
        }
        let mut radii = Vec::new();
        let mut values = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            let parse = |k: usize| -> Result<f64> {
                rec.get(k)
                    .ok_or_else(|| Error::Parse("short row".into()))?
                    .trim()
                    .parse()
                    .map_err(|e| Error::Parse(format!("{e}")))
            };
            radii.push(parse(0)?);
            values.push(parse(1)?);
        }
        let grid = RadialGrid::from_nodes(dim, &radii)?;
        Self::new(Arc::new(grid), values)
    }
}

/// Seedable generator of compactly supported smooth bumps.
///
/// A bump is `A·exp(1 - 1/(1-z²))` for `|z| < 1`, `z = (ln r - ln c)/w`,
/// with log-uniform center `c ∈ [1e-2, 1e2]`, log-width `w ∈ [0.3, 4]`
/// and amplitude `A ∈ [0.1, 10]`.
#[derive(Debug, Clone)]
pub struct BumpSampler {
    rng: ChaCha8Rng,
}

impl BumpSampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn log_uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo.ln()..hi.ln()).exp()
    }

    pub fn sample(&mut self, grid: &Arc<RadialGrid>) -> RadialProfile {
        let center = self.log_uniform(1e-2, 1e2).ln();
        let width = self.log_uniform(0.3, 4.0);
        let amp = self.log_uniform(0.1, 10.0);
        bump(grid, center.exp(), width, amp)
    }
}

/// Smooth bump centred at `center` with half-width `log_width` in `ln r`.
pub fn bump(grid: &Arc<RadialGrid>, center: f64, log_width: f64, amplitude: f64) -> RadialProfile {
    let c = center.ln();
    let values = grid
        .log_nodes()
        .iter()
        .map(|&x| {
            let z = (x - c) / log_width;
            if z.abs() < 1.0 {
                amplitude * (1.0 - 1.0 / (1.0 - z * z)).exp()
            } else {
                0.0
            }
        })
        .collect();
    RadialProfile {
        grid: Arc::clone(grid),
        values,
    }
}
