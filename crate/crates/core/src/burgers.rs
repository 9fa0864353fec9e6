//! Flows `t -> ρ_t` of the constant-profile model and the transport equation
//!
//! ```text
//! ∂_t ρ_t(s) + ∂_s { ρ_t(s) H[ρ_t](s) } = 0,
//! ```
//!
//! checked as a finite-difference residual on given flows (never integrated
//! in time). With `σ² ≡ 1` the perturbed law is the free convolution with a
//! semicircle, so starting from a semicircle of variance `c` the flow stays
//! semicircular with variance `c + t`.

use rayon::prelude::*;

use crate::cauchy::{stieltjes_invert_problem, DensityTable, FieldProblem, SolverConfig};
use crate::error::{Error, Result};
use crate::grid::{LinearTable, UniformGrid};
use crate::hilbert::{hilbert_pv, PvQuadratureConfig, SupportedFn};
use crate::model::{semicircle_pdf, DiagonalSymbol, Ensemble, Example, ModelSpec, VarianceProfile};

/// Slices whose density stays below this fraction of the slice maximum are
/// treated as outside the support.
const SUPPORT_THRESHOLD: f64 = 0.05;

/// Points within this many `ds` of a support edge (of any slice entering the
/// centred difference) are not reported.
const EDGE_MARGIN_STEPS: f64 = 5.0;

/// Semicircle density of the given variance.
pub fn semicircle_density(variance: f64, s: f64) -> Result<f64> {
    if !(variance > 0.0 && variance.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "semicircle variance must be finite and > 0, got {variance}"
        )));
    }
    Ok(semicircle_pdf(variance, s))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FlowProvenance {
    /// `ρ_t` = semicircle of variance `c + t`.
    ClosedFormSemicircle(f64),
    /// Densities from the Cauchy solver (or any other table source).
    SolverGenerated,
}

/// Density slices on a common grid at increasing times.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityFlow {
    pub times: Vec<f64>,
    pub slices: Vec<DensityTable>,
    pub provenance: FlowProvenance,
}

impl DensityFlow {
    pub fn new(times: Vec<f64>, slices: Vec<DensityTable>, provenance: FlowProvenance) -> Result<Self> {
        if times.len() != slices.len() {
            return Err(Error::Mismatch(format!(
                "{} times for {} slices",
                times.len(),
                slices.len()
            )));
        }
        if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::InvalidParameter("flow times must be finite and >= 0".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("flow times must increase".into()));
        }
        if let Some(first) = slices.first() {
            if slices.iter().any(|t| t.grid != first.grid) {
                return Err(Error::Mismatch("flow slices must share one grid".into()));
            }
        }
        Ok(Self {
            times,
            slices,
            provenance,
        })
    }

    /// Semicircle flow started from variance `c`.
    pub fn semicircle(c: f64, times: &[f64], grid: &UniformGrid) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!("c must be finite and > 0, got {c}")));
        }
        let slices = times
            .iter()
            .map(|&t| DensityTable::from_fn(grid.clone(), |s| semicircle_pdf(c + t, s)))
            .collect::<Result<_>>()?;
        Self::new(times.to_vec(), slices, FlowProvenance::ClosedFormSemicircle(c))
    }

    /// Flow of the law of `f(U)` under free convolution with semicircles,
    /// computed by solving the self-consistent equation with `σ² ≡ 1` and
    /// `ε = t`.
    pub fn from_solver(
        f: &DiagonalSymbol,
        times: &[f64],
        grid: &UniformGrid,
        smoothing_eta: f64,
        cfg: &SolverConfig,
    ) -> Result<Self> {
        let ensemble = Ensemble::new(f.clone(), VarianceProfile::constant(1.0)?);
        let problem = FieldProblem::new(&ensemble, cfg.nodes)?;
        let slices = times
            .iter()
            .map(|&t| stieltjes_invert_problem(&problem, t, grid, smoothing_eta, cfg))
            .collect::<Result<_>>()?;
        Self::new(times.to_vec(), slices, FlowProvenance::SolverGenerated)
    }

    pub fn grid(&self) -> Option<&UniformGrid> {
        self.slices.first().map(|s| &s.grid)
    }

    /// Support of slice `k`: exact for the semicircle flow, otherwise the
    /// range where the density exceeds a small fraction of its maximum.
    pub fn support(&self, k: usize) -> (f64, f64) {
        match self.provenance {
            FlowProvenance::ClosedFormSemicircle(c) => {
                let r = 2.0 * (c + self.times[k]).sqrt();
                (-r, r)
            }
            FlowProvenance::SolverGenerated => {
                let slice = &self.slices[k];
                let cut = SUPPORT_THRESHOLD * slice.density.iter().cloned().fold(0.0, f64::max);
                let first = slice.density.iter().position(|&d| d > cut).unwrap_or(0);
                let last = slice.density.iter().rposition(|&d| d > cut).unwrap_or(0);
                (slice.grid.point(first), slice.grid.point(last))
            }
        }
    }

    /// `H[ρ_{t_k}](s)` at every grid point.
    fn hilbert_slice(&self, k: usize, cfg: &PvQuadratureConfig) -> Result<Vec<f64>> {
        let grid = self.grid().expect("non-empty flow");
        let points = grid.to_vec();
        match self.provenance {
            FlowProvenance::ClosedFormSemicircle(c) => {
                let v = c + self.times[k];
                let r = 2.0 * v.sqrt();
                let u = SupportedFn::new(move |t| semicircle_pdf(v, t), -r, r)?;
                points.par_iter().map(|&s| hilbert_pv(&u, s, cfg)).collect()
            }
            FlowProvenance::SolverGenerated => {
                let table = LinearTable::new(grid.start, grid.stop, self.slices[k].density.clone())?;
                let u = SupportedFn::new(move |t| table.eval(t), grid.start, grid.stop)?;
                points.par_iter().map(|&s| hilbert_pv(&u, s, cfg)).collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualPoint {
    pub s: f64,
    pub t: f64,
    pub residual: f64,
    /// `(s - centre) / half-width` of the slice support.
    pub position: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualTable {
    pub dt: f64,
    pub ds: f64,
    pub rows: Vec<ResidualPoint>,
}

impl ResidualTable {
    pub fn max_abs(&self) -> f64 {
        self.max_within(f64::INFINITY)
    }

    /// Largest `|residual|` over points with `|position| ≤ fraction`.
    pub fn max_within(&self, fraction: f64) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.position.abs() <= fraction)
            .map(|r| r.residual.abs())
            .fold(0.0, f64::max)
    }
}

/// Centred-difference residual `∂_t ρ + ∂_s(ρ H[ρ])` at the interior time
/// slices, with `dt` the (uniform) time step of the flow and `ds` the grid
/// step. Points within `5 ds` of the support edges of the three slices
/// involved are dropped.
pub fn burgers_residual(flow: &DensityFlow, cfg: &PvQuadratureConfig) -> Result<ResidualTable> {
    let k = flow.times.len();
    if k < 3 {
        return Err(Error::InvalidParameter(format!(
            "centred time differences need >= 3 slices, got {k}"
        )));
    }
    let dt = flow.times[1] - flow.times[0];
    if flow
        .times
        .windows(2)
        .any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt)
    {
        return Err(Error::InvalidParameter("flow times must be uniformly spaced".into()));
    }
    for (i, slice) in flow.slices.iter().enumerate() {
        if !(slice.mass() > 0.0) {
            return Err(Error::InvalidDensity(format!(
                "slice at t = {} has no mass",
                flow.times[i]
            )));
        }
    }
    let grid = flow.grid().expect("k >= 3").clone();
    for j in 0..k {
        let (lo, hi) = flow.support(j);
        if !grid.covers(lo, hi) {
            return Err(Error::GridCoverage {
                grid_lo: grid.start,
                grid_hi: grid.stop,
                lo,
                hi,
            });
        }
    }
    let ds = grid.step();
    let margin = EDGE_MARGIN_STEPS * ds;
    let mut rows = Vec::new();
    for j in 1..k - 1 {
        let h = flow.hilbert_slice(j, cfg)?;
        let q: Vec<f64> = flow.slices[j].density.iter().zip(&h).map(|(r, h)| r * h).collect();
        let (lo, hi) = flow.support(j);
        let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        let (inner_lo, inner_hi) = (j - 1..=j + 1)
            .map(|m| flow.support(m))
            .fold((f64::NEG_INFINITY, f64::INFINITY), |(a, b), (l, h)| (a.max(l), b.min(h)));
        for i in 1..grid.points - 1 {
            let s = grid.point(i);
            if s - inner_lo <= margin || inner_hi - s <= margin {
                continue;
            }
            let drho = (flow.slices[j + 1].density[i] - flow.slices[j - 1].density[i]) / (2.0 * dt);
            let dq = (q[i + 1] - q[i - 1]) / (2.0 * ds);
            rows.push(ResidualPoint {
                s,
                t: flow.times[j],
                residual: drho + dq,
                position: (s - mid) / half,
            });
        }
    }
    Ok(ResidualTable { dt, ds, rows })
}

/// Grid `[-L, L]` with step `ds` covering the semicircle of variance
/// `max_variance` plus a few steps.
pub fn semicircle_grid(max_variance: f64, ds: f64) -> Result<UniformGrid> {
    if !(ds > 0.0 && max_variance > 0.0) {
        return Err(Error::InvalidParameter("ds and variance must be > 0".into()));
    }
    let cells = ((2.0 * max_variance.sqrt()) / ds).ceil() as usize + 2;
    let l = cells as f64 * ds;
    UniformGrid::new(-l, l, 2 * cells + 1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemigroupConfig {
    pub smoothing_eta: f64,
    /// s-grid points over `[-1.25, 1.25]` times the final support radius.
    pub points: usize,
    pub solver: SolverConfig,
}

impl Default for SemigroupConfig {
    fn default() -> Self {
        Self {
            smoothing_eta: 1e-3,
            points: 401,
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemigroupRow {
    pub s: f64,
    pub solver_density: f64,
    pub closed_form: f64,
    pub abs_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemigroupReport {
    pub c: f64,
    pub t: f64,
    pub rows: Vec<SemigroupRow>,
    /// Largest error over points inside the support of the final law.
    pub sup_error: f64,
}

/// Solver density of `λ_c` perturbed with `ε = t` against the semicircle of
/// variance `c + t`.
pub fn semigroup_check(c: f64, t: f64, cfg: &SemigroupConfig) -> Result<SemigroupReport> {
    if !(c > 0.0 && t > 0.0 && c.is_finite() && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("c and t must be > 0, got c = {c}, t = {t}")));
    }
    let model = ModelSpec::example(Example::Semicircle { variance: c })?;
    let problem = FieldProblem::from_model(&model, cfg.solver.nodes)?;
    let r = 2.0 * (c + t).sqrt();
    let grid = UniformGrid::new(-1.25 * r, 1.25 * r, cfg.points)?;
    let table = stieltjes_invert_problem(&problem, t, &grid, cfg.smoothing_eta, &cfg.solver)?;
    let rows: Vec<SemigroupRow> = grid
        .iter()
        .zip(&table.density)
        .map(|(s, &d)| {
            let exact = semicircle_pdf(c + t, s);
            SemigroupRow {
                s,
                solver_density: d,
                closed_form: exact,
                abs_error: (d - exact).abs(),
            }
        })
        .collect();
    let sup_error = rows
        .iter()
        .filter(|row| row.s.abs() < r)
        .map(|row| row.abs_error)
        .fold(0.0, f64::max);
    Ok(SemigroupReport { c, t, rows, sup_error })
}
