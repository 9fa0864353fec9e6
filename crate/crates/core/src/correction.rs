//! The first-order correction `F(s) = -ρ(s) H[τ(s,·)ρ(·)](s)` and the
//! functionals used to cross-check it.
//!
//! For resolvent test functions `g_z(t) = 1/(z - t)` the second-order
//! remainder has an exact divided difference,
//!
//! ```text
//! (g(t) - g(s) - g'(s)(t - s)) / (t - s)^2 = 1 / ((z - t)(z - s)^2),
//! ```
//!
//! so `Λ(g_z)` is a double integral with a bounded integrand and no diagonal
//! to cut out. It is evaluated by nested graded Gauss-Legendre quadrature,
//! completely independently of the Hilbert transform.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::UniformGrid;
use crate::hilbert::{hilbert_pv, theta_eta, PvQuadratureConfig, SupportedFn};
use crate::model::kernel::holder_ratio;
use crate::model::{Example, ModelSpec};
use crate::quadrature::{breakpoints_within, GradedGauss};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointFlag {
    Ok,
    /// Within `exclusion_eta` of a point where `F` blows up or kinks.
    Singular,
}

impl PointFlag {
    pub fn as_str(&self) -> &'static str {
        match self {
            PointFlag::Ok => "ok",
            PointFlag::Singular => "singular",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionTable {
    pub grid: UniformGrid,
    pub f_values: Vec<f64>,
    /// Finite-difference density correction; NaN where both neighbours are
    /// across a singular point.
    pub df_values: Vec<f64>,
    pub flags: Vec<PointFlag>,
    pub singular_points: Vec<f64>,
}

impl CorrectionTable {
    pub fn len(&self) -> usize {
        self.f_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f_values.is_empty()
    }

    /// Rows `(s, F, dF, flag)`.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64, PointFlag)> + '_ {
        self.grid
            .iter()
            .zip(&self.f_values)
            .zip(&self.df_values)
            .zip(&self.flags)
            .map(|(((s, &f), &df), &flag)| (s, f, df, flag))
    }
}

/// `t -> τ(s,t) ρ(t)` with its jumps declared.
fn kernel_slice(model: &ModelSpec, s: f64) -> SupportedFn<impl Fn(f64) -> f64 + '_> {
    let rho = model.rho();
    let kernel = model.kernel();
    let (lo, hi) = rho.support();
    let jumps = kernel.jumps_in_t(s);
    SupportedFn::new(move |t| kernel.eval(s, t) * rho.pdf(t), lo, hi)
        .expect("density support is a proper interval")
        .with_breaks(rho.breakpoints())
        .with_jumps(rho.jumps())
        .with_jumps(jumps)
}

/// `F(s)`; zero where `ρ(s) = 0`.
pub fn correction_value(model: &ModelSpec, s: f64, cfg: &PvQuadratureConfig) -> Result<f64> {
    let rs = model.rho().pdf(s);
    if rs == 0.0 {
        return Ok(0.0);
    }
    let u = kernel_slice(model, s);
    match hilbert_pv(&u, s, cfg) {
        Ok(h) => Ok(-rs * h),
        // Report the mean of the one-sided limits on a jump.
        Err(Error::AtJump(_)) => {
            let d = 1e-9 * model.rho().support_width();
            let l = correction_value(model, s - d, cfg)?;
            let r = correction_value(model, s + d, cfg)?;
            Ok(0.5 * (l + r))
        }
        Err(e) => Err(e),
    }
}

/// Fails with [`Error::Hypothesis`] when the sampled Hölder ratio exceeds the
/// kernel's constant.
pub fn check_holder(model: &ModelSpec) -> Result<()> {
    let h = model.kernel().holder();
    let ratio = holder_ratio(model.kernel(), model.rho(), h.alpha, h.eta0, 200, 9);
    if ratio > h.constant * (1.0 + 1e-9) {
        return Err(Error::Hypothesis(format!(
            "Hölder check failed: sampled ratio {ratio:.3e} exceeds C = {:.3e} (alpha = {}, eta0 = {})",
            h.constant, h.alpha, h.eta0
        )));
    }
    Ok(())
}

/// Tabulates `F` and its finite-difference derivative on `grid`.
pub fn correction_f(
    model: &ModelSpec,
    grid: &UniformGrid,
    cfg: &PvQuadratureConfig,
) -> Result<CorrectionTable> {
    cfg.validate()?;
    let (lo, hi) = model.support();
    if !grid.covers(lo, hi) {
        return Err(Error::GridCoverage {
            grid_lo: grid.start,
            grid_hi: grid.stop,
            lo,
            hi,
        });
    }
    let eta0 = model.kernel().holder().eta0;
    if cfg.exclusion_eta >= eta0 {
        return Err(Error::InvalidParameter(format!(
            "exclusion_eta {} must be below the Hölder window eta0 = {eta0}",
            cfg.exclusion_eta
        )));
    }
    check_holder(model)?;

    let s: Vec<f64> = grid.to_vec();
    let f_values = s
        .par_iter()
        .map(|&x| correction_value(model, x, cfg))
        .collect::<Result<Vec<f64>>>()?;

    let singular_points = model.kernel().singular_points(model.rho());
    let near = |x: f64| {
        singular_points
            .iter()
            .any(|&p| (x - p).abs() <= cfg.exclusion_eta)
    };
    let flags = s
        .iter()
        .map(|&x| if near(x) { PointFlag::Singular } else { PointFlag::Ok })
        .collect();

    // A side is usable when no singular point lies in the closed interval.
    let blocked = |a: f64, b: f64| singular_points.iter().any(|&p| p >= a && p <= b);
    let n = s.len();
    let df_values = (0..n)
        .map(|i| {
            let left = i > 0 && !blocked(s[i - 1], s[i]);
            let right = i + 1 < n && !blocked(s[i], s[i + 1]);
            match (left, right) {
                (true, true) => (f_values[i + 1] - f_values[i - 1]) / (s[i + 1] - s[i - 1]),
                (false, true) => (f_values[i + 1] - f_values[i]) / (s[i + 1] - s[i]),
                (true, false) => (f_values[i] - f_values[i - 1]) / (s[i] - s[i - 1]),
                (false, false) => f64::NAN,
            }
        })
        .collect();

    Ok(CorrectionTable {
        grid: grid.clone(),
        f_values,
        df_values,
        flags,
        singular_points,
    })
}

/// Models whose correction is known in closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedFormExample {
    UniformBand { width: f64 },
    TriangularPulseGoe,
}

impl ClosedFormExample {
    pub fn from_example(example: Example) -> Option<Self> {
        match example {
            Example::UniformBand { width } => Some(Self::UniformBand { width }),
            Example::TriangularGoe => Some(Self::TriangularPulseGoe),
            Example::Semicircle { .. } => None,
        }
    }
}

fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.abs().ln()
    }
}

pub fn closed_form_f(example: ClosedFormExample, s: f64) -> f64 {
    match example {
        ClosedFormExample::UniformBand { width } => {
            if s > 0.0 && s < 1.0 {
                (width.min(1.0 - s) / width.min(s)).ln()
            } else {
                0.0
            }
        }
        ClosedFormExample::TriangularPulseGoe => {
            if s.abs() <= 1.0 {
                (1.0 - s.abs()) * (xlogx(1.0 - s) - xlogx(1.0 + s) + 2.0 * xlogx(s))
            } else {
                0.0
            }
        }
    }
}

fn check_z(z: Complex64) -> Result<()> {
    if z.im > 0.0 && z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::NotUpperHalfPlane(z))
    }
}

/// Outer integration pieces: support, density breakpoints and the points
/// where `F` is singular.
fn outer_breaks(model: &ModelSpec) -> Vec<f64> {
    let (lo, hi) = model.support();
    breakpoints_within(
        lo,
        hi,
        model
            .rho()
            .breakpoints()
            .into_iter()
            .chain(model.kernel().singular_points(model.rho())),
    )
}

fn inner_breaks(model: &ModelSpec, s: f64) -> Vec<f64> {
    let (lo, hi) = model.support();
    breakpoints_within(
        lo,
        hi,
        model
            .rho()
            .breakpoints()
            .into_iter()
            .chain(model.kernel().jumps_in_t(s)),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaEstimate {
    pub value: Complex64,
    /// Difference to a refined evaluation.
    pub error_estimate: f64,
}

fn lambda_with(model: &ModelSpec, z: Complex64, rule: &GradedGauss) -> Complex64 {
    let rho = model.rho();
    let kernel = model.kernel();
    let (xs, ws) = rule.rule_pieces(&outer_breaks(model));
    xs.par_iter()
        .zip(ws.par_iter())
        .map(|(&s, &w)| {
            let rs = rho.pdf(s);
            if rs == 0.0 {
                return Complex64::default();
            }
            let inner: Complex64 = rule.integrate_pieces(
                |t| Complex64::from(kernel.eval(s, t) * rho.pdf(t)) / (z - t),
                &inner_breaks(model, s),
            );
            inner * (w * rs) / ((z - s) * (z - s))
        })
        .reduce(Complex64::default, |a, b| a + b)
}

/// `Λ(g_z) = ∫∫ {g(t) - g(s) - g'(s)(t-s)} τ(s,t)/(t-s)^2 ρ(s)ρ(t) dt ds`.
pub fn lambda_functional(model: &ModelSpec, z: Complex64) -> Result<LambdaEstimate> {
    check_z(z)?;
    let rule = GradedGauss::default();
    let value = lambda_with(model, z, &rule);
    let fine = lambda_with(model, z, &rule.refined());
    Ok(LambdaEstimate {
        value: fine,
        error_estimate: (fine - value).norm(),
    })
}

/// `Λ_η(g_z) = ∫_{|s-t|>η} g'(s) τ(s,t)/(s-t) ρ(s)ρ(t) ds dt = ∫ g'(s) θ_η(s) ds`.
pub fn lambda_eta(
    model: &ModelSpec,
    z: Complex64,
    eta: f64,
    cfg: &PvQuadratureConfig,
) -> Result<Complex64> {
    check_z(z)?;
    if !(eta > 0.0) {
        return Err(Error::InvalidParameter(format!("eta must be > 0, got {eta}")));
    }
    if eta >= 2.0 * model.spectral_bound() {
        return Ok(Complex64::default());
    }
    let (xs, ws) = GradedGauss::default().rule_pieces(&outer_breaks(model));
    let terms = xs
        .par_iter()
        .zip(ws.par_iter())
        .map(|(&s, &w)| Ok(theta_eta(model, s, eta, cfg)? * w / ((z - s) * (z - s))))
        .collect::<Result<Vec<Complex64>>>()?;
    Ok(terms.into_iter().sum())
}

/// `∫_{|s-t|>η} {g(t) - g(s)} τ(s,t)/(t-s)^2 ρ(s)ρ(t) dt ds`, which vanishes
/// for symmetric `τ` because the integrand is antisymmetric under `s <-> t`.
pub fn lambda_antisymmetric_part(model: &ModelSpec, z: Complex64, eta: f64) -> Result<Complex64> {
    check_z(z)?;
    if !(eta > 0.0) {
        return Err(Error::InvalidParameter(format!("eta must be > 0, got {eta}")));
    }
    let rho = model.rho();
    let kernel = model.kernel();
    // The cancellation is only as good as the rule; the default one leaves
    // ~1e-8 for narrow bands at small Im z.
    let rule = GradedGauss::default().refined();
    let (lo, hi) = model.support();
    // The inner integral kinks where s -/+ eta crosses a breakpoint.
    let mut shifted = outer_breaks(model);
    shifted.extend(model.rho().breakpoints().iter().flat_map(|&b| [b - eta, b + eta]));
    shifted.extend([lo + eta, hi - eta]);
    shifted.extend(kernel.band_window_crossings(lo, hi, eta));
    // ... and where a band edge of tau(s, .) meets a breakpoint of rho.
    let mut targets = model.rho().breakpoints();
    targets.extend([lo, hi]);
    shifted.extend(kernel.band_edge_preimages(lo, hi, &targets));
    let (xs, ws) = rule.rule_pieces(&breakpoints_within(lo, hi, shifted));
    Ok(xs
        .par_iter()
        .zip(ws.par_iter())
        .map(|(&s, &w)| {
            let rs = rho.pdf(s);
            if rs == 0.0 {
                return Complex64::default();
            }
            let breaks = inner_breaks(model, s);
            let integrand = |t: f64| {
                // (g(t) - g(s)) / (t - s)^2 = 1 / ((z - t)(z - s)(t - s))
                Complex64::from(kernel.eval(s, t) * rho.pdf(t)) / ((z - t) * (z - s) * (t - s))
            };
            let mut acc = Complex64::default();
            for (a, b) in [(lo, s - eta), (s + eta, hi)] {
                if b > a {
                    let pieces: Vec<f64> = breakpoints_within(a, b, breaks.iter().copied());
                    acc += rule.integrate_pieces(integrand, &pieces);
                }
            }
            acc * (w * rs)
        })
        .reduce(Complex64::default, |a, b| a + b))
}

/// `F` sampled once on an outer quadrature rule, for evaluating
/// `-∫ g_z'(s) F(s) ds` at many `z`.
#[derive(Debug, Clone)]
pub struct CorrectionQuadrature {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    f_values: Vec<f64>,
}

impl CorrectionQuadrature {
    pub fn new(model: &ModelSpec, cfg: &PvQuadratureConfig) -> Result<Self> {
        cfg.validate()?;
        let (nodes, weights) = GradedGauss::default().rule_pieces(&outer_breaks(model));
        let f_values = nodes
            .par_iter()
            .map(|&s| correction_value(model, s, cfg))
            .collect::<Result<Vec<f64>>>()?;
        Ok(Self {
            nodes,
            weights,
            f_values,
        })
    }

    /// `∫ F(s) ds`.
    pub fn integral(&self) -> f64 {
        self.weights.iter().zip(&self.f_values).map(|(w, f)| w * f).sum()
    }

    /// `-∫ g_z'(s) F(s) ds` with `g_z'(s) = 1/(z - s)^2`.
    pub fn pairing(&self, z: Complex64) -> Result<Complex64> {
        check_z(z)?;
        Ok(-self
            .nodes
            .iter()
            .zip(&self.weights)
            .zip(&self.f_values)
            .map(|((&s, &w), &f)| Complex64::from(w * f) / ((z - s) * (z - s)))
            .sum::<Complex64>())
    }
}

/// `-∫ g_z'(s) F(s) ds` for a single `z`.
pub fn lambda_from_correction(
    model: &ModelSpec,
    z: Complex64,
    cfg: &PvQuadratureConfig,
) -> Result<Complex64> {
    CorrectionQuadrature::new(model, cfg)?.pairing(z)
}
