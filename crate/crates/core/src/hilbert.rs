//! Principal-value Hilbert transform `H[u](s) = p.v. ∫ u(t) / (s - t) dt`.
//!
//! With singularity subtraction the integral is taken over an interval
//! `D ⊇ supp u` that contains `s` strictly inside:
//!
//! ```text
//! H[u](s) = ∫_D (u(t) - u(s)) / (s - t) dt + u(s) log((s - D.lo) / (D.hi - s))
//! ```
//!
//! The remaining integrand is bounded for Lipschitz `u` and integrable for
//! Hölder `u`. Every smooth piece of the integrand (split at the declared
//! breakpoints of `u`, at `s` and at `s ± exclusion_eta`) is integrated with
//! 16-point Gauss-Legendre panels, `nodes` points per unit length in the
//! interior and geometrically graded panels toward both ends, so jumps of `u`
//! close to `s` stay resolved.

use crate::error::{Error, Result};
use crate::model::{LimitDensity, ModelSpec};
use crate::quadrature::GradedGauss;

const GRADING_LEVELS: usize = 17;
const GRADING_RATIO: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PvQuadratureConfig {
    /// Half-width of the window around `s` treated by subtraction.
    pub exclusion_eta: f64,
    /// Quadrature points per unit length.
    pub nodes: usize,
    pub use_singularity_subtraction: bool,
}

impl Default for PvQuadratureConfig {
    fn default() -> Self {
        Self::for_width(1.0)
    }
}

impl PvQuadratureConfig {
    /// Defaults for a support of the given width.
    pub fn for_width(width: f64) -> Self {
        Self {
            exclusion_eta: 1e-3 * width,
            nodes: 8192,
            use_singularity_subtraction: true,
        }
    }

    pub fn for_model(model: &ModelSpec) -> Self {
        Self::for_width(model.rho().support_width())
    }

    /// Twice the nodes, half the window.
    pub fn refined(&self) -> Self {
        Self {
            exclusion_eta: 0.5 * self.exclusion_eta,
            nodes: 2 * self.nodes,
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.exclusion_eta > 0.0 && self.exclusion_eta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "exclusion_eta must be finite and > 0, got {}",
                self.exclusion_eta
            )));
        }
        if self.nodes == 0 {
            return Err(Error::InvalidParameter("nodes must be >= 1".into()));
        }
        Ok(())
    }

    fn rule_for(&self, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
        // At least 8 interior panels so the innermost ones are no wider than
        // their distance to a singular end.
        let panels = ((b - a) * self.nodes as f64 / 16.0).ceil().max(8.0) as usize;
        // Stop grading well above the rounding level of the endpoints, so no
        // node collapses onto the singular point.
        let half = 0.5 * (b - a);
        let floor = 1e-13 * a.abs().max(b.abs()).max(half);
        let levels = ((half / floor).ln() / GRADING_RATIO.recip().ln())
            .floor()
            .clamp(1.0, GRADING_LEVELS as f64) as usize;
        GradedGauss {
            levels,
            ratio: GRADING_RATIO,
            interior_panels: panels,
        }
        .rule(a, b)
    }
}

/// A function with compact support `[lo, hi]`, smooth between `breaks`.
/// `jumps` lists the breakpoints where it is discontinuous.
#[derive(Debug, Clone)]
pub struct SupportedFn<F> {
    func: F,
    lo: f64,
    hi: f64,
    breaks: Vec<f64>,
    jumps: Vec<f64>,
}

impl<F: Fn(f64) -> f64> SupportedFn<F> {
    pub fn new(func: F, lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi && lo.is_finite() && hi.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "support must be a finite interval, got [{lo}, {hi}]"
            )));
        }
        Ok(Self {
            func,
            lo,
            hi,
            breaks: Vec::new(),
            jumps: Vec::new(),
        })
    }

    pub fn with_breaks(mut self, breaks: impl IntoIterator<Item = f64>) -> Self {
        self.breaks.extend(breaks);
        self
    }

    pub fn with_jumps(mut self, jumps: impl IntoIterator<Item = f64>) -> Self {
        let jumps: Vec<f64> = jumps.into_iter().collect();
        self.breaks.extend(&jumps);
        self.jumps.extend(jumps);
        self
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn jumps(&self) -> &[f64] {
        &self.jumps
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t < self.lo || t > self.hi {
            0.0
        } else {
            (self.func)(t)
        }
    }
}

/// `rho` as a [`SupportedFn`].
pub fn density_fn(rho: &LimitDensity) -> SupportedFn<impl Fn(f64) -> f64 + '_> {
    let (lo, hi) = rho.support();
    SupportedFn {
        func: move |t| rho.pdf(t),
        lo,
        hi,
        breaks: rho.breakpoints(),
        jumps: rho.jumps(),
    }
}

fn on_jump(s: f64, jumps: &[f64]) -> bool {
    jumps.iter().any(|&j| (s - j).abs() <= 4.0 * f64::EPSILON * (1.0 + j.abs()))
}

/// Sorted cut points of `[a, b]`, keeping only interior extras.
fn cuts(a: f64, b: f64, extra: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut pts: Vec<f64> = [a, b]
        .into_iter()
        .chain(extra.into_iter().filter(|&x| x > a && x < b))
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// `∫ g` over the pieces delimited by `cuts`, failing on non-finite values.
fn integrate_checked(
    cfg: &PvQuadratureConfig,
    cuts: &[f64],
    mut g: impl FnMut(f64) -> (f64, f64),
) -> Result<f64> {
    let mut total = 0.0;
    for w in cuts.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let (xs, ws) = cfg.rule_for(w[0], w[1]);
        let mut piece = 0.0;
        for (&t, &wt) in xs.iter().zip(&ws) {
            let (u, v) = g(t);
            if !u.is_finite() {
                return Err(Error::NonFinite(t));
            }
            piece += wt * v;
        }
        total += piece;
    }
    Ok(total)
}

/// Principal value `p.v. ∫ u(t) / (s - t) dt`.
///
/// Without subtraction this is the truncated integral over
/// `|t - s| > exclusion_eta`, which is only a first-order approximation.
pub fn hilbert_pv<F: Fn(f64) -> f64>(
    u: &SupportedFn<F>,
    s: f64,
    cfg: &PvQuadratureConfig,
) -> Result<f64> {
    cfg.validate()?;
    if !s.is_finite() {
        return Err(Error::NonFinite(s));
    }
    let eta = cfg.exclusion_eta;
    let extra = u.breaks.iter().copied().chain([s - eta, s, s + eta]);

    if !cfg.use_singularity_subtraction {
        let pts = cuts(u.lo.min(s - eta), u.hi.max(s + eta), extra);
        return integrate_checked(cfg, &pts, |t| {
            if (t - s).abs() <= eta {
                (0.0, 0.0)
            } else {
                let v = u.eval(t);
                (v, v / (s - t))
            }
        });
    }

    if on_jump(s, &u.jumps) {
        return Err(Error::AtJump(s));
    }
    let us = u.eval(s);
    if !us.is_finite() {
        return Err(Error::NonFinite(s));
    }
    let (a, b) = (u.lo.min(s - eta), u.hi.max(s + eta));
    let pts = cuts(a, b, extra);
    let body = integrate_checked(cfg, &pts, |t| {
        let v = u.eval(t);
        (v, (v - us) / (s - t))
    })?;
    Ok(body + us * ((s - a) / (b - s)).ln())
}

/// Truncated transform
/// `θ_η(s) = ∫_{η < |t-s| < 2M} (τ(s,t)ρ(t) - τ(s,s)ρ(s)) ρ(s) / (s - t) dt`,
/// which equals `∫_{|t-s|>η} τ(s,t)ρ(s)ρ(t)/(s-t) dt` for `s` in `[-M, M]`.
pub fn theta_eta(model: &ModelSpec, s: f64, eta: f64, cfg: &PvQuadratureConfig) -> Result<f64> {
    if !(eta > 0.0) {
        return Err(Error::InvalidParameter(format!("eta must be > 0, got {eta}")));
    }
    cfg.validate()?;
    let rho = model.rho();
    let kernel = model.kernel();
    let m = model.spectral_bound();
    let rs = rho.pdf(s);
    if eta >= 2.0 * m || rs == 0.0 {
        return Ok(0.0);
    }
    let us = kernel.eval(s, s) * rs;
    let (lo, hi) = rho.support();
    let extra: Vec<f64> = rho
        .breakpoints()
        .into_iter()
        .chain(kernel.jumps_in_t(s))
        .chain([lo, hi])
        .collect();
    let integrand = |t: f64| {
        let v = kernel.eval(s, t) * rho.pdf(t);
        (v, (v - us) / (s - t))
    };
    let left = integrate_checked(cfg, &cuts(s - 2.0 * m, s - eta, extra.iter().copied()), integrand)?;
    let right = integrate_checked(cfg, &cuts(s + eta, s + 2.0 * m, extra.iter().copied()), integrand)?;
    Ok(rs * (left + right))
}

/// Upper bound `(2Cρ(s)/α) η₀^α + ‖τ‖_∞ ρ(s) / η₀` on `|θ_η(s)|`, valid for
/// `η < η₀` wherever the Hölder condition holds around `s`.
pub fn theta_bound(model: &ModelSpec, s: f64) -> f64 {
    let h = model.kernel().holder();
    let rs = model.rho().pdf(s);
    2.0 * h.constant * rs / h.alpha * h.eta0.powf(h.alpha) + model.kernel().bound() * rs / h.eta0
}

/// Densities whose Hilbert transform is known in closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReferenceDensity {
    UniformOn01,
    Semicircle { variance: f64 },
    TriangularPulse,
}

impl ReferenceDensity {
    pub fn from_density(rho: &LimitDensity) -> Option<Self> {
        match rho {
            LimitDensity::UniformOn01 => Some(Self::UniformOn01),
            LimitDensity::TriangularPulse => Some(Self::TriangularPulse),
            LimitDensity::Semicircle { variance } => Some(Self::Semicircle {
                variance: *variance,
            }),
            LimitDensity::Tabulated(_) => None,
        }
    }
}

/// `x log|x|`, continuous at 0.
fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.abs().ln()
    }
}

/// Analytic Hilbert transform. Infinite at the jumps of the uniform density.
pub fn hilbert_closed_form(kind: ReferenceDensity, s: f64) -> f64 {
    match kind {
        ReferenceDensity::UniformOn01 => (s.abs() / (s - 1.0).abs()).ln(),
        ReferenceDensity::Semicircle { variance: t } => {
            let r2 = 4.0 * t;
            if s * s <= r2 {
                s / (2.0 * t)
            } else {
                (s - s.signum() * (s * s - r2).sqrt()) / (2.0 * t)
            }
        }
        ReferenceDensity::TriangularPulse => {
            -(xlogx(1.0 - s) - xlogx(1.0 + s) + 2.0 * xlogx(s))
        }
    }
}
