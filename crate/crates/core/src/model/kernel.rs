use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::density::LimitDensity;
use crate::model::profile::{ProfileKind, VarianceProfile};
use crate::model::symbol::{DiagonalSymbol, SymbolKind};

/// Hölder control of `t -> tau(s,t) rho(t)` near `t = s`:
/// `|tau(s,t)rho(t) - tau(s,s)rho(s)| <= constant |t-s|^alpha` for `|t-s| <= eta0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderParams {
    pub alpha: f64,
    pub constant: f64,
    pub eta0: f64,
}

/// Symmetric function `tau` on spectrum x spectrum with
/// `sigma^2(x,y) = tau(f(x), f(y))`.
#[derive(Clone)]
pub struct SpectralKernel {
    tau: KernelFn,
    holder: HolderParams,
}

#[derive(Clone)]
pub enum KernelFn {
    /// `tau(s,t) = sigma^2(chart(s), chart(t))` where `chart` inverts `f`.
    Pullback { profile: VarianceProfile, chart: Chart },
    /// Arbitrary function, used for hand-built models.
    Custom {
        name: String,
        func: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
        bound: f64,
    },
}

/// Map from the spectrum back to [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub enum Chart {
    Identity,
    /// Inverse of a tabulated monotone symbol; constant profiles need none.
    InverseOf(DiagonalSymbol),
    Unused,
}

impl Chart {
    fn apply(&self, s: f64) -> f64 {
        match self {
            Chart::Identity => s.clamp(0.0, 1.0),
            Chart::InverseOf(f) => f.inverse(s).unwrap_or(0.0),
            Chart::Unused => 0.0,
        }
    }

    /// Image of `x in [0,1]` back on the spectrum.
    fn forward(&self, x: f64) -> Option<f64> {
        match self {
            Chart::Identity => Some(x),
            Chart::InverseOf(f) => Some(f.eval(x)),
            Chart::Unused => None,
        }
    }
}

impl fmt::Debug for SpectralKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tau = match &self.tau {
            KernelFn::Pullback { profile, chart } => format!("Pullback({profile:?}, {chart:?})"),
            KernelFn::Custom { name, .. } => format!("Custom({name})"),
        };
        f.debug_struct("SpectralKernel")
            .field("tau", &tau)
            .field("holder", &self.holder)
            .finish()
    }
}

impl SpectralKernel {
    pub fn custom(
        name: impl Into<String>,
        bound: f64,
        func: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        holder: HolderParams,
    ) -> Self {
        Self {
            tau: KernelFn::Custom {
                name: name.into(),
                func: Arc::new(func),
                bound,
            },
            holder,
        }
    }

    pub fn tau(&self) -> &KernelFn {
        &self.tau
    }

    pub fn holder(&self) -> HolderParams {
        self.holder
    }

    pub fn with_holder(mut self, holder: HolderParams) -> Self {
        self.holder = holder;
        self
    }

    pub fn eval(&self, s: f64, t: f64) -> f64 {
        match &self.tau {
            KernelFn::Pullback { profile, chart } => match profile.kind() {
                ProfileKind::Constant(c) => *c,
                _ => profile.eval(chart.apply(s), chart.apply(t)),
            },
            KernelFn::Custom { func, .. } => func(s, t),
        }
    }

    /// `||tau||_inf`.
    pub fn bound(&self) -> f64 {
        match &self.tau {
            KernelFn::Pullback { profile, .. } => profile.bound(),
            KernelFn::Custom { bound, .. } => *bound,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(&self.tau, KernelFn::Pullback { profile, .. } if profile.is_constant())
    }

    /// Points `t` where `t -> tau(s, t)` jumps.
    pub fn jumps_in_t(&self, s: f64) -> Vec<f64> {
        match &self.tau {
            KernelFn::Pullback { profile, chart } => match profile.kind() {
                ProfileKind::BandIndicator { width } => {
                    let x = chart.apply(s);
                    [x - width, x + width]
                        .into_iter()
                        .filter(|y| *y > 0.0 && *y < 1.0)
                        .filter_map(|y| chart.forward(y))
                        .collect()
                }
                _ => Vec::new(),
            },
            KernelFn::Custom { .. } => Vec::new(),
        }
    }

    /// Points `s` in `(lo, hi)` where a band edge of `τ(s,·)` lands on one of
    /// `targets`.
    pub fn band_edge_preimages(&self, lo: f64, hi: f64, targets: &[f64]) -> Vec<f64> {
        let KernelFn::Pullback { profile, chart } = &self.tau else {
            return Vec::new();
        };
        let ProfileKind::BandIndicator { width } = profile.kind() else {
            return Vec::new();
        };
        let mut pts: Vec<f64> = targets
            .iter()
            .flat_map(|&t| {
                let x = chart.apply(t.clamp(lo, hi));
                [x - width, x + width]
            })
            .filter(|y| *y > 0.0 && *y < 1.0)
            .filter_map(|y| chart.forward(y))
            .filter(|s| *s > lo && *s < hi)
            .collect();
        pts.sort_by(f64::total_cmp);
        pts
    }

    /// Points `s` in `[lo, hi]` where a band edge of `τ(s,·)` lies exactly at
    /// `s ± eta`. Integrals over `|t - s| > eta` kink there as functions of `s`.
    pub fn band_window_crossings(&self, lo: f64, hi: f64, eta: f64) -> Vec<f64> {
        let KernelFn::Pullback { profile, chart } = &self.tau else {
            return Vec::new();
        };
        let ProfileKind::BandIndicator { width } = profile.kind() else {
            return Vec::new();
        };
        const SAMPLES: usize = 2048;
        let mut roots = Vec::new();
        for sign in [1.0, -1.0] {
            let g = |s: f64| sign * (chart.apply((s + sign * eta).clamp(lo, hi)) - chart.apply(s)) - width;
            let h = (hi - lo) / SAMPLES as f64;
            let mut prev = (lo, g(lo));
            for k in 1..=SAMPLES {
                let s = lo + k as f64 * h;
                let gs = g(s);
                if (prev.1 < 0.0) != (gs < 0.0) {
                    let (mut a, mut b, ga) = (prev.0, s, prev.1);
                    for _ in 0..60 {
                        let m = 0.5 * (a + b);
                        if (g(m) < 0.0) == (ga < 0.0) {
                            a = m;
                        } else {
                            b = m;
                        }
                    }
                    roots.push(0.5 * (a + b));
                }
                prev = (s, gs);
            }
        }
        roots.sort_by(f64::total_cmp);
        roots
    }

    /// Points `s` where `F` is known to blow up or lose smoothness, given
    /// the jumps of `rho`.
    pub fn singular_points(&self, rho: &LimitDensity) -> Vec<f64> {
        let mut pts = rho.jumps();
        if let KernelFn::Pullback { profile, chart } = &self.tau {
            if let ProfileKind::BandIndicator { width } = profile.kind() {
                // The band edge meets an end of the support or a jump of rho.
                let (lo, hi) = rho.support();
                let mut anchors: Vec<f64> = vec![0.0, 1.0];
                anchors.extend(rho.jumps().into_iter().map(|j| chart.apply(j)));
                for x in anchors {
                    for y in [x - width, x + width] {
                        if y > 0.0 && y < 1.0 {
                            if let Some(s) = chart.forward(y) {
                                if s > lo && s < hi {
                                    pts.push(s);
                                }
                            }
                        }
                    }
                }
            }
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        pts
    }
}

/// Re-expresses a variance profile on the spectrum:
/// `tau(s,t) = sigma^2(f^{-1}(s), f^{-1}(t))`.
///
/// Hölder parameters default to `alpha = 1`, `eta0 = 0.05 * (spectral width)`
/// and a constant estimated by sampling when `f` carries its push-forward
/// density (zero otherwise; override with [`SpectralKernel::with_holder`]).
pub fn kernel_from_profile(
    profile: &VarianceProfile,
    f: &DiagonalSymbol,
    resolution: usize,
) -> Result<SpectralKernel> {
    if resolution < 2 {
        return Err(Error::InvalidParameter(format!(
            "resolution must be >= 2, got {resolution}"
        )));
    }
    let defect = profile.symmetry_defect();
    if defect > SYMMETRY_TOLERANCE {
        return Err(Error::AsymmetricProfile(defect));
    }
    if !f.is_monotone() {
        return Err(Error::NonMonotoneSymbol(
            "tau is only defined through a monotone f".into(),
        ));
    }
    let chart = if profile.is_constant() {
        Chart::Unused
    } else {
        match f.kind() {
            SymbolKind::Identity => Chart::Identity,
            _ if f.is_invertible() => Chart::InverseOf(f.clone()),
            _ => {
                return Err(Error::NonMonotoneSymbol(
                    "f must be strictly increasing to pull back a non-constant profile".into(),
                ))
            }
        }
    };
    let kernel = SpectralKernel {
        tau: KernelFn::Pullback {
            profile: profile.clone(),
            chart,
        },
        holder: HolderParams {
            alpha: 1.0,
            constant: 0.0,
            eta0: 0.05 * spectral_width(f),
        },
    };

    let residual = consistency_residual(profile, f, &kernel, resolution.min(100));
    if residual > 10.0 / resolution as f64 {
        return Err(Error::InconsistentKernel(residual));
    }

    match f.push_forward() {
        Some(rho) => {
            let holder = kernel.holder;
            let constant = estimate_holder_constant(&kernel, rho, holder.alpha, holder.eta0);
            Ok(kernel.with_holder(HolderParams { constant, ..holder }))
        }
        None => Ok(kernel),
    }
}

pub(crate) const SYMMETRY_TOLERANCE: f64 = 1e-9;

fn spectral_width(f: &DiagonalSymbol) -> f64 {
    let w = f.eval(1.0) - f.eval(0.0);
    if w > 0.0 {
        w
    } else {
        1.0
    }
}

/// `max |sigma^2(x,y) - tau(f(x), f(y))|` over a `points x points` sample grid.
pub fn consistency_residual(
    profile: &VarianceProfile,
    f: &DiagonalSymbol,
    kernel: &SpectralKernel,
    points: usize,
) -> f64 {
    let xs: Vec<f64> = (0..points).map(|i| (i as f64 + 0.5) / points as f64).collect();
    // Irrational shift: no sample pair lies exactly on a band edge, where the
    // indicator is ambiguous up to rounding in f^{-1}(f(x)).
    let ys: Vec<f64> = (0..points).map(|j| (j as f64 + 0.381_966) / points as f64).collect();
    let fx: Vec<f64> = xs.iter().map(|&x| f.eval(x)).collect();
    let fy: Vec<f64> = ys.iter().map(|&y| f.eval(y)).collect();
    let mut worst = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        for (j, &y) in ys.iter().enumerate() {
            worst = worst.max((profile.eval(x, y) - kernel.eval(fx[i], fy[j])).abs());
        }
    }
    worst
}

/// Largest sampled ratio `|u_s(t) - u_s(s)| / |t-s|^alpha` with
/// `u_s = tau(s,.) rho(.)`, over pairs not separated by a declared jump.
pub(crate) fn holder_ratio(
    kernel: &SpectralKernel,
    rho: &LimitDensity,
    alpha: f64,
    eta0: f64,
    s_samples: usize,
    offsets: usize,
) -> f64 {
    let (lo, hi) = rho.support();
    let rho_jumps = rho.jumps();
    let mut worst = 0.0f64;
    for k in 0..s_samples {
        let s = lo + (hi - lo) * (k as f64 + 0.5) / s_samples as f64;
        let mut jumps = rho_jumps.clone();
        jumps.extend(kernel.jumps_in_t(s));
        if jumps.iter().any(|&j| j == s) {
            continue;
        }
        let us = kernel.eval(s, s) * rho.pdf(s);
        for m in 0..offsets {
            // Offsets from eta0 * 1e-4 up to eta0, log-spaced.
            let delta = eta0 * 10f64.powf(-4.0 * (1.0 - m as f64 / (offsets - 1).max(1) as f64));
            for t in [s - delta, s + delta] {
                let (a, b) = if t < s { (t, s) } else { (s, t) };
                if jumps.iter().any(|&j| j >= a && j <= b) {
                    continue;
                }
                let ut = kernel.eval(s, t) * rho.pdf(t);
                worst = worst.max((ut - us).abs() / delta.powf(alpha));
            }
        }
    }
    worst
}

/// Sampled Hölder constant with a safety factor of 2.
pub fn estimate_holder_constant(
    kernel: &SpectralKernel,
    rho: &LimitDensity,
    alpha: f64,
    eta0: f64,
) -> f64 {
    2.0 * holder_ratio(kernel, rho, alpha, eta0, 250, 9) + 1e-12
}
