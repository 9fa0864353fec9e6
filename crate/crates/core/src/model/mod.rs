//! Problem definition: the diagonal symbol `f`, the variance profile
//! `sigma^2`, the spectral kernel `tau` and the limit density `rho`.

pub mod config;
pub mod density;
pub mod kernel;
pub mod profile;
pub mod symbol;
pub mod validate;

pub use config::ModelConfig;
pub use density::{semicircle_pdf, LimitDensity, TabulatedDensity};
pub use kernel::{kernel_from_profile, HolderParams, SpectralKernel};
pub use profile::{ProfileKind, VarianceProfile};
pub use symbol::{quantile_from_density, DiagonalSymbol, SymbolKind, DEFAULT_RESOLUTION};
pub use validate::{validate_hypotheses, HypothesisCheck, ValidationReport};

use crate::error::{Error, Result};
use config::{DensityConfig, ProfileConfig};

/// A fully specified perturbation problem.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    f: DiagonalSymbol,
    profile: VarianceProfile,
    kernel: SpectralKernel,
    rho: LimitDensity,
    resolution: usize,
    config: Option<ModelConfig>,
}

/// Optional overrides for the Hölder parameters of the kernel.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KernelOptions {
    pub alpha: Option<f64>,
    pub eta0: Option<f64>,
    pub constant: Option<f64>,
}

/// The diagonal matrix and Gaussian profile, without the spectral side.
/// Enough to run the fixed-point solver or sample matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub f: DiagonalSymbol,
    pub profile: VarianceProfile,
}

impl Ensemble {
    pub fn new(f: DiagonalSymbol, profile: VarianceProfile) -> Self {
        Self { f, profile }
    }
}

impl ModelSpec {
    /// Canonical construction: `f` is the quantile function of `rho` and
    /// `tau` is the profile pulled back through `f`.
    pub fn new(
        rho: LimitDensity,
        profile: VarianceProfile,
        options: KernelOptions,
        resolution: usize,
    ) -> Result<Self> {
        let f = quantile_from_density(&rho, resolution)?;
        let mut kernel = kernel_from_profile(&profile, &f, resolution)?;
        let mut holder = kernel.holder();
        if let Some(alpha) = options.alpha {
            if !(alpha > 0.0) {
                return Err(Error::InvalidParameter(format!("alpha must be > 0, got {alpha}")));
            }
            holder.alpha = alpha;
        }
        if let Some(eta0) = options.eta0 {
            if !(eta0 > 0.0) {
                return Err(Error::InvalidParameter(format!("eta0 must be > 0, got {eta0}")));
            }
            holder.eta0 = eta0;
        }
        holder.constant = match options.constant {
            Some(c) => c,
            None => kernel::estimate_holder_constant(&kernel, &rho, holder.alpha, holder.eta0),
        };
        kernel = kernel.with_holder(holder);
        Ok(Self {
            f,
            profile,
            kernel,
            rho,
            resolution,
            config: None,
        })
    }

    /// Assembles a model from independently built parts, without checks.
    /// Use [`validate_hypotheses`] to inspect it.
    pub fn from_parts(
        f: DiagonalSymbol,
        profile: VarianceProfile,
        kernel: SpectralKernel,
        rho: LimitDensity,
        resolution: usize,
    ) -> Self {
        Self {
            f,
            profile,
            kernel,
            rho,
            resolution,
            config: None,
        }
    }

    pub fn from_config(cfg: &ModelConfig) -> Result<Self> {
        let rho = match &cfg.density {
            DensityConfig::Uniform => LimitDensity::UniformOn01,
            DensityConfig::Triangular => LimitDensity::TriangularPulse,
            DensityConfig::Semicircle(p) => LimitDensity::semicircle(p.variance)?,
            DensityConfig::Tabulated(p) => {
                LimitDensity::Tabulated(TabulatedDensity::new(p.lo, p.hi, p.values.clone())?)
            }
        };
        let profile = match &cfg.profile {
            ProfileConfig::Constant(p) => VarianceProfile::constant(p.value)?,
            ProfileConfig::Band(p) => VarianceProfile::band(p.width)?,
            ProfileConfig::Tabulated(p) => VarianceProfile::tabulated(p.size, p.values.clone())?,
        };
        let options = KernelOptions {
            alpha: cfg.kernel.alpha,
            eta0: cfg.kernel.eta0,
            constant: cfg.kernel.constant,
        };
        let mut model = Self::new(rho, profile, options, cfg.resolution)?;
        model.config = Some(cfg.clone());
        Ok(model)
    }

    pub fn example(example: Example) -> Result<Self> {
        Self::from_config(&example.config())
    }

    pub fn f(&self) -> &DiagonalSymbol {
        &self.f
    }

    pub fn profile(&self) -> &VarianceProfile {
        &self.profile
    }

    pub fn kernel(&self) -> &SpectralKernel {
        &self.kernel
    }

    pub fn rho(&self) -> &LimitDensity {
        &self.rho
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn config(&self) -> Option<&ModelConfig> {
        self.config.as_ref()
    }

    pub fn support(&self) -> (f64, f64) {
        self.rho.support()
    }

    /// `M = ||f||_inf`, which bounds the support of `rho`.
    pub fn spectral_bound(&self) -> f64 {
        self.f.bound().max(self.rho.spectral_bound())
    }

    pub fn ensemble(&self) -> Ensemble {
        Ensemble::new(self.f.clone(), self.profile.clone())
    }
}

/// Built-in models with closed-form corrections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Example {
    /// Uniform density on (0,1) with a band profile of the given width.
    UniformBand { width: f64 },
    /// Triangular pulse density with a constant profile (GOE perturbation).
    TriangularGoe,
    /// Semicircle of the given variance with a constant profile.
    Semicircle { variance: f64 },
}

impl Example {
    pub fn config(&self) -> ModelConfig {
        use config::*;
        match *self {
            Example::UniformBand { width } => ModelConfig {
                density: DensityConfig::Uniform,
                profile: ProfileConfig::Band(BandParams { width }),
                kernel: KernelConfig::default(),
                resolution: DEFAULT_RESOLUTION,
            },
            Example::TriangularGoe => ModelConfig {
                density: DensityConfig::Triangular,
                profile: ProfileConfig::Constant(ConstantParams { value: 1.0 }),
                kernel: KernelConfig::default(),
                resolution: DEFAULT_RESOLUTION,
            },
            Example::Semicircle { variance } => ModelConfig {
                density: DensityConfig::Semicircle(SemicircleParams { variance }),
                profile: ProfileConfig::Constant(ConstantParams { value: 1.0 }),
                // Square-root edges are Hölder-1/2, not Lipschitz.
                kernel: KernelConfig {
                    alpha: Some(0.5),
                    ..KernelConfig::default()
                },
                resolution: DEFAULT_RESOLUTION,
            },
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Example::UniformBand { .. } => "uniform-band",
            Example::TriangularGoe => "triangular-goe",
            Example::Semicircle { .. } => "semicircle",
        }
    }
}
