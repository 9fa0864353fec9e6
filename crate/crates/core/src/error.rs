use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid density: {0}")]
    InvalidDensity(String),
    #[error("diagonal symbol is not monotone: {0}")]
    NonMonotoneSymbol(String),
    #[error("variance profile is not symmetric: max |σ²(x,y) - σ²(y,x)| = {0:.3e}")]
    AsymmetricProfile(f64),
    #[error("kernel does not reproduce the profile: max residual {0:.3e}")]
    InconsistentKernel(f64),
    #[error("non-finite function value at t = {0}")]
    NonFinite(f64),
    #[error("evaluation point s = {0} lies on a declared jump of the integrand")]
    AtJump(f64),
    #[error("hypothesis check failed: {0}")]
    Hypothesis(String),
    #[error("grid [{grid_lo}, {grid_hi}] does not cover the support [{lo}, {hi}]")]
    GridCoverage {
        grid_lo: f64,
        grid_hi: f64,
        lo: f64,
        hi: f64,
    },
    #[error("z = {0} is not in the upper half-plane")]
    NotUpperHalfPlane(Complex64),
    #[error(
        "fixed-point iteration did not converge at z = {z}: residual {residual:.3e} after {iterations} iterations"
    )]
    NoConvergence {
        z: Complex64,
        residual: f64,
        iterations: usize,
    },
    #[error("eigensolver did not converge (eigenvalue {index}, {sweeps} sweeps)")]
    EigenNoConvergence { index: usize, sweeps: usize },
    #[error("incompatible inputs: {0}")]
    Mismatch(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
