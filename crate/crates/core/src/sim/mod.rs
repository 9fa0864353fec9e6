//! Finite-n simulation of `D_n + sqrt(ε/n) X_n`.

pub mod eigen;
pub mod ensemble;
pub mod rng;

pub use ensemble::{
    build_diagonal, cdf_shift, replicate_average, run_replicates, sample_perturbed, DiagonalOffset,
    EmpiricalCdf, EnsembleSample, ShiftCurve, ShiftTable,
};
