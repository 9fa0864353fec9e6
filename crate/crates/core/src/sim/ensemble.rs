use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::UniformGrid;
use crate::model::{DiagonalSymbol, Ensemble};
use crate::sim::eigen::{symmetric_eigenvalues, SymmetricMatrix};
use crate::sim::rng::GaussianStream;

/// Where the i-th diagonal entry samples `f`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum DiagonalOffset {
    /// `f(i/n)`, i = 1..n.
    #[default]
    End,
    /// `f((i - 1/2)/n)`.
    Midpoint,
}

/// `a_n(i) = f(i/n)` (or the midpoint variant) for i = 1..n.
pub fn build_diagonal(n: usize, f: &DiagonalSymbol, offset: DiagonalOffset) -> Vec<f64> {
    let shift = match offset {
        DiagonalOffset::End => 0.0,
        DiagonalOffset::Midpoint => 0.5,
    };
    (1..=n).map(|i| f.eval((i as f64 - shift) / n as f64)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSample {
    pub n: usize,
    pub eps: f64,
    pub seed: u64,
    pub replicate_id: u64,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
}

/// Eigenvalues of `D_n + sqrt(eps/n) X_n` with `X_ij ~ N(0, σ²(i/n, j/n))`
/// for `i ≠ j` and `X_ii ~ N(0, 2σ²(i/n, i/n))`.
///
/// Entries are drawn column by column over the lower triangle, always the
/// same number of draws, from the stream `(seed, replicate_id)`.
pub fn sample_perturbed(
    n: usize,
    eps: f64,
    ensemble: &Ensemble,
    seed: u64,
    replicate_id: u64,
) -> Result<EnsembleSample> {
    if n == 0 {
        return Err(Error::InvalidParameter("matrix size must be >= 1".into()));
    }
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!("eps must be finite and >= 0, got {eps}")));
    }
    let diag = build_diagonal(n, &ensemble.f, DiagonalOffset::End);
    let eigenvalues = if eps == 0.0 {
        let mut d = diag;
        d.sort_by(f64::total_cmp);
        d
    } else {
        let scale = (eps / n as f64).sqrt();
        let x: Vec<f64> = (1..=n).map(|i| i as f64 / n as f64).collect();
        let mut g = GaussianStream::new(seed, replicate_id);
        let profile = &ensemble.profile;
        let m = SymmetricMatrix::from_lower_fn(n, |i, j| {
            let z = g.next_normal();
            if i == j {
                diag[i] + scale * (2.0 * profile.eval(x[i], x[i])).sqrt() * z
            } else {
                scale * profile.eval(x[i], x[j]).sqrt() * z
            }
        });
        symmetric_eigenvalues(m)?
    };
    Ok(EnsembleSample {
        n,
        eps,
        seed,
        replicate_id,
        eigenvalues,
    })
}

/// `replicates` independent samples on substreams `0..replicates`, in
/// replicate order. Parallel over replicates; the result does not depend on
/// the thread count.
pub fn run_replicates(
    n: usize,
    eps: f64,
    ensemble: &Ensemble,
    seed: u64,
    replicates: usize,
) -> Result<Vec<EnsembleSample>> {
    (0..replicates as u64)
        .into_par_iter()
        .map(|r| sample_perturbed(n, eps, ensemble, seed, r))
        .collect()
}

/// Right-continuous step function `s -> #{λ ≤ s} / n`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    points: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(mut points: Vec<f64>) -> Self {
        points.sort_by(f64::total_cmp);
        Self { points }
    }

    pub fn from_sample(sample: &EnsembleSample) -> Self {
        Self {
            points: sample.eigenvalues.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn eval(&self, s: f64) -> f64 {
        if self.points.is_empty() {
            return 0.0;
        }
        self.points.partition_point(|&p| p <= s) as f64 / self.points.len() as f64
    }

    /// `sup_s |F_n(s) - cdf(s)|`, exact for continuous `cdf`.
    pub fn kolmogorov_distance(&self, cdf: impl Fn(f64) -> f64) -> f64 {
        let n = self.points.len() as f64;
        self.points
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let c = cdf(p);
                ((i + 1) as f64 / n - c).abs().max((c - i as f64 / n).abs())
            })
            .fold(0.0, f64::max)
    }
}

/// `(F_{D_n^ε}(s) - F_{D_n}(s)) / ε` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftCurve {
    pub s: Vec<f64>,
    pub shift: Vec<f64>,
}

pub fn cdf_shift(
    sample: &EnsembleSample,
    baseline: &EnsembleSample,
    grid: &UniformGrid,
) -> Result<ShiftCurve> {
    if sample.n != baseline.n {
        return Err(Error::Mismatch(format!(
            "sample has n = {}, baseline n = {}",
            sample.n, baseline.n
        )));
    }
    if !(sample.eps > 0.0) {
        return Err(Error::InvalidParameter("the perturbed sample needs eps > 0".into()));
    }
    if baseline.eps != 0.0 {
        return Err(Error::Mismatch(format!(
            "baseline must be unperturbed, got eps = {}",
            baseline.eps
        )));
    }
    let a = EmpiricalCdf::from_sample(sample);
    let b = EmpiricalCdf::from_sample(baseline);
    let s = grid.to_vec();
    let shift = s.iter().map(|&x| (a.eval(x) - b.eval(x)) / sample.eps).collect();
    Ok(ShiftCurve { s, shift })
}

/// Replicate mean of the shift curves with pointwise standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftTable {
    pub s: Vec<f64>,
    pub mean: Vec<f64>,
    /// Sample standard deviation over `sqrt(replicates)`; NaN for a single
    /// replicate.
    pub stderr: Vec<f64>,
    pub replicates: usize,
}

pub fn replicate_average(
    samples: &[EnsembleSample],
    baseline: &EnsembleSample,
    grid: &UniformGrid,
) -> Result<ShiftTable> {
    let first = samples
        .first()
        .ok_or_else(|| Error::InvalidParameter("replicate_average needs at least one sample".into()))?;
    if samples.iter().any(|s| s.n != first.n || s.eps != first.eps) {
        return Err(Error::Mismatch("samples differ in n or eps".into()));
    }
    let curves = samples
        .iter()
        .map(|s| cdf_shift(s, baseline, grid))
        .collect::<Result<Vec<_>>>()?;
    let r = curves.len() as f64;
    let points = grid.points;
    let mut mean = vec![0.0; points];
    for c in &curves {
        mean.iter_mut().zip(&c.shift).for_each(|(m, v)| *m += v / r);
    }
    let stderr = if curves.len() < 2 {
        vec![f64::NAN; points]
    } else {
        (0..points)
            .map(|i| {
                let var = curves.iter().map(|c| (c.shift[i] - mean[i]).powi(2)).sum::<f64>() / (r - 1.0);
                (var / r).sqrt()
            })
            .collect()
    };
    Ok(ShiftTable {
        s: grid.to_vec(),
        mean,
        stderr,
        replicates: curves.len(),
    })
}
