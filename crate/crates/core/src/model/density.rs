use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::LinearTable;

/// Limiting spectral density of the unperturbed diagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum LimitDensity {
    /// Lebesgue measure on (0, 1).
    UniformOn01,
    /// `(1 - |s|)` on [-1, 1].
    TriangularPulse,
    /// Semicircle law with the given variance.
    Semicircle { variance: f64 },
    Tabulated(TabulatedDensity),
}

/// Piecewise-linear density on a uniform grid, normalized to unit mass.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedDensity {
    table: LinearTable,
    /// CDF at the table nodes.
    cumulative: Vec<f64>,
}

/// Tolerance on the raw mass of a tabulated density before normalization.
pub const MASS_TOLERANCE: f64 = 1e-2;

impl TabulatedDensity {
    pub fn new(lo: f64, hi: f64, values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidDensity("NaN value".into()));
        }
        if let Some(v) = values.iter().find(|v| **v < 0.0) {
            return Err(Error::InvalidDensity(format!("negative value {v}")));
        }
        let table = LinearTable::new(lo, hi, values)
            .map_err(|e| Error::InvalidDensity(e.to_string()))?;
        let h = (hi - lo) / table.intervals() as f64;
        let mut cumulative = Vec::with_capacity(table.values().len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for w in table.values().windows(2) {
            acc += 0.5 * h * (w[0] + w[1]);
            cumulative.push(acc);
        }
        if acc <= 0.0 {
            return Err(Error::InvalidDensity("zero total mass".into()));
        }
        if (acc - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidDensity(format!(
                "total mass {acc} differs from 1 by more than {MASS_TOLERANCE}"
            )));
        }
        let values = table.values().iter().map(|v| v / acc).collect();
        let table = LinearTable::new(lo, hi, values)?;
        cumulative.iter_mut().for_each(|c| *c /= acc);
        Ok(Self { table, cumulative })
    }

    pub fn table(&self) -> &LinearTable {
        &self.table
    }

    fn pdf(&self, s: f64) -> f64 {
        let (lo, hi) = self.table.bounds();
        if s < lo || s > hi {
            0.0
        } else {
            self.table.eval(s)
        }
    }

    fn cdf(&self, s: f64) -> f64 {
        let (lo, hi) = self.table.bounds();
        if s <= lo {
            return 0.0;
        }
        if s >= hi {
            return 1.0;
        }
        let n = self.table.intervals();
        let h = (hi - lo) / n as f64;
        let k = (((s - lo) / h).floor() as usize).min(n - 1);
        let x0 = self.table.node(k);
        let d = s - x0;
        let v = self.table.values();
        let slope = (v[k + 1] - v[k]) / h;
        (self.cumulative[k] + v[k] * d + 0.5 * slope * d * d).min(1.0)
    }
}

impl LimitDensity {
    pub fn semicircle(variance: f64) -> Result<Self> {
        if !(variance > 0.0 && variance.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "semicircle variance must be positive, got {variance}"
            )));
        }
        Ok(Self::Semicircle { variance })
    }

    pub fn pdf(&self, s: f64) -> f64 {
        match self {
            Self::UniformOn01 => {
                if s > 0.0 && s < 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Self::TriangularPulse => (1.0 - s.abs()).max(0.0),
            Self::Semicircle { variance } => semicircle_pdf(*variance, s),
            Self::Tabulated(t) => t.pdf(s),
        }
    }

    pub fn cdf(&self, s: f64) -> f64 {
        match self {
            Self::UniformOn01 => s.clamp(0.0, 1.0),
            Self::TriangularPulse => {
                if s <= -1.0 {
                    0.0
                } else if s <= 0.0 {
                    0.5 * (1.0 + s) * (1.0 + s)
                } else if s < 1.0 {
                    1.0 - 0.5 * (1.0 - s) * (1.0 - s)
                } else {
                    1.0
                }
            }
            Self::Semicircle { variance } => {
                let r = 2.0 * variance.sqrt();
                if s <= -r {
                    0.0
                } else if s >= r {
                    1.0
                } else {
                    0.5 + s * (r * r - s * s).sqrt() / (4.0 * PI * variance)
                        + (s / r).asin() / PI
                }
            }
            Self::Tabulated(t) => t.cdf(s),
        }
    }

    /// Closed interval containing the support.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Self::UniformOn01 => (0.0, 1.0),
            Self::TriangularPulse => (-1.0, 1.0),
            Self::Semicircle { variance } => {
                let r = 2.0 * variance.sqrt();
                (-r, r)
            }
            Self::Tabulated(t) => t.table.bounds(),
        }
    }

    pub fn support_width(&self) -> f64 {
        let (lo, hi) = self.support();
        hi - lo
    }

    /// `M`: bound on the spectrum, `max(|lo|, |hi|)`.
    pub fn spectral_bound(&self) -> f64 {
        let (lo, hi) = self.support();
        lo.abs().max(hi.abs())
    }

    /// Points where the density is discontinuous.
    pub fn jumps(&self) -> Vec<f64> {
        match self {
            Self::UniformOn01 => vec![0.0, 1.0],
            Self::TriangularPulse | Self::Semicircle { .. } => Vec::new(),
            Self::Tabulated(t) => {
                let (lo, hi) = t.table.bounds();
                let v = t.table.values();
                let mut j = Vec::new();
                if v[0] != 0.0 {
                    j.push(lo);
                }
                if v[v.len() - 1] != 0.0 {
                    j.push(hi);
                }
                j
            }
        }
    }

    /// Jumps plus points where the density is continuous but not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Self::UniformOn01 => vec![0.0, 1.0],
            Self::TriangularPulse => vec![-1.0, 0.0, 1.0],
            Self::Semicircle { .. } => {
                let (lo, hi) = self.support();
                vec![lo, hi]
            }
            Self::Tabulated(t) => {
                let n = t.table.intervals();
                (0..=n).map(|k| t.table.node(k)).collect()
            }
        }
    }

    pub fn sup(&self) -> f64 {
        match self {
            Self::UniformOn01 | Self::TriangularPulse => 1.0,
            Self::Semicircle { variance } => 1.0 / (PI * variance.sqrt()),
            Self::Tabulated(t) => t.table.max_abs(),
        }
    }

    /// Whether `pdf(-s) == pdf(s)` holds by construction.
    pub fn is_even(&self) -> bool {
        matches!(self, Self::TriangularPulse | Self::Semicircle { .. })
    }

    /// Generalized inverse CDF by bisection.
    pub fn quantile(&self, p: f64) -> f64 {
        let (mut lo, mut hi) = self.support();
        if p <= 0.0 {
            return lo;
        }
        if p >= 1.0 {
            return hi;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid) >= p {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }
}

/// `sqrt(4v - s^2) / (2 pi v)` on `[-2 sqrt(v), 2 sqrt(v)]`, zero outside.
pub fn semicircle_pdf(variance: f64, s: f64) -> f64 {
    let r2 = 4.0 * variance - s * s;
    if r2 <= 0.0 {
        0.0
    } else {
        r2.sqrt() / (2.0 * PI * variance)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::GradedGauss;

    fn mass(d: &LimitDensity) -> f64 {
        let q = GradedGauss::default();
        let mut b = d.breakpoints();
        b.sort_by(f64::total_cmp);
        q.integrate_pieces(|s| d.pdf(s), &b)
    }

    #[test]
    fn reference_densities_have_unit_mass() {
        for d in [
            LimitDensity::UniformOn01,
            LimitDensity::TriangularPulse,
            LimitDensity::semicircle(0.7).unwrap(),
        ] {
            assert!((mass(&d) - 1.0).abs() < 1e-10, "{d:?}");
        }
    }

    #[test]
    fn cdf_matches_integrated_pdf() {
        let q = GradedGauss::default();
        for d in [LimitDensity::TriangularPulse, LimitDensity::semicircle(1.3).unwrap()] {
            let (lo, hi) = d.support();
            for k in 1..10 {
                let s = lo + (hi - lo) * k as f64 / 10.0;
                let mut b: Vec<f64> = d.breakpoints().into_iter().filter(|&x| x < s).collect();
                b.push(s);
                let integral: f64 = q.integrate_pieces(|t| d.pdf(t), &b);
                assert!((integral - d.cdf(s)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn triangular_quantile_at_one_eighth() {
        // CDF(-0.5) = 0.5 * 0.5^2 = 0.125
        let q = LimitDensity::TriangularPulse.quantile(0.125);
        assert!((q + 0.5).abs() < 1e-14);
    }

    #[test]
    fn tabulated_density_is_normalized_and_exact_on_linear_pieces() {
        let d = TabulatedDensity::new(-1.0, 1.0, vec![0.0, 1.0, 0.0]).unwrap();
        let d = LimitDensity::Tabulated(d);
        assert!((d.cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((d.cdf(-0.5) - 0.125).abs() < 1e-15);
        assert!(d.jumps().is_empty());
    }

    #[test]
    fn tabulated_density_rejects_bad_input() {
        assert!(TabulatedDensity::new(0.0, 1.0, vec![0.0, 0.0]).is_err());
        assert!(TabulatedDensity::new(0.0, 1.0, vec![1.0, f64::NAN]).is_err());
        assert!(TabulatedDensity::new(0.0, 1.0, vec![1.0, -1.0, 1.0]).is_err());
        assert!(TabulatedDensity::new(0.0, 1.0, vec![3.0, 3.0]).is_err());
    }
}
