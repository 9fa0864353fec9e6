use crate::error::{Error, Result};

/// Limiting variance profile `sigma^2(x, y)` on [0, 1]^2.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceProfile {
    kind: ProfileKind,
    bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileKind {
    Constant(f64),
    /// Indicator of `|x - y| <= width`.
    BandIndicator { width: f64 },
    /// Row-major `size x size` samples on the uniform grid of [0,1]^2,
    /// bilinear in between.
    Tabulated { size: usize, values: Vec<f64> },
}

impl VarianceProfile {
    pub fn constant(c: f64) -> Result<Self> {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "constant variance must be finite and >= 0, got {c}"
            )));
        }
        Ok(Self {
            kind: ProfileKind::Constant(c),
            bound: c,
        })
    }

    pub fn band(width: f64) -> Result<Self> {
        if !(width > 0.0 && width <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "band width must lie in (0, 1], got {width}"
            )));
        }
        Ok(Self {
            kind: ProfileKind::BandIndicator { width },
            bound: 1.0,
        })
    }

    /// Tabulated profile. Symmetry is not enforced here; see
    /// [`VarianceProfile::symmetry_defect`].
    pub fn tabulated(size: usize, values: Vec<f64>) -> Result<Self> {
        if size < 2 || values.len() != size * size {
            return Err(Error::InvalidParameter(format!(
                "tabulated profile needs size >= 2 and size^2 values, got size {size} with {} values",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "profile values must be finite and >= 0, found {v}"
            )));
        }
        let bound = values.iter().cloned().fold(0.0, f64::max);
        Ok(Self {
            kind: ProfileKind::Tabulated { size, values },
            bound,
        })
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    /// `||sigma^2||_inf`.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match &self.kind {
            ProfileKind::Constant(c) => *c,
            ProfileKind::BandIndicator { width } => {
                if (x - y).abs() <= *width {
                    1.0
                } else {
                    0.0
                }
            }
            ProfileKind::Tabulated { size, values } => {
                let m = (*size - 1) as f64;
                let u = x.clamp(0.0, 1.0) * m;
                let v = y.clamp(0.0, 1.0) * m;
                let i = (u.floor() as usize).min(size - 2);
                let j = (v.floor() as usize).min(size - 2);
                let (fu, fv) = (u - i as f64, v - j as f64);
                let at = |a: usize, b: usize| values[a * size + b];
                (1.0 - fu) * (1.0 - fv) * at(i, j)
                    + fu * (1.0 - fv) * at(i + 1, j)
                    + (1.0 - fu) * fv * at(i, j + 1)
                    + fu * fv * at(i + 1, j + 1)
            }
        }
    }

    /// `max |sigma^2(x,y) - sigma^2(y,x)|` (exact for the built-in kinds).
    pub fn symmetry_defect(&self) -> f64 {
        match &self.kind {
            ProfileKind::Constant(_) | ProfileKind::BandIndicator { .. } => 0.0,
            ProfileKind::Tabulated { size, values } => {
                let mut worst = 0.0f64;
                for i in 0..*size {
                    for j in 0..i {
                        worst = worst.max((values[i * size + j] - values[j * size + i]).abs());
                    }
                }
                worst
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, ProfileKind::Constant(_))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_indicator_values() {
        let p = VarianceProfile::band(0.2).unwrap();
        assert_eq!(p.eval(0.1, 0.4), 0.0);
        assert_eq!(p.eval(0.1, 0.25), 1.0);
        assert_eq!(p.eval(0.4, 0.1), p.eval(0.1, 0.4));
        assert!(VarianceProfile::band(1.5).is_err());
        assert!(VarianceProfile::band(0.0).is_err());
    }

    #[test]
    fn tabulated_is_bilinear() {
        let p = VarianceProfile::tabulated(2, vec![0.0, 1.0, 1.0, 2.0]).unwrap();
        assert!((p.eval(0.5, 0.5) - 1.0).abs() < 1e-15);
        assert!((p.eval(1.0, 0.25) - 1.25).abs() < 1e-15);
        assert_eq!(p.symmetry_defect(), 0.0);
        let q = VarianceProfile::tabulated(2, vec![0.0, 1.0, 0.5, 2.0]).unwrap();
        assert_eq!(q.symmetry_defect(), 0.5);
    }

    #[test]
    fn rejects_negative_values() {
        assert!(VarianceProfile::constant(-1.0).is_err());
        assert!(VarianceProfile::tabulated(2, vec![0.0, -1.0, -1.0, 0.0]).is_err());
    }
}
