//! Uniform grids and piecewise-linear tables.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `points` equally spaced nodes from `start` to `stop` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl UniformGrid {
    pub fn new(start: f64, stop: f64, points: usize) -> Result<Self> {
        if !(start.is_finite() && stop.is_finite()) || stop <= start {
            return Err(Error::InvalidParameter(format!(
                "grid bounds must be finite with start < stop, got [{start}, {stop}]"
            )));
        }
        if points < 2 {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least 2 points, got {points}"
            )));
        }
        Ok(Self {
            start,
            stop,
            points,
        })
    }

    pub fn step(&self) -> f64 {
        (self.stop - self.start) / (self.points - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.points {
            self.stop
        } else {
            self.start + i as f64 * self.step()
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.points).map(move |i| self.point(i))
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.iter().collect()
    }

    pub fn covers(&self, lo: f64, hi: f64) -> bool {
        self.start <= lo && self.stop >= hi
    }
}

/// Midpoints of `cells` equal cells partitioning `[a, b]`.
pub fn midpoints(a: f64, b: f64, cells: usize) -> Vec<f64> {
    let h = (b - a) / cells as f64;
    (0..cells).map(|i| a + (i as f64 + 0.5) * h).collect()
}

/// Values on uniform nodes over `[start, stop]` with linear interpolation.
/// Outside the interval the end values are held constant.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearTable {
    start: f64,
    stop: f64,
    values: Vec<f64>,
}

impl LinearTable {
    pub fn new(start: f64, stop: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 || stop <= start || !start.is_finite() || !stop.is_finite() {
            return Err(Error::InvalidParameter(
                "a table needs >= 2 values on a finite interval".into(),
            ));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(
                start + bad as f64 * (stop - start) / (values.len() - 1) as f64,
            ));
        }
        Ok(Self {
            start,
            stop,
            values,
        })
    }

    pub fn from_fn(start: f64, stop: f64, intervals: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let grid = UniformGrid::new(start, stop, intervals + 1)?;
        Self::new(start, stop, grid.iter().map(f).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.start, self.stop)
    }

    pub fn intervals(&self) -> usize {
        self.values.len() - 1
    }

    pub fn node(&self, i: usize) -> f64 {
        let n = self.intervals();
        if i == n {
            self.stop
        } else {
            self.start + (self.stop - self.start) * i as f64 / n as f64
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.intervals();
        let u = (x - self.start) / (self.stop - self.start) * n as f64;
        if u <= 0.0 {
            return self.values[0];
        }
        if u >= n as f64 {
            return self.values[n];
        }
        let k = (u.floor() as usize).min(n - 1);
        let frac = u - k as f64;
        if frac == 0.0 {
            return self.values[k];
        }
        self.values[k] + frac * (self.values[k + 1] - self.values[k])
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] >= w[0])
    }

    /// Generalized inverse of a nondecreasing table: the smallest abscissa
    /// whose interpolated value reaches `y`.
    pub fn inverse(&self, y: f64) -> f64 {
        let v = &self.values;
        let n = self.intervals();
        if y <= v[0] {
            return self.start;
        }
        if y > v[n] {
            return self.stop;
        }
        // First node with value >= y; the crossing lies in the cell before it.
        let k = v.partition_point(|&t| t < y);
        let (lo, hi) = (v[k - 1], v[k]);
        let x0 = self.node(k - 1);
        let x1 = self.node(k);
        if hi == lo {
            return x1;
        }
        x0 + (y - lo) / (hi - lo) * (x1 - x0)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}
