//! One-dimensional quadrature helpers.
//!
//! `GradedGauss` splits every piece into Gauss-Legendre panels that shrink
//! geometrically toward both ends, which keeps integrable endpoint
//! singularities (logarithms, square roots) accurate without knowing their
//! exact form.

use std::ops::{Add, Mul};
use std::sync::OnceLock;

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16))
}

/// Composite Gauss-Legendre (16 points per panel) with geometric grading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradedGauss {
    /// Number of geometric levels toward each end of a piece.
    pub levels: usize,
    /// Ratio between consecutive graded panels.
    pub ratio: f64,
    /// Uniform panels in the middle of a piece.
    pub interior_panels: usize,
}

impl Default for GradedGauss {
    fn default() -> Self {
        Self {
            levels: 12,
            ratio: 0.2,
            interior_panels: 6,
        }
    }
}

impl GradedGauss {
    pub fn refined(&self) -> Self {
        Self {
            levels: self.levels + 4,
            ratio: self.ratio,
            interior_panels: self.interior_panels * 2,
        }
    }

    /// Panel boundaries for one piece `[a, b]`.
    fn panels(&self, a: f64, b: f64) -> Vec<f64> {
        let half = 0.5 * (b - a);
        let mut cuts = Vec::with_capacity(2 * self.levels + self.interior_panels + 2);
        cuts.push(a);
        for k in (1..=self.levels).rev() {
            cuts.push(a + half * self.ratio.powi(k as i32));
        }
        let inner_lo = a + half * self.ratio;
        let inner_hi = b - half * self.ratio;
        for k in 1..self.interior_panels {
            cuts.push(inner_lo + (inner_hi - inner_lo) * k as f64 / self.interior_panels as f64);
        }
        for k in 1..=self.levels {
            cuts.push(b - half * self.ratio.powi(k as i32));
        }
        cuts.push(b);
        cuts
    }

    /// Quadrature nodes and weights covering `[a, b]`.
    pub fn rule(&self, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
        let (gx, gw) = gl16();
        let cuts = self.panels(a, b);
        let mut xs = Vec::with_capacity(cuts.len() * 16);
        let mut ws = Vec::with_capacity(cuts.len() * 16);
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let mid = 0.5 * (lo + hi);
            let rad = 0.5 * (hi - lo);
            if rad <= 0.0 {
                continue;
            }
            for (x, wt) in gx.iter().zip(gw) {
                xs.push(mid + rad * x);
                ws.push(rad * wt);
            }
        }
        (xs, ws)
    }

    /// Nodes and weights over the pieces delimited by sorted `breaks`.
    pub fn rule_pieces(&self, breaks: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut xs = Vec::new();
        let mut ws = Vec::new();
        for w in breaks.windows(2) {
            if w[1] > w[0] {
                let (x, wt) = self.rule(w[0], w[1]);
                xs.extend(x);
                ws.extend(wt);
            }
        }
        (xs, ws)
    }

    pub fn integrate<T, F>(&self, f: F, a: f64, b: f64) -> T
    where
        T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
        F: FnMut(f64) -> T,
    {
        self.integrate_pieces(f, &[a, b])
    }

    pub fn integrate_pieces<T, F>(&self, mut f: F, breaks: &[f64]) -> T
    where
        T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
        F: FnMut(f64) -> T,
    {
        let (xs, ws) = self.rule_pieces(breaks);
        xs.iter()
            .zip(&ws)
            .fold(T::default(), |acc, (&x, &w)| acc + f(x) * w)
    }
}

/// Sorted, deduplicated breakpoints of `[a, b]` including the ends.
pub fn breakpoints_within(a: f64, b: f64, extra: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut pts: Vec<f64> = std::iter::once(a)
        .chain(std::iter::once(b))
        .chain(extra.into_iter().filter(|&x| x > a && x < b))
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * (1.0 + y.abs()));
    pts
}
