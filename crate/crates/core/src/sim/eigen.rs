//! Dense real symmetric eigenvalues: Householder reduction to tridiagonal
//! form followed by implicit QL with Wilkinson-type shifts.
//!
//! The reduction works on the lower triangle of a column-major buffer. Each
//! step applies the rank-2 update of the trailing block and, in the same
//! sweep, accumulates the symmetric matrix-vector product needed by the next
//! reflector, so the trailing block is streamed once per step.

use crate::error::{Error, Result};

/// Real symmetric matrix, column-major, only the lower triangle is referenced.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    /// Builds the matrix from `entry(i, j)` evaluated for `i >= j`.
    pub fn from_lower_fn(n: usize, mut entry: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for j in 0..n {
            for i in j..n {
                m.data[j * n + i] = entry(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        self.data[c * self.n + r]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        self.data[c * self.n + r] = value;
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.data[i * self.n + i]).sum()
    }
}

/// Symmetric tridiagonal matrix: `diag` has length n, `offdiag` length n-1.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
}

/// Eigenvalues of `a`, sorted ascending. Consumes the matrix as workspace.
pub fn symmetric_eigenvalues(a: SymmetricMatrix) -> Result<Vec<f64>> {
    let tri = tridiagonalize(a);
    tridiagonal_eigenvalues(tri)
}

/// Reflector turning `x` into `alpha * e1`: returns (alpha, beta) and
/// overwrites `x` with `v` so that `(I - beta v v^T) x_old = alpha e1`.
fn householder(x: &mut [f64]) -> (f64, f64) {
    let x0 = x[0];
    let sigma: f64 = x[1..].iter().map(|t| t * t).sum();
    if sigma == 0.0 {
        x.iter_mut().for_each(|t| *t = 0.0);
        return (x0, 0.0);
    }
    let norm = (x0 * x0 + sigma).sqrt();
    let alpha = if x0 >= 0.0 { -norm } else { norm };
    let v0 = x0 - alpha;
    x[0] = v0;
    (alpha, 2.0 / (v0 * v0 + sigma))
}

#[inline]
fn dot4(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (x, y) in ra.iter().zip(rb) {
        s += x * y;
    }
    s
}

/// Symmetric product `out = A[from.., from..] * v` on the lower triangle.
fn symv_lower(a: &SymmetricMatrix, from: usize, v: &[f64], out: &mut [f64]) {
    let n = a.n;
    out[from..].iter_mut().for_each(|t| *t = 0.0);
    for j in from..n {
        let col = &a.data[j * n + j..(j + 1) * n];
        let vj = v[j];
        out[j] += col[0] * vj;
        let tail = &col[1..];
        let s = dot4(tail, &v[j + 1..n]);
        for (o, &aij) in out[j + 1..n].iter_mut().zip(tail) {
            *o += aij * vj;
        }
        out[j] += s;
    }
}

/// Householder tridiagonalization (eigenvalues only, no accumulation of Q).
pub fn tridiagonalize(mut a: SymmetricMatrix) -> Tridiagonal {
    let n = a.n;
    let mut diag = vec![0.0; n];
    let mut offdiag = vec![0.0; n.saturating_sub(1)];
    if n == 0 {
        return Tridiagonal { diag, offdiag };
    }
    if n == 1 {
        diag[0] = a.data[0];
        return Tridiagonal { diag, offdiag };
    }

    // v, w, p live in global row indices; entries before the active block are 0.
    let mut v = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut v_next = vec![0.0; n];
    let mut p_next = vec![0.0; n];

    let steps = n - 2;
    let mut beta = 0.0;
    if steps > 0 {
        v[1..].copy_from_slice(&a.data[1..n]);
        let (alpha, b) = householder(&mut v[1..]);
        offdiag[0] = alpha;
        beta = b;
        symv_lower(&a, 1, &v, &mut p);
        p[1..].iter_mut().for_each(|t| *t *= beta);
    }

    for k in 0..steps {
        diag[k] = a.data[k * n + k];
        let lo = k + 1;
        // w = p - (beta/2)(p.v) v
        let kfac = 0.5 * beta * dot4(&p[lo..], &v[lo..]);
        for i in lo..n {
            w[i] = p[i] - kfac * v[i];
        }

        // Update the first column of the trailing block.
        {
            let j = lo;
            let (vj, wj) = (v[j], w[j]);
            let col = &mut a.data[j * n + j..(j + 1) * n];
            for ((aij, &vi), &wi) in col.iter_mut().zip(&v[j..]).zip(&w[j..]) {
                *aij -= vi * wj + wi * vj;
            }
        }

        let next = lo + 1;
        if k + 1 < steps {
            // Next reflector from the freshly updated column `lo`.
            v_next.iter_mut().for_each(|t| *t = 0.0);
            v_next[next..].copy_from_slice(&a.data[lo * n + next..(lo + 1) * n]);
            let (alpha, b) = householder(&mut v_next[next..]);
            offdiag[lo] = alpha;
            p_next.iter_mut().for_each(|t| *t = 0.0);

            for j in next..n {
                let (vj, wj, vnj) = (v[j], w[j], v_next[j]);
                let col = &mut a.data[j * n + j..(j + 1) * n];
                col[0] -= 2.0 * v[j] * w[j];
                let diag_term = col[0] * vnj;
                let tail = &mut col[1..];
                let vt = &v[j + 1..n];
                let wt = &w[j + 1..n];
                let vnt = &v_next[j + 1..n];
                let pt = &mut p_next[j + 1..n];
                let mut acc = [0.0f64; 4];
                let len = tail.len();
                let chunks = len / 4 * 4;
                let mut i = 0;
                while i < chunks {
                    for q in 0..4 {
                        let x = tail[i + q] - (vt[i + q] * wj + wt[i + q] * vj);
                        tail[i + q] = x;
                        acc[q] += x * vnt[i + q];
                        pt[i + q] += x * vnj;
                    }
                    i += 4;
                }
                let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
                while i < len {
                    let x = tail[i] - (vt[i] * wj + wt[i] * vj);
                    tail[i] = x;
                    s += x * vnt[i];
                    pt[i] += x * vnj;
                    i += 1;
                }
                p_next[j] += diag_term + s;
            }
            for t in p_next[next..].iter_mut() {
                *t *= b;
            }
            std::mem::swap(&mut v, &mut v_next);
            std::mem::swap(&mut p, &mut p_next);
            beta = b;
        } else {
            for j in next..n {
                let (vj, wj) = (v[j], w[j]);
                let col = &mut a.data[j * n + j..(j + 1) * n];
                for ((aij, &vi), &wi) in col.iter_mut().zip(&v[j..]).zip(&w[j..]) {
                    *aij -= vi * wj + wi * vj;
                }
            }
        }
    }

    diag[n - 2] = a.data[(n - 2) * n + n - 2];
    offdiag[n - 2] = a.data[(n - 2) * n + n - 1];
    diag[n - 1] = a.data[(n - 1) * n + n - 1];
    Tridiagonal { diag, offdiag }
}

const MAX_QL_SWEEPS: usize = 60;

/// Implicit QL on a symmetric tridiagonal matrix; eigenvalues sorted ascending.
pub fn tridiagonal_eigenvalues(tri: Tridiagonal) -> Result<Vec<f64>> {
    let Tridiagonal { mut diag, offdiag } = tri;
    let n = diag.len();
    if n == 0 {
        return Ok(diag);
    }
    let d = &mut diag;
    // e[i] couples d[i] and d[i+1]; e[n-1] = 0 sentinel.
    let mut e = offdiag;
    e.push(0.0);

    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_QL_SWEEPS {
                return Err(Error::EigenNoConvergence { index: l, sweeps });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0f64, 1.0f64, 0.0f64);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    if d.iter().any(|x| !x.is_finite()) {
        return Err(Error::EigenNoConvergence { index: n, sweeps: 0 });
    }
    diag.sort_by(f64::total_cmp);
    Ok(diag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Cyclic Jacobi rotations on a full copy: slow, simple, independent.
    fn jacobi_eigenvalues(a: &SymmetricMatrix) -> Vec<f64> {
        let n = a.dim();
        let mut m: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| a.get(i, j)).collect())
            .collect();
        for _ in 0..100 {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .filter(|(i, j)| i != j)
                .map(|(i, j)| m[i][j] * m[i][j])
                .sum();
            if off < 1e-26 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    if m[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let (mkp, mkq) = (m[k][p], m[k][q]);
                        m[k][p] = c * mkp - s * mkq;
                        m[k][q] = s * mkp + c * mkq;
                    }
                    for k in 0..n {
                        let (mpk, mqk) = (m[p][k], m[q][k]);
                        m[p][k] = c * mpk - s * mqk;
                        m[q][k] = s * mpk + c * mqk;
                    }
                }
            }
        }
        let mut ev: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    fn random_symmetric(n: usize, seed: u64) -> SymmetricMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SymmetricMatrix::from_lower_fn(n, |_, _| rng.random::<f64>() * 2.0 - 1.0)
    }

    #[test]
    fn matches_jacobi_on_random_matrices() {
        for (n, seed) in [(1, 1), (2, 2), (3, 3), (5, 4), (8, 5), (17, 6), (40, 7)] {
            let a = random_symmetric(n, seed);
            let expected = jacobi_eigenvalues(&a);
            let got = symmetric_eigenvalues(a).unwrap();
            for (g, e) in got.iter().zip(&expected) {
                assert!((g - e).abs() < 1e-10, "n={n}: {g} vs {e}");
            }
        }
    }

    #[test]
    fn diagonal_matrix_returns_sorted_diagonal() {
        let vals = [3.0, -1.0, 0.5, 0.5, 2.0];
        let a = SymmetricMatrix::from_lower_fn(5, |i, j| if i == j { vals[i] } else { 0.0 });
        let got = symmetric_eigenvalues(a).unwrap();
        assert_eq!(got, vec![-1.0, 0.5, 0.5, 2.0, 3.0]);
    }

    #[test]
    fn trace_and_frobenius_are_preserved() {
        let a = random_symmetric(120, 11);
        let trace = a.trace();
        let mut frob = 0.0;
        for i in 0..120 {
            for j in 0..120 {
                frob += a.get(i, j).powi(2);
            }
        }
        let ev = symmetric_eigenvalues(a).unwrap();
        assert!((ev.iter().sum::<f64>() - trace).abs() < 1e-9);
        assert!((ev.iter().map(|x| x * x).sum::<f64>() - frob).abs() < 1e-8 * frob);
    }

    #[test]
    fn tridiagonal_with_known_spectrum() {
        // Path-graph Laplacian-like matrix: eigenvalues 2 - 2cos(k pi/(n+1)).
        let n = 30;
        let tri = Tridiagonal {
            diag: vec![2.0; n],
            offdiag: vec![-1.0; n - 1],
        };
        let ev = tridiagonal_eigenvalues(tri).unwrap();
        for (k, e) in ev.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((e - exact).abs() < 1e-12);
        }
    }
}
