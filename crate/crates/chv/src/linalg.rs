//! Small dense linear algebra: row-major matrices, Cholesky solves for
//! Gram systems, LU determinants, symmetric eigenvalues, and the power
//! iteration behind spectral norms. Everything here targets desk-scale
//! experiment sizes (m up to a few hundred), not large-scale performance.

use crate::error::{Error, Result};

/// Dense row-major matrix of 64-bit floats.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![0.0; rows * cols] }
    }

    /// Wraps `data` laid out row by row.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length mismatch");
        Mat { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// A v for v of length `cols`.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// A' v for v of length `rows`.
    pub fn tr_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let vi = v[i];
            let row = self.row(i);
            for (o, &a) in out.iter_mut().zip(row) {
                *o += vi * a;
            }
        }
        out
    }

    /// Gram matrix A A' (rows x rows).
    pub fn gram(&self) -> Mat {
        let m = self.rows;
        let mut g = Mat::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let v = dot(self.row(i), self.row(j));
                g.set(i, j, v);
                g.set(j, i, v);
            }
        }
        g
    }

    pub fn scaled(&self, c: f64) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| c * v).collect(),
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Compensated (Neumaier) dot product; used where strict-inequality
/// comparisons sit close to the working precision.
pub fn neumaier_dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut sum = 0.0;
    let mut comp = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        let p = x * y;
        let t = sum + p;
        if sum.abs() >= p.abs() {
            comp += (sum - t) + p;
        } else {
            comp += (p - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
pub struct Cholesky {
    l: Mat,
}

/// Factors a symmetric matrix; fails (rather than regularizing) when a pivot
/// is not strictly positive, so rank deficiency surfaces as an error.
pub fn cholesky(a: &Mat) -> Result<Cholesky> {
    assert_eq!(a.rows(), a.cols());
    let n = a.rows();
    let mut l = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            if i == j {
                if !(s > 0.0) || !s.is_finite() {
                    return Err(Error::numerical(format!(
                        "matrix not positive definite at pivot {i} (value {s})"
                    )));
                }
                l.set(i, i, s.sqrt());
            } else {
                l.set(i, j, s / l.get(j, j));
            }
        }
    }
    Ok(Cholesky { l })
}

impl Cholesky {
    /// Solves A x = b given the factor of A.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.l.rows();
        assert_eq!(b.len(), n);
        let mut y = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                y[i] -= self.l.get(i, k) * y[k];
            }
            y[i] /= self.l.get(i, i);
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                y[i] -= self.l.get(k, i) * y[k];
            }
            y[i] /= self.l.get(i, i);
        }
        y
    }

    /// Cheap condition estimate for the factored matrix: the squared ratio of
    /// extreme factor diagonals. Exact for diagonal matrices, adequate as a
    /// rank-deficiency tripwire.
    pub fn condition_estimate(&self) -> f64 {
        let n = self.l.rows();
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for i in 0..n {
            let d = self.l.get(i, i);
            lo = lo.min(d);
            hi = hi.max(d);
        }
        (hi / lo) * (hi / lo)
    }
}

/// Determinant by LU with partial pivoting.
pub fn lu_det(a: &Mat) -> f64 {
    assert_eq!(a.rows(), a.cols());
    let n = a.rows();
    let mut m = a.clone();
    let mut det = 1.0;
    for k in 0..n {
        let mut piv = k;
        for i in k + 1..n {
            if m.get(i, k).abs() > m.get(piv, k).abs() {
                piv = i;
            }
        }
        if m.get(piv, k) == 0.0 {
            return 0.0;
        }
        if piv != k {
            for j in 0..n {
                let t = m.get(k, j);
                m.set(k, j, m.get(piv, j));
                m.set(piv, j, t);
            }
            det = -det;
        }
        let pivot = m.get(k, k);
        det *= pivot;
        for i in k + 1..n {
            let f = m.get(i, k) / pivot;
            for j in k..n {
                let v = m.get(i, j) - f * m.get(k, j);
                m.set(i, j, v);
            }
        }
    }
    det
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi sweeps, ascending.
pub fn sym_eigenvalues(a: &Mat) -> Vec<f64> {
    assert_eq!(a.rows(), a.cols());
    let n = a.rows();
    let mut m = a.clone();
    let frob: f64 = m.data().iter().map(|v| v * v).sum::<f64>().sqrt();
    let stop = 1e-15 * frob.max(1e-300);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += m.get(p, q) * m.get(p, q);
            }
        }
        if off.sqrt() <= stop {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let theta = (m.get(q, q) - m.get(p, p)) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m.get(k, p);
                    let mkq = m.get(k, q);
                    m.set(k, p, c * mkp - s * mkq);
                    m.set(k, q, s * mkp + c * mkq);
                }
                for k in 0..n {
                    let mpk = m.get(p, k);
                    let mqk = m.get(q, k);
                    m.set(p, k, c * mpk - s * mqk);
                    m.set(q, k, s * mpk + c * mqk);
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| m.get(i, i)).collect();
    eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
    eig
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Largest singular value via power iteration on A'A. The start vector is
/// all-ones; on stagnation (iterate annihilated or Rayleigh quotient stuck)
/// the vector is re-randomized from a fixed counter so the routine stays
/// deterministic. `tol` is the relative tolerance on successive Rayleigh
/// quotients; convergence is from below, so callers checking upper bounds
/// get conservative values.
pub fn spectral_norm(a: &Mat, tol: f64) -> f64 {
    let n = a.cols();
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut lambda_prev = f64::NAN;
    let mut rerandomize = 0u64;
    for iter in 0..200_000 {
        let w = a.mul_vec(&v);
        let lambda = dot(&w, &w);
        if lambda == 0.0 {
            // start vector in the null space; try a different direction
            if rerandomize >= 4 {
                return 0.0;
            }
            rerandomize += 1;
            let mut state = 0x5eed_0000 + rerandomize;
            for x in v.iter_mut() {
                *x = (splitmix64(&mut state) >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
            }
            let nv = norm2(&v);
            for x in v.iter_mut() {
                *x /= nv;
            }
            lambda_prev = f64::NAN;
            continue;
        }
        if iter > 0 && (lambda - lambda_prev).abs() <= tol * lambda {
            return lambda.sqrt();
        }
        lambda_prev = lambda;
        let u = a.tr_mul_vec(&w);
        let un = norm2(&u);
        for (x, &ui) in v.iter_mut().zip(&u) {
            *x = ui / un;
        }
    }
    lambda_prev.sqrt()
}
