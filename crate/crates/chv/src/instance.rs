//! Problem instances. A CHV instance is a Gaussian matrix A (m rows, n
//! columns, m < n) together with the grid bound B and contraction target
//! kappa; a solution is a nonzero integer vector x with entries in [-B, B]
//! whose image satisfies ||Ax|| < kappa * sqrt(m) * ||x||.

use crate::error::{Error, Result};
use crate::linalg::{cholesky, norm2, Mat};
use crate::rng::{Sampler, Seed};

#[derive(Clone, Debug)]
pub struct ChvInstance {
    pub a: Mat,
    pub m: usize,
    pub n: usize,
    pub bound_b: u32,
    pub kappa: f64,
}

impl ChvInstance {
    /// Wraps an explicit matrix, enforcing m < n, B >= 1, kappa in (0,1).
    pub fn new(a: Mat, bound_b: u32, kappa: f64) -> Result<Self> {
        let (m, n) = (a.rows(), a.cols());
        if m == 0 || n == 0 || m >= n {
            return Err(Error::domain(format!(
                "instance needs 1 <= m < n, got m={m}, n={n}"
            )));
        }
        if bound_b < 1 {
            return Err(Error::domain("grid bound B must be at least 1"));
        }
        if !(kappa > 0.0 && kappa < 1.0) {
            return Err(Error::domain(format!("kappa must lie in (0,1), got {kappa}")));
        }
        Ok(ChvInstance { a, m, n, bound_b, kappa })
    }

    /// Fresh instance with A drawn entrywise from N(0,1).
    pub fn sample(m: usize, n: usize, bound_b: u32, kappa: f64, seed: Seed) -> Result<Self> {
        let a = sample_gaussian_matrix(m, n, 1.0, seed)?;
        ChvInstance::new(a, bound_b, kappa)
    }

    /// Aspect ratio m/n.
    pub fn alpha(&self) -> f64 {
        self.m as f64 / self.n as f64
    }

    /// Checks that x is a well formed grid vector for this instance:
    /// nonzero, entries within [-B, B].
    pub fn check_grid_vector(&self, x: &[i64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::domain(format!(
                "vector length {} does not match n={}",
                x.len(),
                self.n
            )));
        }
        let b = self.bound_b as i64;
        if let Some(bad) = x.iter().find(|&&v| v < -b || v > b) {
            return Err(Error::domain(format!("entry {bad} outside [-{b}, {b}]")));
        }
        if x.iter().all(|&v| v == 0) {
            return Err(Error::domain("the zero vector is never a solution"));
        }
        Ok(())
    }
}

/// m x n matrix of independent centered normal draws with the given
/// variance, filled row by row. Deterministic in the seed.
pub fn sample_gaussian_matrix(m: usize, n: usize, variance: f64, seed: Seed) -> Result<Mat> {
    if m == 0 || n == 0 {
        return Err(Error::domain("matrix dimensions must be positive"));
    }
    if !(variance > 0.0) {
        return Err(Error::domain("variance must be positive"));
    }
    let sd = variance.sqrt();
    let mut sampler = Sampler::new(seed);
    let mut data = vec![0.0; m * n];
    for v in data.iter_mut() {
        *v = sampler.normal(sd);
    }
    Ok(Mat::from_vec(m, n, data))
}

/// ||Ax|| / (sqrt(m) ||x||); the vector solves the instance iff this is
/// strictly below kappa.
pub fn achieved_ratio(inst: &ChvInstance, x: &[i64]) -> Result<f64> {
    inst.check_grid_vector(x)?;
    let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
    let ax = inst.a.mul_vec(&xf);
    Ok(norm2(&ax) / ((inst.m as f64).sqrt() * norm2(&xf)))
}

/// Orthogonal projection of g onto the kernel of a: g - A'(AA')^{-1}Ag,
/// with one refinement pass so the residual stays near working precision.
/// A rank-deficient Gram matrix (estimated condition above 1e12) is an
/// error rather than a garbage answer.
pub fn project_to_kernel(a: &Mat, g: &[f64]) -> Result<Vec<f64>> {
    assert_eq!(g.len(), a.cols(), "vector length must match column count");
    let gram = a.gram();
    let factor = cholesky(&gram).map_err(|_| {
        Error::numerical("Gram matrix AA' is numerically rank deficient")
    })?;
    if factor.condition_estimate() > 1e12 {
        return Err(Error::numerical(format!(
            "Gram matrix AA' is numerically rank deficient (condition estimate {:.3e})",
            factor.condition_estimate()
        )));
    }
    let mut p = g.to_vec();
    for _ in 0..2 {
        let r = a.mul_vec(&p);
        let w = factor.solve(&r);
        let correction = a.tr_mul_vec(&w);
        for (pi, ci) in p.iter_mut().zip(&correction) {
            *pi -= ci;
        }
    }
    Ok(p)
}
