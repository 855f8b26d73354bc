//! Kernel rounding solver. Draw a Haar-random direction in ker(A), blow it
//! up to a chi-distributed radius scaled by B/sqrt(4K ln+ B), and round each
//! coordinate to the grid, clamping at the bound. Rounding is the only step
//! that leaves the kernel, so ||Az|| is controlled by the rounding residual
//! alone.

use crate::error::{Error, Result};
use crate::instance::{project_to_kernel, ChvInstance};
use crate::linalg::norm2;
use crate::rng::{Sampler, Seed};

/// Solver parameters. K >= 2; ln+ denotes max(ln, 1).
#[derive(Clone, Copy, Debug)]
pub struct KernelConfig {
    pub k_const: u32,
    pub bound_b: u32,
}

impl KernelConfig {
    pub fn new(k_const: u32, bound_b: u32) -> Result<Self> {
        if k_const < 2 {
            return Err(Error::domain("kernel rounding requires K >= 2"));
        }
        if bound_b < 1 {
            return Err(Error::domain("grid bound B must be at least 1"));
        }
        Ok(KernelConfig { k_const, bound_b })
    }

    /// ln+ B = max(ln B, 1).
    pub fn ln_plus_b(&self) -> f64 {
        (self.bound_b as f64).ln().max(1.0)
    }

    /// Per-coordinate scale L = B / sqrt(4 K ln+ B); the pre-rounding vector
    /// has i.i.d. N(0, L^2) marginals.
    pub fn coordinate_scale(&self) -> f64 {
        self.bound_b as f64 / (4.0 * self.k_const as f64 * self.ln_plus_b()).sqrt()
    }
}

/// Nearest grid point in [-B, B]: round to the nearest integer (ties to
/// even) and clamp at the bound.
pub fn round_clamp(v: f64, bound_b: u32) -> i64 {
    debug_assert!(v.is_finite());
    let b = bound_b as i64;
    let r = v.round_ties_even() as i64;
    r.clamp(-b, b)
}

/// Result of one kernel rounding run. `pre_rounding` is the scaled kernel
/// vector before the grid snap; `attempts` counts the resamples spent
/// escaping an all-zero rounding (normally 1).
#[derive(Clone, Debug)]
pub struct KernelRoundOutcome {
    pub z: Vec<i64>,
    pub pre_rounding: Vec<f64>,
    pub attempts: u32,
}

/// Deterministic tail of the solver: scale a unit kernel direction by
/// radius * L and snap to the grid. Split out so tests can inject a
/// direction directly.
pub fn kernel_round_from_direction(
    direction: &[f64],
    radius: f64,
    cfg: &KernelConfig,
) -> (Vec<i64>, Vec<f64>) {
    let scale = radius * cfg.coordinate_scale();
    let x: Vec<f64> = direction.iter().map(|&d| d * scale).collect();
    let z = x.iter().map(|&v| round_clamp(v, cfg.bound_b)).collect();
    (z, x)
}

/// Full solver: Haar direction in ker(A) (Gaussian draw projected and
/// normalized), an independent chi_n radius (norm of a fresh Gaussian
/// draw), then the grid snap. An all-zero snap resamples on the next
/// stream; 16 consecutive all-zero snaps is an error.
pub fn kernel_round(
    inst: &ChvInstance,
    cfg: &KernelConfig,
    seed: Seed,
) -> Result<KernelRoundOutcome> {
    for attempt in 0..16u32 {
        let s = Seed { seed: seed.seed, stream_id: seed.stream_id + attempt as u64 };
        let mut sampler = Sampler::new(s);
        let g: Vec<f64> = (0..inst.n).map(|_| sampler.standard_normal()).collect();
        let kernel_g = project_to_kernel(&inst.a, &g)?;
        let gn = norm2(&kernel_g);
        if gn == 0.0 {
            continue;
        }
        let direction: Vec<f64> = kernel_g.iter().map(|v| v / gn).collect();
        let fresh: Vec<f64> = (0..inst.n).map(|_| sampler.standard_normal()).collect();
        let radius = norm2(&fresh);
        let (z, x) = kernel_round_from_direction(&direction, radius, cfg);
        if z.iter().any(|&v| v != 0) {
            return Ok(KernelRoundOutcome { z, pre_rounding: x, attempts: attempt + 1 });
        }
    }
    Err(Error::numerical(
        "kernel rounding produced the zero vector 16 times in a row",
    ))
}

/// Empirical distribution of the squared rounding residual {L*N}_B^2 for
/// N standard normal. `samples` is sorted ascending.
#[derive(Clone, Debug)]
pub struct RoundingResidualStats {
    pub mean: f64,
    samples: Vec<f64>,
}

impl RoundingResidualStats {
    /// Fraction of samples at most t.
    pub fn cdf(&self, t: f64) -> f64 {
        let k = self.samples.partition_point(|&v| v <= t);
        k as f64 / self.samples.len() as f64
    }

    /// Fraction of samples strictly above t.
    pub fn tail(&self, t: f64) -> f64 {
        1.0 - self.cdf(t)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Draws `n` samples of the squared distance between L*N and its grid snap,
/// with L the solver's coordinate scale. Needs n >= 1000 to say anything.
pub fn rounding_residual_stats(
    n: usize,
    bound_b: u32,
    k_const: u32,
    seed: Seed,
) -> Result<RoundingResidualStats> {
    if n < 1000 {
        return Err(Error::domain("residual statistics need at least 1000 samples"));
    }
    let cfg = KernelConfig::new(k_const, bound_b)?;
    let scale = cfg.coordinate_scale();
    let mut sampler = Sampler::new(seed);
    let mut samples: Vec<f64> = (0..n)
        .map(|_| {
            let v = scale * sampler.standard_normal();
            let d = v - round_clamp(v, bound_b) as f64;
            d * d
        })
        .collect();
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mean = samples.iter().sum::<f64>() / n as f64;
    Ok(RoundingResidualStats { mean, samples })
}
