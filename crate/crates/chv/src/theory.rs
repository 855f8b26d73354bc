//! Finite numeric checks of the overlap-gap machinery: a determinant lower
//! bound for near-identity overlap matrices, a geometric covering of a cone
//! by exponentially spaced balls, and two integer-point counting bounds.
//! Each check computes the exact quantity and the claimed bound and reports
//! whether the claim holds; these are theorems, so a `false` is an
//! implementation bug, and the test suites assert exactly that.

use crate::error::{Error, Result};
use crate::linalg::{dot, lu_det, norm2, sym_eigenvalues, Mat};
use crate::rng::{Sampler, Seed};

/// Replica overlap matrix: diagonal exactly 1, off-diagonal entries inside
/// [1 - beta, 1 - beta + beta/(2r)].
#[derive(Clone, Debug)]
pub struct OverlapMatrix {
    pub r: usize,
    pub beta: f64,
    pub entries: Mat,
}

impl OverlapMatrix {
    pub fn new(entries: Mat, beta: f64) -> Result<Self> {
        let r = entries.rows();
        if entries.cols() != r || r < 2 {
            return Err(Error::domain("overlap matrix must be square with r >= 2"));
        }
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::domain("beta must lie in (0,1)"));
        }
        let lo = 1.0 - beta;
        let hi = 1.0 - beta + beta / (2.0 * r as f64);
        let slack = 1e-12;
        for i in 0..r {
            if entries.get(i, i) != 1.0 {
                return Err(Error::domain("overlap diagonal must be exactly 1"));
            }
            for j in 0..r {
                if i == j {
                    continue;
                }
                let v = entries.get(i, j);
                if v != entries.get(j, i) {
                    return Err(Error::domain("overlap matrix must be symmetric"));
                }
                if v < lo - slack || v > hi + slack {
                    return Err(Error::domain(format!(
                        "off-diagonal {v} outside [{lo}, {hi}]"
                    )));
                }
            }
        }
        Ok(OverlapMatrix { r, beta, entries })
    }

    /// All off-diagonal entries at the band floor 1 - beta.
    pub fn homogeneous(r: usize, beta: f64) -> Result<Self> {
        let mut m = Mat::zeros(r, r);
        for i in 0..r {
            for j in 0..r {
                m.set(i, j, if i == j { 1.0 } else { 1.0 - beta });
            }
        }
        OverlapMatrix::new(m, beta)
    }

    /// Off-diagonal entries drawn uniformly from the band, symmetrically.
    pub fn random_in_band(r: usize, beta: f64, seed: Seed) -> Result<Self> {
        let mut sampler = Sampler::new(seed);
        let width = beta / (2.0 * r as f64);
        let mut m = Mat::zeros(r, r);
        for i in 0..r {
            m.set(i, i, 1.0);
            for j in i + 1..r {
                let v = 1.0 - beta + width * sampler.uniform01();
                m.set(i, j, v);
                m.set(j, i, v);
            }
        }
        OverlapMatrix::new(m, beta)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct DetBoundReport {
    pub det: f64,
    pub bound: f64,
    pub min_eigenvalue: f64,
    pub psd: bool,
    pub holds: bool,
}

/// Determinant lower bound (beta/2)^{r-1} (beta/2 + (1-beta) r) for overlap
/// matrices, plus positive semidefiniteness of the matrix itself.
pub fn determinant_bound_check(mat: &OverlapMatrix) -> DetBoundReport {
    let r = mat.r as f64;
    let det = lu_det(&mat.entries);
    let bound = (mat.beta / 2.0).powi(mat.r as i32 - 1) * (mat.beta / 2.0 + (1.0 - mat.beta) * r);
    let eig = sym_eigenvalues(&mat.entries);
    let min_eigenvalue = eig[0];
    let psd = min_eigenvalue >= -1e-9;
    let holds = det >= bound * (1.0 - 1e-9) && psd;
    DetBoundReport { det, bound, min_eigenvalue, psd, holds }
}

#[derive(Clone, Copy, Debug)]
pub struct CoveringReport {
    pub index: i64,
    pub distance: f64,
    pub radius: f64,
    pub holds: bool,
}

/// Cone covering: x within angle arctan(t) of the unit vector x0 must land
/// inside the ball of radius sqrt(5) t (1+t)^i around (1+t)^i x0, where
/// i = floor(log_{1+t} <x, x0>).
pub fn covering_check(t: f64, x0: &[f64], x: &[f64]) -> Result<CoveringReport> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::domain("t must lie in (0, 1]"));
    }
    if x0.len() != x.len() {
        return Err(Error::domain("x and x0 must share a dimension"));
    }
    let x0n = norm2(x0);
    if (x0n - 1.0).abs() > 1e-9 {
        return Err(Error::domain("x0 must be a unit vector"));
    }
    let xn = norm2(x);
    if xn == 0.0 {
        return Err(Error::domain("x must be nonzero"));
    }
    let p = dot(x, x0);
    // inside the cone: positive axis component and tan(angle) <= t
    let perp_sq = (xn * xn - p * p).max(0.0);
    if p <= 0.0 || perp_sq > t * t * p * p * (1.0 + 1e-9) {
        return Err(Error::domain("x lies outside the cone of half-angle arctan t"));
    }
    let index = (p.ln() / (1.0 + t).ln()).floor() as i64;
    let center_scale = (1.0 + t).powi(index as i32);
    let distance = x
        .iter()
        .zip(x0)
        .map(|(&xi, &ci)| {
            let d = xi - center_scale * ci;
            d * d
        })
        .sum::<f64>()
        .sqrt();
    let radius = 5f64.sqrt() * t * center_scale;
    Ok(CoveringReport { index, distance, radius, holds: distance <= radius })
}

#[derive(Clone, Copy, Debug)]
pub struct CountBoundReport {
    pub exact: u64,
    pub bound: f64,
    pub holds: bool,
}

/// Counts integer points with squared norm at most `radius_sq` in dimension
/// `dim` by pruned coordinate recursion.
fn count_integer_points(dim: usize, radius_sq: f64) -> u64 {
    fn rec(dim: usize, remaining: f64) -> u64 {
        if dim == 0 {
            return 1;
        }
        if remaining < 0.0 {
            return 0;
        }
        let top = remaining.sqrt().floor() as i64;
        let mut total = 0;
        for v in -top..=top {
            total += rec(dim - 1, remaining - (v * v) as f64);
        }
        total
    }
    rec(dim, radius_sq)
}

/// Integer points in the ball of radius sqrt(rho n) versus the bound
/// e^{s rho n} (1 + 2 e^{-s} / (1 - e^{-s}))^n at s = ln(1/rho).
pub fn ball_count_bound_check(n: usize, rho: f64) -> Result<CountBoundReport> {
    if n == 0 || n > 8 {
        return Err(Error::SizeGuard("ball enumeration is kept to n <= 8".into()));
    }
    if !(rho > 0.0 && rho <= 0.5) {
        return Err(Error::domain("rho must lie in (0, 1/2]"));
    }
    let exact = count_integer_points(n, rho * n as f64);
    // e^{-s} = rho at s = ln(1/rho)
    let bound = (1.0 / rho).powf(rho * n as f64) * (1.0 + 2.0 * rho / (1.0 - rho)).powi(n as i32);
    Ok(CountBoundReport { exact, bound, holds: exact as f64 <= bound })
}

/// Points of the scaled lattice gamma Z^m inside the ball of radius r,
/// versus the bound (r sqrt(2 pi e) / (gamma sqrt(m)) + sqrt(2 pi e)/2)^m.
pub fn grid_ball_count_bound_check(m: usize, r: f64, gamma: f64) -> Result<CountBoundReport> {
    if m == 0 || m > 6 {
        return Err(Error::SizeGuard("grid-ball enumeration is kept to m <= 6".into()));
    }
    if !(r > 0.0 && gamma > 0.0) {
        return Err(Error::domain("r and gamma must be positive"));
    }
    let per_axis = (r / gamma).ceil();
    if (2.0 * per_axis + 1.0).powi(m as i32) > 1e8 {
        return Err(Error::SizeGuard(
            "grid-ball enumeration would exceed 1e8 points".into(),
        ));
    }
    let q = r / gamma;
    let exact = count_integer_points(m, q * q);
    let root = (2.0 * std::f64::consts::PI * std::f64::consts::E).sqrt();
    let bound = (r * root / (gamma * (m as f64).sqrt()) + root / 2.0).powi(m as i32);
    Ok(CountBoundReport { exact, bound, holds: exact as f64 <= bound })
}

/// Outcome of one randomized claim sweep: how many of the sampled
/// configurations falsified the claim (zero is the expectation).
#[derive(Clone, Copy, Debug)]
pub struct SweepSummary {
    pub claim: &'static str,
    pub samples: u64,
    pub failures: u64,
}

impl SweepSummary {
    pub fn holds(&self) -> bool {
        self.failures == 0
    }
}

pub fn determinant_bound_sweep(samples: u64, seed: Seed) -> SweepSummary {
    let mut sampler = Sampler::new(seed);
    let mut failures = 0;
    for i in 0..samples {
        let r = 2 + (i % 7) as usize;
        let beta = 0.02 + 0.96 * sampler.uniform01();
        let mat = OverlapMatrix::random_in_band(r, beta, seed.with_stream(i + 1))
            .expect("in-band construction");
        let rep = determinant_bound_check(&mat);
        if !rep.holds {
            failures += 1;
        }
    }
    SweepSummary { claim: "overlap-determinant-bound", samples, failures }
}

pub fn covering_sweep(samples: u64, seed: Seed) -> SweepSummary {
    let mut sampler = Sampler::new(seed);
    let mut failures = 0;
    for i in 0..samples {
        let n = 2 + (i % 19) as usize;
        let t = 0.05 + 0.95 * sampler.uniform01();
        let mut x0: Vec<f64> = (0..n).map(|_| sampler.standard_normal()).collect();
        let x0n = norm2(&x0);
        for v in x0.iter_mut() {
            *v /= x0n;
        }
        let mut u: Vec<f64> = (0..n).map(|_| sampler.standard_normal()).collect();
        let proj = dot(&u, &x0);
        for (ui, &ci) in u.iter_mut().zip(&x0) {
            *ui -= proj * ci;
        }
        let un = norm2(&u);
        let slope = t * sampler.uniform01();
        let scale = (6.0 * (sampler.uniform01() - 0.5)).exp();
        let x: Vec<f64> = x0
            .iter()
            .zip(&u)
            .map(|(&ci, &ui)| scale * (ci + slope * ui / un.max(1e-300)))
            .collect();
        let rep = covering_check(t, &x0, &x).expect("point built inside the cone");
        if !rep.holds {
            failures += 1;
        }
    }
    SweepSummary { claim: "cone-covering-radius", samples, failures }
}

pub fn ball_count_sweep(samples: u64, seed: Seed) -> SweepSummary {
    let mut sampler = Sampler::new(seed);
    let mut failures = 0;
    for i in 0..samples {
        let n = 1 + (i % 8) as usize;
        let rho = 0.02 + 0.48 * sampler.uniform01();
        let rep = ball_count_bound_check(n, rho).expect("guarded parameters");
        if !rep.holds {
            failures += 1;
        }
    }
    SweepSummary { claim: "ball-point-count-bound", samples, failures }
}

pub fn grid_ball_count_sweep(samples: u64, seed: Seed) -> SweepSummary {
    let mut sampler = Sampler::new(seed);
    let mut failures = 0;
    for i in 0..samples {
        let m = 1 + (i % 6) as usize;
        let gamma = 0.2 + sampler.uniform01();
        let r = gamma * (0.5 + 9.5 * sampler.uniform01());
        let rep = grid_ball_count_bound_check(m, r, gamma).expect("guarded parameters");
        if !rep.holds {
            failures += 1;
        }
    }
    SweepSummary { claim: "grid-ball-point-count-bound", samples, failures }
}

/// Runs every randomized claim sweep at the given sample count, one
/// dedicated seed stream each.
pub fn run_all_theory_sweeps(samples: u64, seed: Seed) -> Vec<SweepSummary> {
    vec![
        determinant_bound_sweep(samples, seed.with_stream(seed.stream_id.wrapping_add(1) << 32)),
        covering_sweep(samples, seed.with_stream(seed.stream_id.wrapping_add(2) << 32)),
        ball_count_sweep(samples, seed.with_stream(seed.stream_id.wrapping_add(3) << 32)),
        grid_ball_count_sweep(samples, seed.with_stream(seed.stream_id.wrapping_add(4) << 32)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlap_validation() {
        assert!(OverlapMatrix::homogeneous(3, 0.5).is_ok());
        assert!(OverlapMatrix::homogeneous(1, 0.5).is_err());
        assert!(OverlapMatrix::homogeneous(3, 0.0).is_err());
        // off-diagonal above the band
        let mut m = Mat::zeros(2, 2);
        m.set(0, 0, 1.0);
        m.set(1, 1, 1.0);
        m.set(0, 1, 0.95);
        m.set(1, 0, 0.95);
        assert!(OverlapMatrix::new(m, 0.4).is_err());
    }

    #[test]
    fn determinant_bound_homogeneous_spectrum() {
        // all off-diagonals 1 - beta: eigenvalues beta (r-1 times) and
        // beta + (1-beta) r
        let mat = OverlapMatrix::homogeneous(3, 0.5).unwrap();
        let rep = determinant_bound_check(&mat);
        assert!((rep.det - 0.5).abs() < 1e-12);
        assert!((rep.bound - 0.109_375).abs() < 1e-12);
        assert!(rep.psd && rep.holds);
        let eig = sym_eigenvalues(&mat.entries);
        assert!((eig[0] - 0.5).abs() < 1e-12);
        assert!((eig[1] - 0.5).abs() < 1e-12);
        assert!((eig[2] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn determinant_bound_two_by_two_extreme() {
        // r=2, beta=0.4, off-diagonal at the band ceiling 0.7
        let mut m = Mat::zeros(2, 2);
        m.set(0, 0, 1.0);
        m.set(1, 1, 1.0);
        m.set(0, 1, 0.7);
        m.set(1, 0, 0.7);
        let mat = OverlapMatrix::new(m, 0.4).unwrap();
        let rep = determinant_bound_check(&mat);
        assert!((rep.det - 0.51).abs() < 1e-12);
        assert!((rep.bound - 0.28).abs() < 1e-12);
        assert!(rep.holds);
    }

    #[test]
    fn determinant_bound_random_sweep() {
        let mut stream = 0;
        for r in 2..=8 {
            for beta in [0.1, 0.3, 0.5] {
                for _ in 0..200 {
                    stream += 1;
                    let mat = OverlapMatrix::random_in_band(
                        r,
                        beta,
                        Seed::new(900).with_stream(stream),
                    )
                    .unwrap();
                    let rep = determinant_bound_check(&mat);
                    assert!(rep.holds, "r={r} beta={beta}: {rep:?}");
                }
            }
        }
    }

    #[test]
    fn covering_identity_and_collinear() {
        let x0 = [1.0, 0.0, 0.0];
        let rep = covering_check(0.5, &x0, &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(rep.index, 0);
        assert!(rep.distance < 1e-12 && rep.holds);
        let rep = covering_check(0.5, &x0, &[2.0, 0.0, 0.0]).unwrap();
        assert_eq!(rep.index, 1);
        assert!((rep.distance - 0.5).abs() < 1e-12);
        assert!((rep.radius - 5f64.sqrt() * 0.75).abs() < 1e-12);
        assert!(rep.holds);
    }

    #[test]
    fn covering_rejects_outside_cone() {
        let x0 = [1.0, 0.0];
        assert!(covering_check(0.5, &x0, &[0.0, 1.0]).is_err());
        assert!(covering_check(0.5, &x0, &[-1.0, 0.0]).is_err());
        assert!(covering_check(0.5, &x0, &[1.0, 0.9]).is_err());
        assert!(covering_check(0.5, &x0, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn covering_random_cone_sweep() {
        let mut sampler = Sampler::new(Seed::new(77));
        for trial in 0..5000 {
            let n = 2 + (trial % 19);
            let t = 0.05 + 0.95 * sampler.uniform01();
            let mut x0: Vec<f64> = (0..n).map(|_| sampler.standard_normal()).collect();
            let x0n = norm2(&x0);
            for v in x0.iter_mut() {
                *v /= x0n;
            }
            // uniform direction inside the cone: axis + bounded-slope
            // perpendicular offset, then a wide log-scale radius
            let mut u: Vec<f64> = (0..n).map(|_| sampler.standard_normal()).collect();
            let proj = dot(&u, &x0);
            for (ui, &ci) in u.iter_mut().zip(&x0) {
                *ui -= proj * ci;
            }
            let un = norm2(&u);
            let slope = t * sampler.uniform01();
            let scale = (6.0 * (sampler.uniform01() - 0.5)).exp();
            let x: Vec<f64> = x0
                .iter()
                .zip(&u)
                .map(|(&ci, &ui)| scale * (ci + slope * ui / un.max(1e-300)))
                .collect();
            let rep = covering_check(t, &x0, &x).unwrap();
            assert!(rep.holds, "trial {trial}: {rep:?}");
        }
    }

    #[test]
    fn ball_count_hand_examples() {
        let rep = ball_count_bound_check(2, 0.5).unwrap();
        assert_eq!(rep.exact, 5);
        assert!((rep.bound - 18.0).abs() < 1e-9);
        assert!(rep.holds);
        let rep = ball_count_bound_check(1, 0.25).unwrap();
        assert_eq!(rep.exact, 1);
        assert!((rep.bound - 4f64.powf(0.25) * (5.0 / 3.0)).abs() < 1e-12);
        assert!(rep.holds);
    }

    #[test]
    fn ball_count_sweep() {
        for n in 2..=6 {
            for i in 1..=5 {
                let rho = i as f64 / 10.0;
                let rep = ball_count_bound_check(n, rho).unwrap();
                assert!(rep.holds, "n={n} rho={rho}: {rep:?}");
            }
        }
        assert!(ball_count_bound_check(9, 0.5).is_err());
        assert!(ball_count_bound_check(3, 0.6).is_err());
    }

    #[test]
    fn grid_ball_hand_examples() {
        let rep = grid_ball_count_bound_check(1, 1.0, 1.0).unwrap();
        assert_eq!(rep.exact, 3);
        let root = (2.0 * std::f64::consts::PI * std::f64::consts::E).sqrt();
        assert!((rep.bound - 1.5 * root).abs() < 1e-12);
        assert!(rep.holds);
        let rep = grid_ball_count_bound_check(2, 2.0, 1.0).unwrap();
        assert_eq!(rep.exact, 13);
        assert!((rep.bound - (2.0 * root / 2f64.sqrt() + root / 2.0).powi(2)).abs() < 1e-9);
        assert!(rep.holds);
    }

    #[test]
    fn bundled_sweeps_find_no_counterexamples() {
        for summary in run_all_theory_sweeps(1000, Seed::new(5)) {
            assert!(summary.holds(), "{} failed {} times", summary.claim, summary.failures);
            assert_eq!(summary.samples, 1000);
        }
    }

    #[test]
    fn grid_ball_random_sweep() {
        let mut sampler = Sampler::new(Seed::new(13));
        for trial in 0..2000 {
            let m = 1 + (trial % 4);
            let r = 0.2 + 5.0 * sampler.uniform01();
            let gamma = 0.1 + sampler.uniform01();
            let rep = grid_ball_count_bound_check(m, r, gamma).unwrap();
            assert!(rep.holds, "trial {trial} m={m} r={r} gamma={gamma}: {rep:?}");
        }
        assert!(grid_ball_count_bound_check(7, 1.0, 1.0).is_err());
        assert!(grid_ball_count_bound_check(6, 1000.0, 0.001).is_err());
    }
}
