//! Seeded distributional checks. Tolerances leave at least a few standard
//! errors of slack at the stated sample sizes, so a failure means a real
//! regression rather than an unlucky draw.

use chv::clwe::{distinguish, sample_null, sample_planted};
use chv::kernel::{kernel_round, rounding_residual_stats, KernelConfig};
use chv::linalg::{dot, norm2, spectral_norm, Mat};
use chv::lsh::{hash, keygen};
use chv::oracle::brute_force_best;
use chv::sweep::{run_sweep, Algorithm, SweepConfig};
use chv::theory::{covering_sweep, determinant_bound_check, OverlapMatrix};
use chv::{achieved_ratio, sample_gaussian_matrix, ChvInstance, Sampler, Seed};
use rayon::prelude::*;

#[test]
fn matrix_entries_have_unit_moments() {
    let a = sample_gaussian_matrix(1000, 1000, 1.0, Seed::new(7)).unwrap();
    let len = a.data().len() as f64;
    let mean = a.data().iter().sum::<f64>() / len;
    let var = a.data().iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / len;
    assert!(mean.abs() <= 0.01, "entry mean {mean}");
    assert!((var - 1.0).abs() <= 0.02, "entry variance {var}");
}

#[test]
fn spectral_norm_stays_under_gaussian_bound() {
    let bound = 50f64.sqrt() + 2.0 * 500f64.sqrt();
    let ok = (0..1000u64)
        .into_par_iter()
        .filter(|&t| {
            let a = sample_gaussian_matrix(50, 500, 1.0, Seed::new(41).with_stream(t)).unwrap();
            spectral_norm(&a, 1e-6) <= bound
        })
        .count();
    assert!(ok >= 995, "only {ok}/1000 under the bound");
}

// Marginal of one fixed pre-rounding coordinate over fresh (matrix,
// direction) draws: centered, variance B^2 / (4 K ln+ B).
#[test]
fn kernel_pre_rounding_coordinate_variance() {
    let (n, m, bound_b, k_const) = (64usize, 8usize, 8u32, 2u32);
    let cfg = KernelConfig::new(k_const, bound_b).unwrap();
    let want = cfg.coordinate_scale() * cfg.coordinate_scale();
    let trials = 100_000u64;
    let vals: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let base = Seed::new(90);
            let inst =
                ChvInstance::sample(m, n, bound_b, 0.5, base.with_stream(2 * t)).unwrap();
            let out = kernel_round(&inst, &cfg, base.with_stream(2 * t + 1)).unwrap();
            out.pre_rounding[7]
        })
        .collect();
    let len = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / len;
    let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / len;
    assert!(mean.abs() <= 0.05 * cfg.coordinate_scale(), "coordinate mean {mean}");
    assert!(
        (var - want).abs() <= 0.03 * want,
        "coordinate variance {var}, want {want} within 3%"
    );
}

#[test]
fn rounding_residual_mean_at_large_bound() {
    let stats = rounding_residual_stats(1_000_000, 1 << 20, 2, Seed::new(15)).unwrap();
    assert!(stats.mean <= 0.26, "squared residual mean {}", stats.mean);
}

// Fixing the pre-rounding point x, a fresh Gaussian row re-orthogonalized
// against x sees the rounded vector as N(0, sigma^2) with
// sigma <= |x - round(x)|.
#[test]
fn rounded_vector_looks_centered_to_conditional_rows() {
    let (n, m, bound_b) = (256usize, 16usize, 16u32);
    let cfg = KernelConfig::new(2, bound_b).unwrap();
    let inst = ChvInstance::sample(m, n, bound_b, 0.5, Seed::new(23)).unwrap();
    let out = kernel_round(&inst, &cfg, Seed::new(23).with_stream(1)).unwrap();
    let pre = &out.pre_rounding;
    let zf: Vec<f64> = out.z.iter().map(|&v| v as f64).collect();
    let pre_norm = norm2(pre);
    let unit: Vec<f64> = pre.iter().map(|v| v / pre_norm).collect();
    let frac_sq: f64 = pre.iter().zip(&zf).map(|(p, z)| (p - z) * (p - z)).sum();

    let draws = 10_000usize;
    let mut sampler = Sampler::new(Seed::new(23).with_stream(2));
    let mut g = vec![0.0; n];
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..draws {
        sampler.fill_standard_normal(&mut g);
        let along = dot(&g, &unit);
        let v: f64 = g
            .iter()
            .zip(&unit)
            .zip(&zf)
            .map(|((gi, ui), zi)| (gi - along * ui) * zi)
            .sum();
        sum += v;
        sum_sq += v * v;
    }
    let mean = sum / draws as f64;
    let var = sum_sq / draws as f64 - mean * mean;
    assert!(
        mean.abs() <= 0.05 * frac_sq.sqrt(),
        "conditional mean {mean}, residual norm {}",
        frac_sq.sqrt()
    );
    assert!(
        var <= 1.05 * frac_sq && var >= 0.85 * frac_sq,
        "conditional variance {var}, squared residual norm {frac_sq}"
    );
}

#[test]
fn determinant_bound_holds_across_band_grid() {
    for r in 2usize..=8 {
        for (j, beta) in [0.1, 0.3, 0.5].into_iter().enumerate() {
            let failures = (0..10_000u64)
                .into_par_iter()
                .filter(|&i| {
                    let seed = Seed::new(55).with_stream(((r as u64 * 3 + j as u64) << 32) | i);
                    let mat = OverlapMatrix::random_in_band(r, beta, seed).unwrap();
                    !determinant_bound_check(&mat).holds
                })
                .count();
            assert_eq!(failures, 0, "counterexamples at r={r} beta={beta}");
        }
    }
}

#[test]
fn covering_radius_holds_at_scale() {
    let summary = covering_sweep(100_000, Seed::new(61));
    assert!(summary.holds(), "{} covering failures", summary.failures);
}

#[test]
fn digest_overflow_never_fires_on_domain_points() {
    let (n, m, bound_b) = (64usize, 8usize, 4u32);
    let overflows: u64 = (0..100u64)
        .into_par_iter()
        .map(|k| {
            let key = keygen(n, m, bound_b, 0.5, Seed::new(70).with_stream(k)).unwrap();
            let mut sampler = Sampler::new(Seed::new(71).with_stream(k));
            let mut count = 0u64;
            for _ in 0..100 {
                let x: Vec<i64> =
                    (0..n).map(|_| sampler.int_range(0, bound_b as i64)).collect();
                if hash(&key, &x).unwrap().is_overflow_zero {
                    count += 1;
                }
            }
            count
        })
        .sum();
    assert_eq!(overflows, 0, "{overflows}/10000 digests overflowed");
}

// At beta = 10 the noise washes out the lattice structure entirely, so
// planted coordinates must be indistinguishable from U[-1/2, 1/2) by a
// Kolmogorov-Smirnov test at the 1% level.
#[test]
fn planted_entries_uniform_at_high_noise() {
    let n = 10_000usize;
    let a = sample_gaussian_matrix(4, n, 1.0, Seed::new(83)).unwrap();
    let sample = sample_planted(&a, 1.0, 10.0, Seed::new(84)).unwrap();
    let mut b = sample.b.clone();
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let len = n as f64;
    let mut d = 0f64;
    for (i, v) in b.iter().enumerate() {
        let f = v + 0.5;
        d = d.max(f - i as f64 / len).max((i + 1) as f64 / len - f);
    }
    assert!(
        d * len.sqrt() < 1.628,
        "KS statistic {d} rejects uniformity at the 1% level"
    );
}

#[test]
fn null_entries_are_centered() {
    let b = sample_null(1_000_000, Seed::new(91));
    let mean = b.iter().sum::<f64>() / b.len() as f64;
    assert!(mean.abs() <= 0.002, "null mean {mean}");
    for v in &b {
        assert!((-0.5..0.5).contains(v));
    }
}

// Feeding the distinguisher two independent null samples must give no
// advantage: both sides accept at the same rate.
#[test]
fn null_only_runs_show_no_advantage() {
    let (n, bound_b) = (128usize, 4u32);
    let mut sampler = Sampler::new(Seed::new(101));
    let x: Vec<i64> = loop {
        let cand: Vec<i64> = (0..n)
            .map(|_| sampler.int_range(-(bound_b as i64), bound_b as i64))
            .collect();
        if cand.iter().any(|&v| v != 0) {
            break cand;
        }
    };
    let trials = 10_000u64;
    let (hits_a, hits_b) = (0..trials)
        .into_par_iter()
        .map(|t| {
            let a = sample_null(n, Seed::new(102).with_stream(1 + 2 * t));
            let b = sample_null(n, Seed::new(102).with_stream(2 + 2 * t));
            (
                distinguish(&a, &x).unwrap() as u64,
                distinguish(&b, &x).unwrap() as u64,
            )
        })
        .reduce(|| (0, 0), |p, q| (p.0 + q.0, p.1 + q.1));
    let advantage = (hits_a as f64 - hits_b as f64).abs() / trials as f64;
    assert!(advantage <= 0.05, "null-only advantage {advantage}");
}

// Median cooled ratio at fixed m falls like 1/sqrt(n): the log-log slope
// across a factor-4 range of n sits near -1/2.
#[test]
fn cooled_ratio_scales_like_inverse_sqrt_n() {
    let cfg = SweepConfig {
        n_grid: vec![2000, 4000, 8000],
        m_grid: vec![50],
        b_grid: vec![1],
        kappa_grid: vec![0.5],
        algorithm: Algorithm::Cool,
        trials: 31,
        base_seed: 20260817,
        k_const: 3,
        timing: false,
        dump_solutions: false,
    };
    let rows = run_sweep(&cfg).unwrap();
    let mut points = Vec::new();
    for &n in &cfg.n_grid {
        let mut ratios: Vec<f64> = rows
            .iter()
            .filter(|r| r.n == n)
            .map(|r| r.achieved_ratio)
            .collect();
        assert_eq!(ratios.len(), 31);
        ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
        points.push(((n as f64).ln(), ratios[15].ln()));
    }
    let xbar = points.iter().map(|p| p.0).sum::<f64>() / 3.0;
    let ybar = points.iter().map(|p| p.1).sum::<f64>() / 3.0;
    let slope = points
        .iter()
        .map(|p| (p.0 - xbar) * (p.1 - ybar))
        .sum::<f64>()
        / points.iter().map(|p| (p.0 - xbar) * (p.0 - xbar)).sum::<f64>();
    assert!((slope + 0.5).abs() <= 0.1, "log-log slope {slope}");
}

// The oracle's count is symmetric under negation, so it is always even,
// and tightening kappa can only lose solutions.
#[test]
fn oracle_counts_are_even_and_monotone() {
    for seed in 0..8u64 {
        let mut prev = 0u64;
        for kappa in [0.1, 0.25, 0.4] {
            let inst = ChvInstance::sample(2, 9, 1, kappa, Seed::new(seed)).unwrap();
            let res = brute_force_best(&inst).unwrap();
            let (_, count) = res.solution_count_at.unwrap();
            assert_eq!(count % 2, 0);
            assert!(count >= prev, "count fell from {prev} to {count}");
            prev = count;
            let ratio = achieved_ratio(&inst, &res.best_x).unwrap();
            assert!((ratio - res.best_ratio).abs() <= 1e-12);
        }
    }
}

// Rows of a witness-planted matrix stay near-Gaussian away from the
// witness direction: the scaled spectral norm keeps the usual bound.
#[test]
fn witness_planting_preserves_spectral_scale() {
    let (n, m, bound_b) = (512usize, 32usize, 4u32);
    let (a, x) = chv::clwe::plant_witness_instance(n, m, bound_b, Seed::new(120)).unwrap();
    assert_eq!(a.rows(), m);
    assert_eq!(a.cols(), n);
    let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
    let img = a.mul_vec(&xf);
    assert!(norm2(&img) <= 1e-8 * norm2(&xf), "witness image norm {}", norm2(&img));
    let bound = (m as f64).sqrt() + 2.0 * (n as f64).sqrt();
    assert!(spectral_norm(&a, 1e-6) <= bound);
    let _: &Mat = &a;
}
