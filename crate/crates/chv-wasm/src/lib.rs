//! Browser bindings for a handful of interactive CHV experiments. Each
//! export returns a JSON string so the demo page can stay framework-free;
//! the heavy lifting happens in the core crate. Size caps keep a misclick
//! from freezing the tab.

use serde_json::json;
use wasm_bindgen::prelude::*;

use chv::kernel::{kernel_round, KernelConfig};
use chv::linalg::norm2;
use chv::online::{build_schedule, track_trajectory_on_matrix};
use chv::thresholds::{kappa_stat, ln_expected_solution_count};
use chv::{achieved_ratio, ChvInstance, Error, Result, Seed};

const MAX_TRAJECTORY_POINTS: usize = 2000;

fn cool_trajectory_json(
    n: u32,
    m: u32,
    bound_b: u32,
    k_const: u32,
    seed: u32,
) -> Result<String> {
    if n > 20_000 || m > 200 {
        return Err(Error::Domain(
            "demo caps: n <= 20000, m <= 200".to_string(),
        ));
    }
    let (n, m) = (n as usize, m as usize);
    let inst = ChvInstance::sample(m, n, bound_b, 0.5, Seed::new(seed as u64))?;
    let schedule = build_schedule(n, m, bound_b, k_const)?;
    let (x, traj) = track_trajectory_on_matrix(&inst.a, &schedule)?;
    let ratio = achieved_ratio(&inst, &x)?;

    let stride = traj.len().div_ceil(MAX_TRAJECTORY_POINTS).max(1);
    let mut points: Vec<(usize, f64, u32)> = traj.iter().copied().step_by(stride).collect();
    if let (Some(&last), Some(&tail)) = (traj.last(), points.last()) {
        if tail.0 != last.0 {
            points.push(last);
        }
    }
    Ok(json!({
        "n": n,
        "m": m,
        "B": bound_b,
        "k_const": k_const,
        "seed": seed,
        "achieved_ratio": ratio,
        "contracting": ratio < inst.kappa,
        "final_norm": traj.last().map(|e| e.1),
        "stages": schedule.stages,
        "trajectory": points
            .iter()
            .map(|&(step, norm, temp)| json!([step, norm, temp]))
            .collect::<Vec<_>>(),
    })
    .to_string())
}

fn threshold_curve_json(m: u32, bound_b: u32, n_min: u32, n_max: u32, points: u32) -> Result<String> {
    if m == 0 || bound_b == 0 {
        return Err(Error::Domain("m and B must be positive".to_string()));
    }
    if !(2..=200).contains(&points) || n_max > 1_000_000 {
        return Err(Error::Domain(
            "demo caps: 2 <= points <= 200, n <= 1e6".to_string(),
        ));
    }
    let lo = (n_min.max(m + 1)) as f64;
    let hi = (n_max as f64).max(lo + 1.0);
    let mut rows = Vec::new();
    let mut last_n = 0usize;
    let mut skipped = 0u32;
    for i in 0..points {
        let t = i as f64 / (points - 1) as f64;
        let n = (lo.ln() + t * (hi.ln() - lo.ln())).exp().round() as usize;
        if n == last_n {
            continue;
        }
        last_n = n;
        // thresholds below f64 range fall off the plot rather than erroring
        let Ok(stat) = kappa_stat(n, m as usize, bound_b) else {
            skipped += 1;
            continue;
        };
        let comp = (m as f64 / n as f64).sqrt() / bound_b as f64;
        rows.push(json!({
            "n": n,
            "alpha": m as f64 / n as f64,
            "kappa_stat_exact": stat.exact,
            "kappa_stat_ref": stat.reference,
            "kappa_comp_ref": comp,
            "log10_count_at_comp": ln_expected_solution_count(n, m as usize, bound_b, comp)
                / std::f64::consts::LN_10,
        }));
    }
    if rows.is_empty() {
        return Err(Error::Domain(
            "every requested point underflows f64; shrink n or raise m".to_string(),
        ));
    }
    Ok(json!({ "m": m, "B": bound_b, "skipped_underflow": skipped, "points": rows }).to_string())
}

fn kernel_demo_json(n: u32, m: u32, bound_b: u32, k_const: u32, seed: u32) -> Result<String> {
    if n > 4096 || m > 128 {
        return Err(Error::Domain("demo caps: n <= 4096, m <= 128".to_string()));
    }
    let (n, m) = (n as usize, m as usize);
    let cfg = KernelConfig::new(k_const, bound_b)?;
    let inst = ChvInstance::sample(m, n, bound_b, 0.5, Seed::new(seed as u64))?;
    let out = kernel_round(&inst, &cfg, Seed::new(seed as u64).with_stream(1))?;
    let ratio = achieved_ratio(&inst, &out.z)?;
    let residual = norm2(&inst.a.mul_vec(&out.pre_rounding)) / norm2(&out.pre_rounding);

    // Histogram of pre-rounding coordinates against the predicted
    // N(0, L^2) marginal; symmetric range, 41 bins.
    let scale = cfg.coordinate_scale();
    let span = 4.0 * scale;
    let bins = 41usize;
    let mut counts = vec![0u32; bins];
    for &v in &out.pre_rounding {
        let idx = ((v + span) / (2.0 * span) * bins as f64).floor();
        counts[(idx.max(0.0) as usize).min(bins - 1)] += 1;
    }
    let nonzero = out.z.iter().filter(|&&v| v != 0).count();
    Ok(json!({
        "n": n,
        "m": m,
        "B": bound_b,
        "k_const": k_const,
        "seed": seed,
        "achieved_ratio": ratio,
        "contracting": ratio < inst.kappa,
        "kernel_residual": residual,
        "attempts": out.attempts,
        "coordinate_scale": scale,
        "nonzero_coordinates": nonzero,
        "histogram": { "lo": -span, "hi": span, "counts": counts },
    })
    .to_string())
}

fn js_err(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Runs the cooled online solver on a seeded Gaussian instance and
/// returns the carry-norm trajectory with stage boundaries.
#[wasm_bindgen]
pub fn cool_trajectory(
    n: u32,
    m: u32,
    bound_b: u32,
    k_const: u32,
    seed: u32,
) -> std::result::Result<String, JsError> {
    cool_trajectory_json(n, m, bound_b, k_const, seed).map_err(js_err)
}

/// Statistical and computational contraction thresholds for fixed (m, B)
/// over a log-spaced range of n.
#[wasm_bindgen]
pub fn threshold_curve(
    m: u32,
    bound_b: u32,
    n_min: u32,
    n_max: u32,
    points: u32,
) -> std::result::Result<String, JsError> {
    threshold_curve_json(m, bound_b, n_min, n_max, points).map_err(js_err)
}

/// One kernel-rounding run: achieved ratio, kernel residual, and the
/// pre-rounding coordinate histogram.
#[wasm_bindgen]
pub fn kernel_demo(
    n: u32,
    m: u32,
    bound_b: u32,
    k_const: u32,
    seed: u32,
) -> std::result::Result<String, JsError> {
    kernel_demo_json(n, m, bound_b, k_const, seed).map_err(js_err)
}

#[wasm_bindgen]
pub fn chv_version() -> String {
    env!("CARGO_PKG_VERSION").to_string()
}
