//! Statistical threshold machinery. The expected number of grid solutions
//! at contraction target kappa is ((2B+1)^n - 1) * Pr[chi2_m <= kappa^2 m];
//! setting it to 1 and solving for kappa gives the statistical threshold,
//! which tracks the reference value (2B+1)^{-n/m} up to the tail-band
//! constants below. Everything is computed in natural-log space because the
//! counts overflow f64 almost immediately.

use crate::error::{Error, Result};
use crate::special::{ln_chi2_cdf, ln_gamma};

/// Lower tail-band constant 2 e^{-1/8} / sqrt(2 pi).
pub const TAIL_C1: f64 = 0.704_130_653_528_599_7;
/// Upper tail-band constant e^{1/2}.
pub const TAIL_C2: f64 = 1.648_721_270_700_128_2;

fn ln_grid_size(n: usize, bound_b: u32) -> f64 {
    // ln((2B+1)^n - 1)
    let ln_full = n as f64 * (2.0 * bound_b as f64 + 1.0).ln();
    if ln_full > 700.0 {
        ln_full
    } else {
        ln_full + (-(-ln_full).exp()).ln_1p()
    }
}

/// ln of the expected solution count; -inf at kappa = 0.
pub fn ln_expected_solution_count(n: usize, m: usize, bound_b: u32, kappa: f64) -> f64 {
    assert!(n >= 1 && m >= 1 && bound_b >= 1);
    assert!(kappa >= 0.0);
    if kappa == 0.0 {
        return f64::NEG_INFINITY;
    }
    ln_grid_size(n, bound_b) + ln_chi2_cdf(m as u32, kappa * kappa * m as f64)
}

/// Expected solution count ((2B+1)^n - 1) * chi2_cdf(m, kappa^2 m),
/// exponentiated only while it fits comfortably in f64 (below 1e300),
/// +inf beyond that.
pub fn expected_solution_count(n: usize, m: usize, bound_b: u32, kappa: f64) -> f64 {
    let l = ln_expected_solution_count(n, m, bound_b, kappa);
    if l < 300.0 * std::f64::consts::LN_10 {
        l.exp()
    } else {
        f64::INFINITY
    }
}

/// The statistical threshold: the root of expected count = 1, with the
/// closed-form reference it is tracking.
#[derive(Clone, Copy, Debug)]
pub struct KappaStat {
    pub exact: f64,
    pub reference: f64,
}

/// Solves expected count = 1 for kappa by bisection on ln kappa to 1e-10,
/// and reports the reference (2B+1)^{-n/m}. Needs n > m so the root lies
/// in (0,1). Fails when the threshold underflows f64 (roughly
/// (n/m) ln(2B+1) > 690); deep but representable roots come from the
/// small-argument expansion of the chi-squared tail, whose error is far
/// below the bisection tolerance once ln kappa < -25.
pub fn kappa_stat(n: usize, m: usize, bound_b: u32) -> Result<KappaStat> {
    assert!(n > m && m >= 1 && bound_b >= 1);
    let ln_ref = -(n as f64 / m as f64) * (2.0 * bound_b as f64 + 1.0).ln();
    if ln_ref < -690.0 {
        return Err(Error::Domain(format!(
            "statistical threshold (2B+1)^(-n/m) underflows f64 at n={n}, m={m}, B={bound_b}; \
             use ln_expected_solution_count directly"
        )));
    }
    let reference = ln_ref.exp();
    // ln P[chi2_m <= t] = (m/2) ln(t/2) - ln Gamma(m/2 + 1) + O(t), so the
    // root of count = 1 is closed-form when t = kappa^2 m is tiny. Bisection
    // cannot reach that regime anyway: t underflows before kappa does.
    let a = m as f64 / 2.0;
    let ln_x = (ln_gamma(a + 1.0) - ln_grid_size(n, bound_b)) / a;
    let u_deep = 0.5 * (ln_x - (a).ln());
    if u_deep <= -25.0 {
        return Ok(KappaStat { exact: u_deep.exp(), reference });
    }
    let f = |u: f64| ln_expected_solution_count(n, m, bound_b, u.exp());
    // bracket the root in log space around the reference
    let mut lo = ln_ref - 2.0;
    let mut hi = (ln_ref + 2.0).min(-1e-12);
    while f(lo) > 0.0 {
        lo -= 2.0;
    }
    while f(hi) < 0.0 && hi < -1e-12 {
        hi = (hi + 2.0).min(-1e-12);
    }
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(KappaStat { exact: (0.5 * (lo + hi)).exp(), reference })
}

/// Chi-squared lower-tail band: Pr[Z <= kappa^2 m]^{1/m} / kappa together
/// with whether it lies in [TAIL_C1, TAIL_C2]. Only meaningful for
/// kappa <= 1/2; larger kappa is rejected.
pub fn tail_bound_check(m: u32, kappa: f64) -> Result<(f64, bool)> {
    if !(kappa > 0.0 && kappa <= 0.5) {
        return Err(Error::domain(format!(
            "tail band is stated for kappa in (0, 1/2], got {kappa}"
        )));
    }
    if m < 1 {
        return Err(Error::domain("m must be at least 1"));
    }
    let ln_p = ln_chi2_cdf(m, kappa * kappa * m as f64);
    let ratio = (ln_p / m as f64).exp() / kappa;
    let in_band = (TAIL_C1..=TAIL_C2).contains(&ratio);
    Ok((ratio, in_band))
}

/// One threshold evaluation: the exact and reference thresholds for
/// (n, m, B) plus the expected count at the supplied kappa.
#[derive(Clone, Copy, Debug)]
pub struct ThresholdReport {
    pub kappa_stat: KappaStat,
    pub expected_count: f64,
    pub log10_expected_count: f64,
    pub n: usize,
    pub m: usize,
    pub bound_b: u32,
    pub kappa: f64,
}

pub fn threshold_report(n: usize, m: usize, bound_b: u32, kappa: f64) -> Result<ThresholdReport> {
    let ks = kappa_stat(n, m, bound_b)?;
    let ln_count = ln_expected_solution_count(n, m, bound_b, kappa);
    Ok(ThresholdReport {
        kappa_stat: ks,
        expected_count: expected_solution_count(n, m, bound_b, kappa),
        log10_expected_count: ln_count / std::f64::consts::LN_10,
        n,
        m,
        bound_b,
        kappa,
    })
}
