//! Streaming norm-minimizing solver. Columns of A arrive one at a time; at
//! each step the solver commits to a signed multiple of the current stage
//! temperature, whichever sign leaves the running sum y shorter. A cooling
//! schedule halves the temperature from the largest power of two below B
//! down to 1, so late low-temperature steps repair the damage early
//! high-temperature steps can do.

use crate::error::{Error, Result};
use crate::linalg::{norm2, Mat};

/// Cooling schedule: ordered (temperature, step count) stages whose step
/// counts sum to n. Temperatures halve stage to stage and end at 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoolSchedule {
    pub stages: Vec<(u32, usize)>,
    pub k_const: u32,
}

impl CoolSchedule {
    /// Total step count (the stream length n this schedule expects).
    pub fn total_steps(&self) -> usize {
        self.stages.iter().map(|&(_, s)| s).sum()
    }

    /// Exact squared output norm the schedule forces: sum of temp^2 * steps.
    pub fn output_norm_sq(&self) -> f64 {
        self.stages
            .iter()
            .map(|&(b, s)| (b as f64) * (b as f64) * s as f64)
            .sum()
    }
}

/// Running solver state: y = sum of chosen signed columns, the step index,
/// and the cached norm of y.
#[derive(Clone, Debug)]
pub struct CoolState {
    pub y: Vec<f64>,
    pub t: usize,
    pub l: f64,
}

impl CoolState {
    pub fn new(m: usize) -> Self {
        CoolState { y: vec![0.0; m], t: 0, l: 0.0 }
    }
}

/// Largest power of two at most b.
fn effective_temp(b: u32) -> u32 {
    1 << b.ilog2()
}

/// Builds the stage list for stream length n: the first stage runs at
/// B' = 2^floor(log2 b_max) for n - K*m*log2(B') steps, then each halving
/// down to 1 gets exactly K*m steps. Infeasible when the tail stages alone
/// would need n or more steps.
pub fn build_schedule(n: usize, m: usize, b_max: u32, k_const: u32) -> Result<CoolSchedule> {
    assert!(m >= 1 && b_max >= 1 && k_const >= 1);
    let b_eff = effective_temp(b_max);
    let halvings = b_eff.ilog2() as usize;
    let tail = k_const as usize * m * halvings;
    if n <= tail {
        return Err(Error::InfeasibleSchedule(format!(
            "n = {n} must exceed K*m*log2(B') = {tail} (B' = {b_eff})"
        )));
    }
    let mut stages = Vec::with_capacity(halvings + 1);
    stages.push((b_eff, n - tail));
    let mut b = b_eff;
    while b > 1 {
        b /= 2;
        stages.push((b, k_const as usize * m));
    }
    Ok(CoolSchedule { stages, k_const })
}

/// One solver step: add either +temp or -temp times the column to y,
/// keeping the shorter result. Ties go to +temp. Returns the chosen signed
/// coefficient.
pub fn cool_step(state: &mut CoolState, column: &[f64], temp: u32) -> i64 {
    debug_assert_eq!(column.len(), state.y.len());
    let b = temp as f64;
    let mut norm_plus_sq = 0.0;
    let mut norm_minus_sq = 0.0;
    for (&yi, &ai) in state.y.iter().zip(column) {
        let p = yi + b * ai;
        let m = yi - b * ai;
        norm_plus_sq += p * p;
        norm_minus_sq += m * m;
    }
    let chosen: i64 = if norm_plus_sq <= norm_minus_sq {
        temp as i64
    } else {
        -(temp as i64)
    };
    let s = chosen as f64;
    for (yi, &ai) in state.y.iter_mut().zip(column) {
        *yi += s * ai;
    }
    state.t += 1;
    state.l = norm2(&state.y);
    chosen
}

fn run_inner<I>(
    mut columns: I,
    schedule: &CoolSchedule,
    mut record: impl FnMut(&CoolState, u32),
) -> Result<Vec<i64>>
where
    I: Iterator<Item = Vec<f64>>,
{
    let n = schedule.total_steps();
    let mut x = Vec::with_capacity(n);
    let mut state: Option<CoolState> = None;
    for &(temp, steps) in &schedule.stages {
        for _ in 0..steps {
            let col = columns.next().ok_or_else(|| {
                Error::domain(format!("column stream ended early (expected {n} columns)"))
            })?;
            let st = match &mut state {
                Some(st) => {
                    if col.len() != st.y.len() {
                        return Err(Error::domain("column length changed mid-stream"));
                    }
                    st
                }
                None => {
                    let st = CoolState::new(col.len());
                    record(&st, temp);
                    state.insert(st)
                }
            };
            x.push(cool_step(st, &col, temp));
            record(st, temp);
        }
    }
    if columns.next().is_some() {
        return Err(Error::domain(format!(
            "column stream longer than the scheduled {n} steps"
        )));
    }
    Ok(x)
}

/// Runs the full schedule over a column stream and returns the emitted
/// grid vector. The stream must yield exactly `schedule.total_steps()`
/// columns of equal length.
pub fn run_cool<I>(columns: I, schedule: &CoolSchedule) -> Result<Vec<i64>>
where
    I: IntoIterator<Item = Vec<f64>>,
{
    run_inner(columns.into_iter(), schedule, |_, _| {})
}

/// As run_cool, but records (t, ||y_t||, temperature) per step, including
/// the zero initial state; the trajectory has n + 1 records.
pub fn track_trajectory<I>(
    columns: I,
    schedule: &CoolSchedule,
) -> Result<(Vec<i64>, Vec<(usize, f64, u32)>)>
where
    I: IntoIterator<Item = Vec<f64>>,
{
    let mut traj = Vec::with_capacity(schedule.total_steps() + 1);
    let x = run_inner(columns.into_iter(), schedule, |st, temp| {
        traj.push((st.t, st.l, temp));
    })?;
    Ok((x, traj))
}

/// Convenience wrapper: streams the columns of an in-memory matrix.
pub fn run_cool_on_matrix(a: &Mat, schedule: &CoolSchedule) -> Result<Vec<i64>> {
    run_cool((0..a.cols()).map(|j| a.col(j)), schedule)
}

/// Trajectory wrapper for an in-memory matrix.
pub fn track_trajectory_on_matrix(
    a: &Mat,
    schedule: &CoolSchedule,
) -> Result<(Vec<i64>, Vec<(usize, f64, u32)>)> {
    track_trajectory((0..a.cols()).map(|j| a.col(j)), schedule)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::sample_gaussian_matrix;
    use crate::linalg::dot;
    use crate::rng::{Sampler, Seed};

    #[test]
    fn schedule_examples() {
        let s = build_schedule(1000, 10, 4, 3).unwrap();
        assert_eq!(s.stages, vec![(4, 940), (2, 30), (1, 30)]);
        let s = build_schedule(100, 10, 1, 3).unwrap();
        assert_eq!(s.stages, vec![(1, 100)]);
        assert!(matches!(
            build_schedule(50, 10, 4, 3),
            Err(Error::InfeasibleSchedule(_))
        ));
    }

    #[test]
    fn schedule_handles_non_power_of_two() {
        // B = 5 runs at B' = 4
        let s = build_schedule(1000, 10, 5, 3).unwrap();
        assert_eq!(s.stages[0].0, 4);
        assert_eq!(s.total_steps(), 1000);
    }

    #[test]
    fn schedule_steps_sum_and_halve() {
        for (n, m, b, k) in [(5000usize, 50usize, 16u32, 3u32), (1000, 10, 4, 3), (700, 7, 8, 2)] {
            let s = build_schedule(n, m, b, k).unwrap();
            assert_eq!(s.total_steps(), n);
            for w in s.stages.windows(2) {
                assert_eq!(w[0].0, 2 * w[1].0);
                assert_eq!(w[1].1, k as usize * m);
            }
            assert_eq!(s.stages.last().unwrap().0, 1);
        }
    }

    #[test]
    fn step_tie_at_origin_goes_positive() {
        let mut st = CoolState::new(2);
        let chosen = cool_step(&mut st, &[1.0, 2.0], 3);
        assert_eq!(chosen, 3);
        assert_eq!(st.y, vec![3.0, 6.0]);
    }

    #[test]
    fn step_cancels_aligned_state() {
        let mut st = CoolState { y: vec![10.0, 0.0], t: 0, l: 10.0 };
        let chosen = cool_step(&mut st, &[1.0, 0.0], 1);
        assert_eq!(chosen, -1);
        assert_eq!(st.y, vec![9.0, 0.0]);
        assert_eq!(st.l, 9.0);
    }

    #[test]
    fn step_satisfies_pythagorean_decomposition() {
        let mut sampler = Sampler::new(Seed::new(5));
        for _ in 0..200 {
            let m = 8;
            let y: Vec<f64> = (0..m).map(|_| 3.0 * sampler.standard_normal()).collect();
            let a: Vec<f64> = (0..m).map(|_| sampler.standard_normal()).collect();
            let l = norm2(&y);
            let temp = 2u32;
            let mut st = CoolState { y: y.clone(), t: 0, l };
            cool_step(&mut st, &a, temp);
            let b = temp as f64;
            let a_par = dot(&a, &y) / l;
            let a_perp_sq = dot(&a, &a) - a_par * a_par;
            let expect_sq = (l - b * a_par.abs()).powi(2) + b * b * a_perp_sq;
            let got_sq = st.l * st.l;
            assert!(
                (got_sq - expect_sq).abs() <= 1e-9 * expect_sq.max(1.0),
                "{got_sq} vs {expect_sq}"
            );
        }
    }

    #[test]
    fn step_is_per_step_optimal() {
        let a = sample_gaussian_matrix(6, 300, 1.0, Seed::new(77)).unwrap();
        let schedule = build_schedule(300, 6, 4, 3).unwrap();
        let mut st = CoolState::new(6);
        let mut j = 0;
        for &(temp, steps) in &schedule.stages {
            for _ in 0..steps {
                let col = a.col(j);
                let prev = st.y.clone();
                let chosen = cool_step(&mut st, &col, temp);
                let b = chosen as f64;
                let other: f64 = prev
                    .iter()
                    .zip(&col)
                    .map(|(&yi, &ai)| (yi - b * ai) * (yi - b * ai))
                    .sum();
                assert!(st.l * st.l <= other, "step {j} chose the longer branch");
                j += 1;
            }
        }
    }

    #[test]
    fn run_emits_stage_temperatures_and_exact_norm() {
        let a = sample_gaussian_matrix(10, 1000, 1.0, Seed::new(9)).unwrap();
        let schedule = build_schedule(1000, 10, 4, 3).unwrap();
        let x = run_cool_on_matrix(&a, &schedule).unwrap();
        assert_eq!(x.len(), 1000);
        let mut j = 0;
        for &(temp, steps) in &schedule.stages {
            for _ in 0..steps {
                assert_eq!(x[j].unsigned_abs() as u32, temp);
                j += 1;
            }
        }
        let norm_sq: i64 = x.iter().map(|&v| v * v).sum();
        assert_eq!(norm_sq, 16 * 940 + 4 * 30 + 30);
        assert_eq!(norm_sq as f64, schedule.output_norm_sq());
    }

    #[test]
    fn single_stage_run_is_all_plus_minus_one() {
        let a = sample_gaussian_matrix(5, 64, 1.0, Seed::new(4)).unwrap();
        let schedule = build_schedule(64, 5, 1, 3).unwrap();
        let x = run_cool_on_matrix(&a, &schedule).unwrap();
        assert!(x.iter().all(|&v| v == 1 || v == -1));
        let norm_sq: i64 = x.iter().map(|&v| v * v).sum();
        assert_eq!(norm_sq, 64);
    }

    #[test]
    fn run_rejects_wrong_stream_length() {
        let a = sample_gaussian_matrix(5, 64, 1.0, Seed::new(4)).unwrap();
        let schedule = build_schedule(64, 5, 1, 3).unwrap();
        let short = (0..63).map(|j| a.col(j));
        assert!(run_cool(short, &schedule).is_err());
        let long = (0..64).map(|j| a.col(j)).chain(std::iter::once(a.col(0)));
        assert!(run_cool(long, &schedule).is_err());
    }

    #[test]
    fn trajectory_shape() {
        let a = sample_gaussian_matrix(5, 200, 1.0, Seed::new(12)).unwrap();
        let schedule = build_schedule(200, 5, 2, 3).unwrap();
        let (x, traj) = track_trajectory_on_matrix(&a, &schedule).unwrap();
        assert_eq!(x.len(), 200);
        assert_eq!(traj.len(), 201);
        assert_eq!(traj[0], (0, 0.0, 2));
        for (i, &(t, l, _)) in traj.iter().enumerate() {
            assert_eq!(t, i);
            assert!(l >= 0.0);
        }
        // cached norms stay honest against a recomputation
        let (_, traj2) = track_trajectory_on_matrix(&a, &schedule).unwrap();
        assert_eq!(traj, traj2);
    }

    #[test]
    fn drift_is_negative_above_two_bm() {
        let m = 10;
        let b = 1u32;
        let floor = 2.0 * b as f64 * m as f64;
        let mut sampler = Sampler::new(Seed::new(31));
        let mut st = CoolState::new(m);
        // start well above the drift floor
        let dir: Vec<f64> = (0..m).map(|_| sampler.standard_normal()).collect();
        let scale = 2.5 * floor / norm2(&dir);
        st.y = dir.iter().map(|v| v * scale).collect();
        st.l = norm2(&st.y);
        let mut total = 0.0;
        let mut used = 0usize;
        for _ in 0..10_000 {
            if st.l < floor {
                let dir: Vec<f64> = (0..m).map(|_| sampler.standard_normal()).collect();
                let scale = 1.25 * floor / norm2(&dir);
                st.y = dir.iter().map(|v| v * scale).collect();
                st.l = norm2(&st.y);
            }
            let before = st.l;
            let col: Vec<f64> = (0..m).map(|_| sampler.standard_normal()).collect();
            cool_step(&mut st, &col, b);
            total += (st.l - before) / b as f64;
            used += 1;
        }
        let mean = total / used as f64;
        assert!(mean <= -0.1, "mean drift {mean}");
    }
}
