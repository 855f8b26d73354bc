//! Exhaustive reference oracle. Enumerates the grid up to global sign
//! (first nonzero entry positive), maintaining A*x and ||x||^2
//! incrementally so a visit costs O(m). The scan recomputes A*x from
//! scratch periodically, and any comparison that lands within a relative
//! band of the strict-inequality threshold is redone with compensated
//! summation before it decides anything. Counts include both x and -x.

use crate::error::{Error, Result};
use crate::instance::{achieved_ratio, ChvInstance};
use crate::linalg::neumaier_dot;

const SIZE_LIMIT: f64 = 2e8;
const REFRESH_INTERVAL: u64 = 4096;
const BOUNDARY_BAND: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct OracleResult {
    pub best_x: Vec<i64>,
    pub best_ratio: f64,
    /// (kappa, exact solution count at that kappa), when counting ran.
    pub solution_count_at: Option<(f64, u64)>,
}

fn guard_size(inst: &ChvInstance) -> Result<()> {
    let states = (inst.n as f64) * (2.0 * inst.bound_b as f64 + 1.0).ln();
    if states > SIZE_LIMIT.ln() {
        return Err(Error::SizeGuard(format!(
            "(2B+1)^n = ({})^{} exceeds the enumeration limit {:.0e}",
            2 * inst.bound_b + 1,
            inst.n,
            SIZE_LIMIT
        )));
    }
    Ok(())
}

/// One full canonical-half scan; returns the minimizer (with its
/// compensated squared image norm) and the solution count at inst.kappa.
struct Scan<'a> {
    inst: &'a ChvInstance,
    x: Vec<i64>,
    xf: Vec<f64>,
    ax: Vec<f64>,
    sum_sq: i64,
    visits: u64,
    half_count: u64,
    best: Option<Best>,
    kappa_sq_m: f64,
}

struct Best {
    x: Vec<i64>,
    /// ||Ax||^2 recomputed with compensated summation.
    num_exact: f64,
    sum_sq: i64,
}

impl<'a> Scan<'a> {
    fn new(inst: &'a ChvInstance) -> Self {
        Scan {
            inst,
            x: vec![0; inst.n],
            xf: vec![0.0; inst.n],
            ax: vec![0.0; inst.m],
            sum_sq: 0,
            visits: 0,
            half_count: 0,
            best: None,
            kappa_sq_m: inst.kappa * inst.kappa * inst.m as f64,
        }
    }

    fn set_digit(&mut self, j: usize, v: i64) {
        let old = self.x[j];
        if old == v {
            return;
        }
        let delta = (v - old) as f64;
        for (axi, row) in self.ax.iter_mut().zip(0..self.inst.m) {
            *axi += delta * self.inst.a.get(row, j);
        }
        self.sum_sq += v * v - old * old;
        self.x[j] = v;
        self.xf[j] = v as f64;
    }

    fn refresh(&mut self) {
        for i in 0..self.inst.m {
            self.ax[i] = neumaier_dot(self.inst.a.row(i), &self.xf);
        }
        self.sum_sq = self.x.iter().map(|&v| v * v).sum();
    }

    fn image_norm_sq_exact(&self) -> f64 {
        (0..self.inst.m)
            .map(|i| {
                let v = neumaier_dot(self.inst.a.row(i), &self.xf);
                v * v
            })
            .sum()
    }

    fn visit(&mut self) {
        self.visits += 1;
        if self.visits % REFRESH_INTERVAL == 0 {
            self.refresh();
        }
        let num: f64 = self.ax.iter().map(|v| v * v).sum();
        let thresh = self.kappa_sq_m * self.sum_sq as f64;

        // solution test: ||Ax||^2 < kappa^2 m ||x||^2, strict
        let margin = BOUNDARY_BAND * thresh.max(num).max(1e-300);
        if (num - thresh).abs() <= margin {
            if self.image_norm_sq_exact() < thresh {
                self.half_count += 1;
            }
        } else if num < thresh {
            self.half_count += 1;
        }

        // minimizer tracking with the same recompute-on-contact discipline
        let contend = match &self.best {
            None => true,
            Some(b) => {
                num * b.sum_sq as f64
                    <= b.num_exact * self.sum_sq as f64 * (1.0 + BOUNDARY_BAND)
            }
        };
        if contend {
            let num_exact = self.image_norm_sq_exact();
            let replace = match &self.best {
                None => true,
                Some(b) => {
                    let lhs = num_exact * b.sum_sq as f64;
                    let rhs = b.num_exact * self.sum_sq as f64;
                    lhs < rhs || (lhs == rhs && self.x < b.x)
                }
            };
            if replace {
                self.best = Some(Best {
                    x: self.x.clone(),
                    num_exact,
                    sum_sq: self.sum_sq,
                });
            }
        }
    }

    /// Mixed-radix walk over all x whose first nonzero entry sits at
    /// position p and is positive, suffix digits covering [-B, B].
    fn run_prefix(&mut self, p: usize) {
        let n = self.inst.n;
        let b = self.inst.bound_b as i64;
        for j in 0..p {
            self.set_digit(j, 0);
        }
        self.set_digit(p, 1);
        for j in p + 1..n {
            self.set_digit(j, -b);
        }
        loop {
            self.visit();
            let mut j = n - 1;
            loop {
                if j == p {
                    if self.x[p] < b {
                        let v = self.x[p] + 1;
                        self.set_digit(p, v);
                        break;
                    }
                    return;
                }
                if self.x[j] < b {
                    let v = self.x[j] + 1;
                    self.set_digit(j, v);
                    break;
                }
                self.set_digit(j, -b);
                j -= 1;
            }
        }
    }

    fn run(mut self) -> (Vec<i64>, u64) {
        for p in 0..self.inst.n {
            self.run_prefix(p);
        }
        let best = self.best.expect("nonempty grid always yields a minimizer");
        (best.x, 2 * self.half_count)
    }
}

/// Exact minimizer of the achieved ratio over the nonzero grid, up to
/// global sign, with the solution count at the instance's own kappa.
/// Refuses grids larger than 2e8 points.
pub fn brute_force_best(inst: &ChvInstance) -> Result<OracleResult> {
    guard_size(inst)?;
    let (best_x, count) = Scan::new(inst).run();
    let best_ratio = achieved_ratio(inst, &best_x)?;
    Ok(OracleResult {
        best_x,
        best_ratio,
        solution_count_at: Some((inst.kappa, count)),
    })
}

/// Exact number of grid solutions (x and -x counted separately) at the
/// instance's kappa. Same size guard as brute_force_best.
pub fn count_solutions(inst: &ChvInstance) -> Result<u64> {
    guard_size(inst)?;
    let (_, count) = Scan::new(inst).run();
    Ok(count)
}
