use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use chv::clwe::reduction_demo;
use chv::kernel::{kernel_round, KernelConfig};
use chv::linalg::norm2;
use chv::lsh::{
    check_non_expansion, compression_margin, deserialize_key, distortion_report, hash, keygen,
    reduce_contraction_to_chv, serialize_digest, serialize_key, HashKey, ReductionOutcome,
};
use chv::matio::{read_matrix, write_matrix};
use chv::online::{build_schedule, run_cool_on_matrix, track_trajectory_on_matrix, CoolSchedule};
use chv::oracle::brute_force_best;
use chv::sweep::{rows_to_csv, run_sweep, SweepConfig};
use chv::theory::run_all_theory_sweeps;
use chv::thresholds::{kappa_stat, threshold_report};
use chv::{achieved_ratio, ChvInstance, Error, Result, Seed};

#[derive(Parser)]
#[command(name = "chv", version, about = "Contracting hypergrid vector laboratory")]
struct Cli {
    /// Base seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Worker thread count (defaults to all cores). Output bytes do not
    /// depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the streaming cooled solver on a sampled or loaded instance.
    SolveCool {
        #[arg(long, conflicts_with = "matrix")]
        n: Option<usize>,
        #[arg(long, conflicts_with = "matrix")]
        m: Option<usize>,
        #[arg(long = "B")]
        bound_b: u32,
        #[arg(long, default_value_t = 3)]
        k_const: u32,
        #[arg(long, default_value_t = 0.5)]
        kappa: f64,
        /// Load the instance matrix from a matrix file.
        #[arg(long)]
        matrix: Option<PathBuf>,
        /// Save the instance matrix used to a matrix file.
        #[arg(long)]
        save_matrix: Option<PathBuf>,
    },
    /// Round a scaled Gaussian kernel vector to the grid.
    SolveKernel {
        #[arg(long, conflicts_with = "matrix")]
        n: Option<usize>,
        #[arg(long, conflicts_with = "matrix")]
        m: Option<usize>,
        #[arg(long = "B")]
        bound_b: u32,
        #[arg(long, default_value_t = 2)]
        k_const: u32,
        #[arg(long, default_value_t = 0.5)]
        kappa: f64,
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[arg(long)]
        save_matrix: Option<PathBuf>,
    },
    /// Exhaustive search for the best grid vector (small instances only).
    BruteForce {
        #[arg(long, conflicts_with = "matrix")]
        n: Option<usize>,
        #[arg(long, conflicts_with = "matrix")]
        m: Option<usize>,
        #[arg(long = "B")]
        bound_b: u32,
        #[arg(long, default_value_t = 0.5)]
        kappa: f64,
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[arg(long)]
        save_matrix: Option<PathBuf>,
    },
    /// Statistical threshold report for given dimensions.
    Threshold {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long = "B")]
        bound_b: u32,
        /// Count solutions at this kappa (default: at the exact root).
        #[arg(long)]
        kappa: Option<f64>,
    },
    /// Run a seeded parameter sweep from a config file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Measure wall time per row (makes output nondeterministic).
        #[arg(long)]
        timing: bool,
        /// Append each row's solution vector as a final column.
        #[arg(long)]
        dump_solutions: bool,
    },
    /// Emit the per-step norm trace of the cooled solver.
    Trajectory {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long = "B", required_unless_present = "fixed_temp")]
        bound_b: Option<u32>,
        #[arg(long, default_value_t = 3)]
        k_const: u32,
        /// Run all n steps at this single temperature instead of cooling.
        #[arg(long)]
        fixed_temp: Option<u32>,
    },
    /// Sample a hash key and write it to a key file.
    LshKeygen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long = "B")]
        bound_b: u32,
        #[arg(long)]
        kappa: f64,
        #[arg(long)]
        key_out: PathBuf,
    },
    /// Hash a nonnegative grid vector under a stored key.
    LshHash {
        #[arg(long)]
        key: PathBuf,
        /// Input vector, comma or space separated integers.
        #[arg(long)]
        x: String,
        /// Also write the digest in its binary form.
        #[arg(long)]
        digest_out: Option<PathBuf>,
    },
    /// Verify hash guarantees: reduce a pair (with --y/--z) or check the
    /// non-expansion certificate and compression margin.
    LshVerify {
        #[arg(long)]
        key: PathBuf,
        #[arg(long, requires = "z")]
        y: Option<String>,
        #[arg(long, requires = "y")]
        z: Option<String>,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
    },
    /// Distinguisher arithmetic demo against a synthetic planted witness.
    ClweDemo {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long = "B")]
        bound_b: u32,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long, default_value_t = 1e-6)]
        beta: f64,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
    },
    /// Randomized sweeps over every finite theory claim.
    TheoryChecks {
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn join_i64(v: &[i64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn parse_int_list(s: &str) -> Result<Vec<i64>> {
    let v: Vec<i64> = s
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.parse::<i64>()
                .map_err(|_| Error::Config(format!("bad integer {p:?} in vector argument")))
        })
        .collect::<Result<_>>()?;
    if v.is_empty() {
        return Err(Error::Config("empty vector argument".into()));
    }
    Ok(v)
}

/// Resolves a solve-style instance: sampled from (n, m) on stream 0 of the
/// base seed, or loaded from a matrix file.
fn resolve_instance(
    n: Option<usize>,
    m: Option<usize>,
    bound_b: u32,
    kappa: f64,
    matrix: &Option<PathBuf>,
    save_matrix: &Option<PathBuf>,
    seed: u64,
) -> Result<(ChvInstance, bool)> {
    let (inst, seeded) = match matrix {
        Some(path) => {
            let file = read_matrix(path)?;
            (ChvInstance::new(file.mat, bound_b, kappa)?, file.seeded)
        }
        None => {
            let (n, m) = match (n, m) {
                (Some(n), Some(m)) => (n, m),
                _ => {
                    return Err(Error::Config(
                        "pass both --n and --m, or --matrix".into(),
                    ))
                }
            };
            (ChvInstance::sample(m, n, bound_b, kappa, Seed::new(seed))?, true)
        }
    };
    if let Some(path) = save_matrix {
        write_matrix(path, &inst.a, seeded)?;
    }
    Ok((inst, seeded))
}

fn load_key(path: &Path) -> Result<HashKey> {
    deserialize_key(&std::fs::read(path)?)
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.cmd {
        Cmd::SolveCool { n, m, bound_b, k_const, kappa, matrix, save_matrix } => {
            let (inst, _) =
                resolve_instance(*n, *m, *bound_b, *kappa, matrix, save_matrix, cli.seed)?;
            let schedule = build_schedule(inst.n, inst.m, *bound_b, *k_const)?;
            let x = run_cool_on_matrix(&inst.a, &schedule)?;
            let ratio = achieved_ratio(&inst, &x)?;
            let text = match cli.format {
                Format::Csv => format!(
                    "n,m,B,kappa,k_const,seed,achieved_ratio,contracting,solution\n{},{},{},{},{},{},{},{},{}\n",
                    inst.n, inst.m, bound_b, kappa, k_const, cli.seed, ratio,
                    ratio < *kappa, join_i64(&x)
                ),
                Format::Json => format!(
                    "{}\n",
                    json!({
                        "n": inst.n, "m": inst.m, "B": bound_b, "kappa": kappa,
                        "k_const": k_const, "seed": cli.seed,
                        "achieved_ratio": ratio, "contracting": ratio < *kappa,
                        "solution": x,
                    })
                ),
            };
            emit(&cli.out, &text)
        }
        Cmd::SolveKernel { n, m, bound_b, k_const, kappa, matrix, save_matrix } => {
            let (inst, _) =
                resolve_instance(*n, *m, *bound_b, *kappa, matrix, save_matrix, cli.seed)?;
            let cfg = KernelConfig::new(*k_const, *bound_b)?;
            let out = kernel_round(&inst, &cfg, Seed::new(cli.seed).with_stream(1))?;
            let residual = norm2(&inst.a.mul_vec(&out.pre_rounding)) / norm2(&out.pre_rounding);
            let ratio = achieved_ratio(&inst, &out.z)?;
            let text = match cli.format {
                Format::Csv => format!(
                    "n,m,B,kappa,k_const,seed,attempts,kernel_residual,achieved_ratio,contracting,solution\n{},{},{},{},{},{},{},{},{},{},{}\n",
                    inst.n, inst.m, bound_b, kappa, k_const, cli.seed, out.attempts,
                    residual, ratio, ratio < *kappa, join_i64(&out.z)
                ),
                Format::Json => format!(
                    "{}\n",
                    json!({
                        "n": inst.n, "m": inst.m, "B": bound_b, "kappa": kappa,
                        "k_const": k_const, "seed": cli.seed, "attempts": out.attempts,
                        "kernel_residual": residual, "achieved_ratio": ratio,
                        "contracting": ratio < *kappa, "solution": out.z,
                    })
                ),
            };
            emit(&cli.out, &text)
        }
        Cmd::BruteForce { n, m, bound_b, kappa, matrix, save_matrix } => {
            let (inst, _) =
                resolve_instance(*n, *m, *bound_b, *kappa, matrix, save_matrix, cli.seed)?;
            let result = brute_force_best(&inst)?;
            let count = result.solution_count_at.map(|(_, c)| c).unwrap_or(0);
            let text = match cli.format {
                Format::Csv => format!(
                    "n,m,B,kappa,seed,best_ratio,solution_count,solution\n{},{},{},{},{},{},{},{}\n",
                    inst.n, inst.m, bound_b, kappa, cli.seed, result.best_ratio,
                    count, join_i64(&result.best_x)
                ),
                Format::Json => format!(
                    "{}\n",
                    json!({
                        "n": inst.n, "m": inst.m, "B": bound_b, "kappa": kappa,
                        "seed": cli.seed, "best_ratio": result.best_ratio,
                        "solution_count": count, "solution": result.best_x,
                    })
                ),
            };
            emit(&cli.out, &text)
        }
        Cmd::Threshold { n, m, bound_b, kappa } => {
            let stat = kappa_stat(*n, *m, *bound_b)?;
            let at = kappa.unwrap_or(stat.exact);
            let report = threshold_report(*n, *m, *bound_b, at)?;
            let text = match cli.format {
                Format::Csv => format!(
                    "n,m,B,kappa,kappa_stat_ref,kappa_stat_exact,log10_expected_count\n{},{},{},{},{},{},{}\n",
                    n, m, bound_b, at, stat.reference, stat.exact,
                    report.log10_expected_count
                ),
                Format::Json => format!(
                    "{}\n",
                    json!({
                        "n": n, "m": m, "B": bound_b, "kappa": at,
                        "kappa_stat_ref": stat.reference, "kappa_stat_exact": stat.exact,
                        "log10_expected_count": report.log10_expected_count,
                    })
                ),
            };
            emit(&cli.out, &text)
        }
        Cmd::Sweep { config, timing, dump_solutions } => {
            let text = std::fs::read_to_string(config)?;
            let mut cfg = SweepConfig::parse(&text)?;
            cfg.base_seed = if cli.seed != 0 { cli.seed } else { cfg.base_seed };
            cfg.timing |= timing;
            cfg.dump_solutions |= dump_solutions;
            let rows = run_sweep(&cfg)?;
            let text = match cli.format {
                Format::Csv => rows_to_csv(&rows, cfg.dump_solutions),
                Format::Json => {
                    let objs: Vec<_> = rows
                        .iter()
                        .map(|r| {
                            json!({
                                "n": r.n, "m": r.m, "B": r.bound_b, "kappa": r.kappa,
                                "algorithm": r.algorithm.to_string(), "trial": r.trial,
                                "stream": r.stream, "achieved_ratio": r.achieved_ratio,
                                "wall_time_ms": r.wall_time_ms,
                                "kappa_stat_ref": r.kappa_stat_ref,
                                "kappa_comp_ref": r.kappa_comp_ref,
                                "solution": if cfg.dump_solutions {
                                    json!(r.solution)
                                } else {
                                    json!(null)
                                },
                            })
                        })
                        .collect();
                    format!("{}\n", json!(objs))
                }
            };
            emit(&cli.out, &text)
        }
        Cmd::Trajectory { n, m, bound_b, k_const, fixed_temp } => {
            let schedule = match fixed_temp {
                Some(temp) => {
                    if *temp < 1 {
                        return Err(Error::Config("fixed temperature must be >= 1".into()));
                    }
                    CoolSchedule { stages: vec![(*temp, *n)], k_const: *k_const }
                }
                None => build_schedule(*n, *m, bound_b.expect("clap enforces --B"), *k_const)?,
            };
            let inst = ChvInstance::sample(*m, *n, 1, 0.5, Seed::new(cli.seed))?;
            let (_, trace) = track_trajectory_on_matrix(&inst.a, &schedule)?;
            let text = match cli.format {
                Format::Csv => {
                    let mut s = String::from("step,norm,temp\n");
                    for (step, norm, temp) in &trace {
                        s.push_str(&format!("{step},{norm},{temp}\n"));
                    }
                    s
                }
                Format::Json => {
                    let objs: Vec<_> = trace
                        .iter()
                        .map(|(step, norm, temp)| {
                            json!({"step": step, "norm": norm, "temp": temp})
                        })
                        .collect();
                    format!("{}\n", json!(objs))
                }
            };
            emit(&cli.out, &text)
        }
        Cmd::LshKeygen { n, m, bound_b, kappa, key_out } => {
            let key = keygen(*n, *m, *bound_b, *kappa, Seed::new(cli.seed))?;
            std::fs::write(key_out, serialize_key(&key))?;
            let margin = compression_margin(*n, *m, *bound_b, *kappa);
            if margin <= 0.0 {
                eprintln!(
                    "warning: compression margin {margin:.2} bits is not positive; \
                     the counting argument does not certify compression at these parameters"
                );
            }
            let d = distortion_report(*n, *m, *kappa);
            let text = match cli.format {
                Format::Csv => format!(
                    "n,m,B,kappa,gamma,r_ball,compression_margin,alpha,beta,xi\n{},{},{},{},{},{},{},{},{},{}\n",
                    n, m, bound_b, kappa, key.gamma, key.r_ball, margin, d.alpha, d.beta, d.xi
                ),
                Format::Json => format!(
                    "{}\n",
                    json!({
                        "n": n, "m": m, "B": bound_b, "kappa": kappa,
                        "gamma": key.gamma, "r_ball": key.r_ball,
                        "compression_margin": margin,
                        "alpha": d.alpha, "beta": d.beta, "xi": d.xi,
                    })
                ),
            };
            emit(&cli.out, &text)
        }
        Cmd::LshHash { key, x, digest_out } => {
            let key = load_key(key)?;
            let x = parse_int_list(x)?;
            let digest = hash(&key, &x)?;
            if let Some(path) = digest_out {
                std::fs::write(path, serialize_digest(&digest))?;
            }
            let text = match cli.format {
                Format::Csv => format!(
                    "overflow,digest\n{},{}\n",
                    digest.is_overflow_zero,
                    join_i64(&digest.q)
                ),
                Format::Json => format!(
                    "{}\n",
                    json!({"overflow": digest.is_overflow_zero, "digest": digest.q})
                ),
            };
            emit(&cli.out, &text)
        }
        Cmd::LshVerify { key, y, z, trials } => {
            let key = load_key(key)?;
            let text = match (y, z) {
                (Some(y), Some(z)) => {
                    let y = parse_int_list(y)?;
                    let z = parse_int_list(z)?;
                    match reduce_contraction_to_chv(&key, &y, &z)? {
                        ReductionOutcome::Solution { x, ratio } => match cli.format {
                            Format::Csv => format!(
                                "outcome,achieved_ratio,solution\nsolution,{},{}\n",
                                ratio,
                                join_i64(&x)
                            ),
                            Format::Json => format!(
                                "{}\n",
                                json!({
                                    "outcome": "solution",
                                    "achieved_ratio": ratio, "solution": x,
                                })
                            ),
                        },
                        ReductionOutcome::NotContracting { digest_distance, threshold } => {
                            match cli.format {
                                Format::Csv => format!(
                                    "outcome,digest_distance,threshold\nnot_contracting,{digest_distance},{threshold}\n"
                                ),
                                Format::Json => format!(
                                    "{}\n",
                                    json!({
                                        "outcome": "not_contracting",
                                        "digest_distance": digest_distance,
                                        "threshold": threshold,
                                    })
                                ),
                            }
                        }
                    }
                }
                _ => {
                    let rep = check_non_expansion(&key, *trials, Seed::new(cli.seed));
                    let margin = compression_margin(key.n, key.m, key.bound_b, key.kappa);
                    match cli.format {
                        Format::Csv => format!(
                            "max_ratio,spectral_norm,certificate_bound,violated,pairs,compression_margin\n{},{},{},{},{},{}\n",
                            rep.max_ratio, rep.spectral_norm_scaled, rep.certificate_bound,
                            rep.violated, rep.pairs_used, margin
                        ),
                        Format::Json => format!(
                            "{}\n",
                            json!({
                                "max_ratio": rep.max_ratio,
                                "spectral_norm": rep.spectral_norm_scaled,
                                "certificate_bound": rep.certificate_bound,
                                "violated": rep.violated, "pairs": rep.pairs_used,
                                "compression_margin": margin,
                            })
                        ),
                    }
                }
            };
            emit(&cli.out, &text)
        }
        Cmd::ClweDemo { n, m, bound_b, gamma, beta, trials } => {
            let rep = reduction_demo(*n, *m, *bound_b, *gamma, *beta, *trials, Seed::new(cli.seed))?;
            let text = match cli.format {
                Format::Csv => format!(
                    "witness,n,m,B,gamma,beta,trials,acc_planted,acc_null,advantage,witness_quality,conclusive\nsynthetic,{},{},{},{},{},{},{},{},{},{},{}\n",
                    rep.n, rep.m, rep.bound_b, rep.gamma_norm, rep.beta_noise, rep.trials,
                    rep.acc_planted, rep.acc_null, rep.advantage, rep.witness_quality,
                    rep.conclusive
                ),
                Format::Json => format!(
                    "{}\n",
                    json!({
                        "witness": "synthetic", "n": rep.n, "m": rep.m, "B": rep.bound_b,
                        "gamma": rep.gamma_norm, "beta": rep.beta_noise, "trials": rep.trials,
                        "acc_planted": rep.acc_planted, "acc_null": rep.acc_null,
                        "advantage": rep.advantage, "witness_quality": rep.witness_quality,
                        "conclusive": rep.conclusive,
                    })
                ),
            };
            emit(&cli.out, &text)
        }
        Cmd::TheoryChecks { samples } => {
            let summaries = run_all_theory_sweeps(*samples, Seed::new(cli.seed));
            let text = match cli.format {
                Format::Csv => {
                    let mut s = String::from("claim,samples,failures,holds\n");
                    for sum in &summaries {
                        s.push_str(&format!(
                            "{},{},{},{}\n",
                            sum.claim,
                            sum.samples,
                            sum.failures,
                            sum.holds()
                        ));
                    }
                    s
                }
                Format::Json => {
                    let objs: Vec<_> = summaries
                        .iter()
                        .map(|sum| {
                            json!({
                                "claim": sum.claim, "samples": sum.samples,
                                "failures": sum.failures, "holds": sum.holds(),
                            })
                        })
                        .collect();
                    format!("{}\n", json!(objs))
                }
            };
            emit(&cli.out, &text)?;
            let broken: Vec<&str> =
                summaries.iter().filter(|s| !s.holds()).map(|s| s.claim).collect();
            if broken.is_empty() {
                Ok(())
            } else {
                Err(Error::Domain(format!("claims falsified: {}", broken.join(", "))))
            }
        }
    }
}
