use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde_json::{json, Value};

use icdof_core::channel::{check_condition_star, ChannelMatrix};
use icdof_core::dist::{set_atom_budget, DEFAULT_ATOM_BUDGET};
use icdof_core::dof::{
    hlambda_entropies, integer_example_bound, nonasymptotic_floor, per_user_floor,
    theorem1_certified_bound, theorem3_report,
};
use icdof_core::infodim::{empirical_infodim, infodim_formula, recommended_k};
use icdof_core::io::{parse_channel, parse_dist, parse_ifs, parse_set, round_floats};
use icdof_core::optimize::{optimize_hlambda, optimize_theorem3, OptConfig};
use icdof_core::sumset::{
    attains_progression_bound, check_trivial_bounds, entropy_inequality_suite,
    is_arithmetic_progression, same_step_progressions, sumset,
};
use icdof_core::{Dist, Error, Rational};

const DIGITS: usize = 12;

/// Exact degrees-of-freedom bounds for constant interference channels.
#[derive(Parser)]
#[command(name = "icdof", version)]
struct Cli {
    /// Maximum number of atoms any single operation may create.
    #[arg(long, global = true, default_value_t = DEFAULT_ATOM_BUDGET)]
    budget: usize,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for the optimizer.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Objective {
    Hlambda,
    Thm3,
}

#[derive(Subcommand)]
enum Command {
    /// Check Condition (*) up to a degree bound.
    Condition {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, default_value_t = 0)]
        degree: usize,
    },
    /// Certified lower bound from the monomial alphabet construction.
    BoundThm1 {
        /// Channel file; all-generic K×K when omitted.
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: u64,
    },
    /// Closed-form non-asymptotic floor; N may be written as `2^1000`.
    BoundFloor {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: String,
    },
    /// Integer off-diagonal channel with generic diagonal.
    BoundInteger {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        n: u64,
    },
    /// Entropy ratio for given independent inputs, one file per user.
    RatioThm3 {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long = "input", required = true)]
        inputs: Vec<PathBuf>,
    },
    /// 2 − H(U+V)/H(U+λV).
    Hlambda {
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        #[arg(long)]
        u: PathBuf,
        #[arg(long)]
        v: PathBuf,
    },
    /// Search for inputs maximizing an entropy-ratio objective.
    Optimize {
        #[arg(long, value_enum, default_value_t = Objective::Hlambda)]
        objective: Objective,
        #[arg(long, allow_hyphen_values = true, default_value = "-1")]
        lambda: String,
        /// Channel file for the thm3 objective.
        #[arg(long)]
        matrix: Option<PathBuf>,
        /// Support size of each input, {0, …, n−1}.
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[arg(long, default_value_t = 400)]
        max_iters: usize,
        #[arg(long, default_value_t = 1_000_000)]
        max_denominator: u64,
    },
    /// Information dimension of a self-similar measure.
    Infodim {
        #[arg(long)]
        ifs: PathBuf,
        /// Truncation depth for the empirical estimate.
        #[arg(long)]
        m: Option<usize>,
        /// Quantization level (default: largest admissible for m).
        #[arg(long)]
        k: Option<u64>,
    },
    /// Sumset of two sets with cardinality bounds.
    Sumset {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// Sumset-type entropy inequalities for independent U, V.
    IneqSuite {
        #[arg(long)]
        u: PathBuf,
        #[arg(long)]
        v: PathBuf,
    },
}

enum Failure {
    Input(Error),
    Io(PathBuf, std::io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e)
    }
}

type Outcome = Result<Value, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn load_dist(path: &Path) -> Result<Dist, Failure> {
    Ok(parse_dist(&read(path)?)?)
}

fn load_channel(path: &Path) -> Result<ChannelMatrix, Failure> {
    Ok(parse_channel(&read(path)?)?)
}

fn to_value<T: serde::Serialize>(v: &T) -> Outcome {
    serde_json::to_value(v).map_err(|e| Failure::Input(e.into()))
}

fn parse_big(s: &str) -> Result<BigUint, Error> {
    let bad = || Error::Parse {
        input: s.to_string(),
        message: "expected a non-negative integer or base^exponent".into(),
    };
    match s.split_once('^') {
        Some((b, e)) => {
            let base: BigUint = b.trim().parse().map_err(|_| bad())?;
            let exp: u32 = e.trim().parse().map_err(|_| bad())?;
            Ok(base.pow(exp))
        }
        None => s.trim().parse().map_err(|_| bad()),
    }
}

fn integer_offdiagonal(h: &ChannelMatrix) -> Result<Vec<Vec<i64>>, Error> {
    (0..h.k())
        .map(|i| {
            (0..h.k())
                .map(|j| {
                    if i == j {
                        return Ok(0);
                    }
                    let e = h.entry(i, j);
                    e.as_rational()
                        .filter(|q| q.is_integer())
                        .and_then(|q| i64::try_from(q.numer()).ok())
                        .ok_or_else(|| {
                            Error::InvalidParameter(format!(
                                "off-diagonal entry ({}, {}) = {e} is not an integer",
                                i + 1,
                                j + 1
                            ))
                        })
                })
                .collect()
        })
        .collect()
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Condition { matrix, degree } => {
            to_value(&check_condition_star(&load_channel(matrix)?, *degree)?)
        }
        Command::BoundThm1 { matrix, k, d, n } => {
            let h = match matrix {
                Some(p) => load_channel(p)?,
                None => ChannelMatrix::generic(*k)?,
            };
            to_value(&theorem1_certified_bound(&h, *d, *n)?)
        }
        Command::BoundFloor { k, d, n } => {
            let nb = parse_big(n)?;
            Ok(json!({
                "floor": nonasymptotic_floor(*k, *d, &nb)?,
                "per_user_floor": per_user_floor(*k, *d, &nb)?,
                "params": {"K": k, "d": d, "N": nb.to_string()},
            }))
        }
        Command::BoundInteger { matrix, n } => {
            let h = load_channel(matrix)?;
            to_value(&integer_example_bound(&integer_offdiagonal(&h)?, *n)?)
        }
        Command::RatioThm3 { matrix, inputs } => {
            let h = load_channel(matrix)?;
            let w = inputs.iter().map(|p| load_dist(p)).collect::<Result<Vec<_>, _>>()?;
            to_value(&theorem3_report(&h, &w)?)
        }
        Command::Hlambda { lambda, u, v } => {
            let l = Rational::parse(lambda)?;
            let (hs, hm) = hlambda_entropies(&l, &load_dist(u)?, &load_dist(v)?)?;
            Ok(json!({
                "bound": 2.0 - hs / hm,
                "h_sum": hs,
                "h_mixed": hm,
                "lambda": l,
            }))
        }
        Command::Optimize {
            objective,
            lambda,
            matrix,
            n,
            restarts,
            max_iters,
            max_denominator,
        } => {
            let config = OptConfig {
                restarts: *restarts,
                max_iters: *max_iters,
                seed: cli.seed,
                max_denominator: *max_denominator,
            };
            let result = match objective {
                Objective::Hlambda => optimize_hlambda(&Rational::parse(lambda)?, *n, &config)?,
                Objective::Thm3 => {
                    let h = match matrix {
                        Some(p) => load_channel(p)?,
                        None => ChannelMatrix::h_lambda(&Rational::parse(lambda)?),
                    };
                    optimize_theorem3(&h, *n, &config, &[])?
                }
            };
            let mut out = to_value(&result)?;
            out["config"] = to_value(&config)?;
            Ok(out)
        }
        Command::Infodim { ifs, m, k } => {
            let system = parse_ifs(&read(ifs)?)?;
            let formula = to_value(&infodim_formula(&system))?;
            let empirical = match m {
                Some(m) => {
                    let k = match k {
                        Some(k) => *k,
                        None => recommended_k(&system, *m)?,
                    };
                    to_value(&empirical_infodim(&system, *m, k)?)?
                }
                None => Value::Null,
            };
            Ok(json!({ "formula": formula, "empirical": empirical }))
        }
        Command::Sumset { a, b } => {
            let (a, b) = (parse_set(&read(a)?)?, parse_set(&read(b)?)?);
            let s = sumset(&a, &b)?;
            Ok(json!({
                "sumset": to_value(&s)?,
                "bounds": to_value(&check_trivial_bounds(&a, &b)?)?,
                "progression_a": to_value(&is_arithmetic_progression(&a).ok().flatten())?,
                "progression_b": to_value(&is_arithmetic_progression(&b).ok().flatten())?,
                "attains_progression_bound": attains_progression_bound(&a, &b)?,
                "same_step_progressions": same_step_progressions(&a, &b).ok(),
            }))
        }
        Command::IneqSuite { u, v } => {
            to_value(&entropy_inequality_suite(&load_dist(u)?, &load_dist(v)?)?)
        }
    }
}

fn emit(mut v: Value) {
    round_floats(&mut v, DIGITS);
    let text = serde_json::to_string_pretty(&v).expect("serializable");
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn error_object(f: &Failure) -> Value {
    match f {
        Failure::Io(path, e) => json!({
            "code": "io",
            "message": format!("{}: {e}", path.display()),
        }),
        Failure::Input(e) => {
            let mut v = json!({ "code": e.code(), "message": e.to_string() });
            if let Error::ConditionViolated(w) = e {
                v["witness"] = serde_json::to_value(w).unwrap_or(Value::Null);
            }
            v
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    set_atom_budget(cli.budget);
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("icdof: cannot configure threads: {e}");
            return ExitCode::from(1);
        }
    }
    match std::panic::catch_unwind(|| run(&cli)) {
        Ok(Ok(v)) => {
            emit(v);
            ExitCode::SUCCESS
        }
        Ok(Err(f)) => {
            if let Failure::Input(e) = &f {
                eprintln!("icdof: {e}");
            }
            emit(error_object(&f));
            ExitCode::from(2)
        }
        Err(_) => {
            emit(json!({ "code": "internal", "message": "internal error" }));
            ExitCode::from(1)
        }
    }
}
