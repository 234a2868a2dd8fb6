//! Degrees-of-freedom lower bounds built from entropies of linear
//! combinations of independent discrete inputs.

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use serde::Serialize;
use serde_json::json;

use crate::channel::{build_wn, check_condition_star, phi, ChannelMatrix};
use crate::dist::{DiscreteDist, Support};
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::{Dist, ExactScalar};

/// Every bound obtained through the contraction parameter holds for
/// contraction parameters outside an exceptional set of dimension zero.
pub const CAVEAT: &str = "non-exceptional-r";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UserTerm {
    pub full_entropy_bits: f64,
    pub interference_entropy_bits: f64,
    pub clamped_term: f64,
}

/// Exact check that the desired signal and the interference seen by one
/// receiver do not collide: the sum map is injective on the product support.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitCheck {
    pub user: usize,
    pub signal_support: usize,
    pub interference_support: usize,
    pub full_support: usize,
    pub signal_entropy_bits: f64,
    pub interference_entropy_bits: f64,
    pub full_entropy_bits: f64,
    pub factorizes: bool,
    /// `|H(full) − H(signal) − H(interference)|`
    pub entropy_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub bound: f64,
    pub per_user: Vec<UserTerm>,
    pub r_log: f64,
    pub caveat: &'static str,
    pub params: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub floor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_user_floor: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub decomposition: Vec<SplitCheck>,
}

impl BoundReport {
    /// Whether every per-user split was verified exactly.
    pub fn split_verified(&self, tol: f64) -> bool {
        !self.decomposition.is_empty()
            && self
                .decomposition
                .iter()
                .all(|s| s.factorizes && s.entropy_gap <= tol)
    }
}

fn clamp_term(full: f64, interference: f64, r_log: f64) -> f64 {
    let t = (full / r_log).min(1.0) - (interference / r_log).min(1.0);
    t.clamp(0.0, 1.0)
}

// Distribution of Σ_{j≠i} h_ij W_j, a point mass at 0 when every
// coefficient vanishes.
fn interference_dist(row: &[ExactScalar], w: &[Dist], i: usize) -> Result<Dist> {
    let mut coeffs = row.to_vec();
    coeffs[i] = ExactScalar::zero();
    match Dist::linear_combination(&coeffs, w) {
        Err(Error::DegenerateCombination) => Ok(Dist::point(ExactScalar::zero())),
        other => other,
    }
}

fn signal_dist(hii: &ExactScalar, wi: &Dist) -> Dist {
    if hii.is_zero() {
        Dist::point(ExactScalar::zero())
    } else {
        wi.scale(hii).expect("nonzero scale")
    }
}

fn check_inputs(h: &ChannelMatrix, w: &[Dist], r_log: f64) -> Result<()> {
    if w.len() != h.k() {
        return Err(Error::DimensionMismatch {
            expected: h.k(),
            found: w.len(),
        });
    }
    if !(r_log > 0.0 && r_log.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "log2(1/r) must be positive and finite, got {r_log}"
        )));
    }
    Ok(())
}

struct UserEval {
    term: UserTerm,
    split: SplitCheck,
}

fn eval_user(h: &ChannelMatrix, w: &[Dist], i: usize, r_log: f64) -> Result<UserEval> {
    let interference = interference_dist(h.row(i), w, i)?;
    let signal = signal_dist(h.entry(i, i), &w[i]);
    let full = signal.convolve(&interference)?;
    let (hs, hi, hf) = (
        signal.entropy_bits(),
        interference.entropy_bits(),
        full.entropy_bits(),
    );
    Ok(UserEval {
        term: UserTerm {
            full_entropy_bits: hf,
            interference_entropy_bits: hi,
            clamped_term: clamp_term(hf, hi, r_log),
        },
        split: SplitCheck {
            user: i,
            signal_support: signal.len(),
            interference_support: interference.len(),
            full_support: full.len(),
            signal_entropy_bits: hs,
            interference_entropy_bits: hi,
            full_entropy_bits: hf,
            factorizes: full.len() == signal.len() * interference.len(),
            entropy_gap: (hf - hs - hi).abs(),
        },
    })
}

fn assemble(evals: Vec<UserEval>, r_log: f64, params: serde_json::Value) -> BoundReport {
    let (per_user, decomposition): (Vec<UserTerm>, Vec<SplitCheck>) =
        evals.into_iter().map(|e| (e.term, e.split)).unzip();
    BoundReport {
        bound: per_user.iter().map(|t| t.clamped_term).sum(),
        per_user,
        r_log,
        caveat: CAVEAT,
        params,
        closed_form: None,
        floor: None,
        per_user_floor: None,
        decomposition,
    }
}

/// `Σ_i [min{H(Σ_j h_ij W_j)/log(1/r), 1} − min{H(Σ_{j≠i} h_ij W_j)/log(1/r), 1}]`
/// for independent inputs `W_j`, each term clamped to `[0, 1]`.
pub fn prop1_bound(h: &ChannelMatrix, w: &[Dist], r_log: f64) -> Result<BoundReport> {
    check_inputs(h, w, r_log)?;
    let evals = (0..h.k())
        .map(|i| eval_user(h, w, i, r_log))
        .collect::<Result<Vec<_>>>()?;
    let mut report = assemble(evals, r_log, json!({ "K": h.k() }));
    report.decomposition.clear();
    Ok(report)
}

/// `K/2 · [2 − (K(K−1)+d+1)·log((K−1)N) / ((d+1)·log N)]`, unclamped.
pub fn nonasymptotic_floor(k: usize, d: usize, n: &BigUint) -> Result<f64> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("K must be at least 2, got {k}")));
    }
    if *n < BigUint::from(2u32) {
        return Err(Error::InvalidParameter("N must be at least 2".into()));
    }
    let log_n = Rational::from(BigInt::from(n.clone())).log2();
    let log_kn = Rational::from(BigInt::from(n * BigUint::from(k - 1))).log2();
    let ratio = (k * (k - 1) + d + 1) as f64 * log_kn / ((d + 1) as f64 * log_n);
    Ok(k as f64 / 2.0 * (2.0 - ratio))
}

/// Per-user lower bound `1 − φ(d+1)·log((K−1)N) / (2φ(d)·log N)` on each
/// clamped term of the construction.
pub fn per_user_floor(k: usize, d: usize, n: &BigUint) -> Result<f64> {
    Ok(nonasymptotic_floor(k, d, n)? / k as f64)
}

/// Runs the bound on i.i.d. uniform inputs over the alphabet built from the
/// degree-`d` monomials with coefficients in `{1, …, N}` and
/// `log(1/r) = 2·log|alphabet|`, after certifying Condition (*) at degree `d`.
pub fn theorem1_certified_bound(h: &ChannelMatrix, d: usize, n: u64) -> Result<BoundReport> {
    if n < 2 {
        return Err(Error::InvalidParameter("N must be at least 2".into()));
    }
    if !h.is_fully_connected() {
        return Err(Error::NotFullyConnected);
    }
    let cond = check_condition_star(h, d)?;
    if let Some(w) = cond.witness {
        return Err(Error::ConditionViolated(Box::new(w)));
    }
    let wn = build_wn(h, d, n)?;
    let size = wn.len();
    let input = Dist::uniform_on(wn)?;
    let w = vec![input; h.k()];
    let r_log = 2.0 * (size as f64).log2();
    let evals = (0..h.k())
        .map(|i| eval_user(h, &w, i, r_log))
        .collect::<Result<Vec<_>>>()?;
    let nb = BigUint::from(n);
    let mut report = assemble(
        evals,
        r_log,
        json!({
            "K": h.k(),
            "d": d,
            "N": n,
            "alphabet_size": size,
            "phi_d": phi(h.k(), d).to_string(),
        }),
    );
    report.floor = Some(nonasymptotic_floor(h.k(), d, &nb)?);
    report.per_user_floor = Some(per_user_floor(h.k(), d, &nb)?);
    Ok(report)
}

/// Closed form `K·log N / (2·log(2·h_max·K·N))`.
pub fn integer_example_closed_form(k: usize, h_max: u64, n: u64) -> f64 {
    let n = n as f64;
    k as f64 * n.log2() / (2.0 * (2.0 * h_max as f64 * k as f64 * n).log2())
}

/// Integer off-diagonal entries, fresh generators `g_i` on the diagonal,
/// inputs uniform on `{0, …, N−1}` and `log(1/r) = 2·log(2·h_max·K·N)`.
pub fn integer_example_bound(offdiag: &[Vec<i64>], n: u64) -> Result<BoundReport> {
    let k = offdiag.len();
    if n < 1 {
        return Err(Error::InvalidParameter("N must be at least 1".into()));
    }
    let mut h_max = 0u64;
    let mut rows = Vec::with_capacity(k);
    for (i, row) in offdiag.iter().enumerate() {
        if row.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: row.len(),
            });
        }
        let mut out = Vec::with_capacity(k);
        for (j, &v) in row.iter().enumerate() {
            if i == j {
                out.push(ExactScalar::var(&format!("g_{}", i + 1)));
            } else if v == 0 {
                return Err(Error::InvalidParameter(format!(
                    "off-diagonal entry ({}, {}) is zero",
                    i + 1,
                    j + 1
                )));
            } else {
                h_max = h_max.max(v.unsigned_abs());
                out.push(ExactScalar::from_integer(v));
            }
        }
        rows.push(out);
    }
    let h = ChannelMatrix::new(rows)?;
    let input = Dist::uniform_on((0..n as i64).map(ExactScalar::from_integer).collect())?;
    let w = vec![input; k];
    let r_log = 2.0 * (2.0 * h_max as f64 * k as f64 * n as f64).log2();
    let evals = (0..k)
        .map(|i| eval_user(&h, &w, i, r_log))
        .collect::<Result<Vec<_>>>()?;
    let mut report = assemble(evals, r_log, json!({ "K": k, "N": n, "h_max": h_max }));
    report.closed_form = Some(integer_example_closed_form(k, h_max, n));
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioReport {
    pub ratio: f64,
    pub full_entropy_bits: Vec<f64>,
    pub interference_entropy_bits: Vec<f64>,
    pub denominator: f64,
}

/// `Σ_i [H(Σ_j h_ij W_j) − H(Σ_{j≠i} h_ij W_j)] / max_i H(Σ_j h_ij W_j)` for
/// a matrix given by its rows over any support type.
pub fn theorem3_report_rows<V: Support>(
    rows: &[Vec<V>],
    w: &[DiscreteDist<V>],
) -> Result<RatioReport> {
    let k = rows.len();
    if w.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: w.len(),
        });
    }
    let zero = V::from(Rational::zero());
    let combo = |coeffs: &[V]| match DiscreteDist::linear_combination(coeffs, w) {
        Err(Error::DegenerateCombination) => Ok(DiscreteDist::point(zero.clone())),
        other => other,
    };
    let mut full = Vec::with_capacity(k);
    let mut interference = Vec::with_capacity(k);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: row.len(),
            });
        }
        let mut off = row.clone();
        off[i] = zero.clone();
        let int = combo(&off)?;
        let f = if row[i].is_zero_value() {
            int.clone()
        } else {
            w[i].scale(&row[i])?.convolve(&int)?
        };
        full.push(f.entropy_bits());
        interference.push(int.entropy_bits());
    }
    let denominator = full.iter().cloned().fold(0.0, f64::max);
    if denominator <= 0.0 {
        return Err(Error::DeterministicInputs);
    }
    let num: f64 = full.iter().zip(&interference).map(|(f, i)| (f - i).max(0.0)).sum();
    Ok(RatioReport {
        ratio: num / denominator,
        full_entropy_bits: full,
        interference_entropy_bits: interference,
        denominator,
    })
}

pub fn theorem3_report(h: &ChannelMatrix, w: &[Dist]) -> Result<RatioReport> {
    theorem3_report_rows(h.rows(), w)
}

pub fn theorem3_ratio(h: &ChannelMatrix, w: &[Dist]) -> Result<f64> {
    Ok(theorem3_report(h, w)?.ratio)
}

/// `2 − H(U+V)/H(U+λV)`.
pub fn hlambda_bound<V: Support>(
    lambda: &Rational,
    u: &DiscreteDist<V>,
    v: &DiscreteDist<V>,
) -> Result<f64> {
    let (sum, mixed) = hlambda_entropies(lambda, u, v)?;
    Ok(2.0 - sum / mixed)
}

/// `(H(U+V), H(U+λV))`, erroring when the latter vanishes.
pub fn hlambda_entropies<V: Support>(
    lambda: &Rational,
    u: &DiscreteDist<V>,
    v: &DiscreteDist<V>,
) -> Result<(f64, f64)> {
    if lambda.is_zero() {
        return Err(Error::InvalidParameter("lambda must be nonzero".into()));
    }
    let mixed = u.convolve(&v.scale(&V::from(lambda.clone()))?)?.entropy_bits();
    if mixed <= 0.0 {
        return Err(Error::DeterministicInputs);
    }
    let sum = if *lambda == Rational::from_integer(1) {
        mixed
    } else {
        u.convolve(v)?.entropy_bits()
    };
    Ok((sum, mixed))
}

/// The inputs of the lower bound for `λ = −1`: `U = V` on `{0, 1, 2, 3}` with
/// probabilities `(a³, a², a, 1 − a − a² − a³)` and `a = 2/25`.
pub fn prop4_inputs() -> DiscreteDist<Rational> {
    let a = Rational::new(2, 25);
    let p = [a.pow(3), a.pow(2), a.clone()];
    let rest = Rational::from_integer(1) - p.iter().fold(Rational::zero(), |s, x| s + x);
    DiscreteDist::from_atoms(
        p.into_iter()
            .chain([rest])
            .enumerate()
            .map(|(i, q)| (Rational::from_integer(i as i64), q)),
    )
    .expect("valid distribution")
}
