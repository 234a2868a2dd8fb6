//! Derivative-free search for inputs maximizing the entropy-ratio bounds.
//!
//! Each input is a distribution on the grid `{0, …, n−1}` parametrized by
//! log-weights. Candidates are rationalized and normalized exactly before
//! every objective evaluation, so the reported values come from the exact
//! entropy path.

use num_traits::{Float, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::ChannelMatrix;
use crate::dist::DiscreteDist;
use crate::dof::{hlambda_bound, prop4_inputs, theorem3_report_rows};
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::{ExactScalar, RationalDist};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OptConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub seed: u64,
    pub max_denominator: u64,
}

impl Default for OptConfig {
    fn default() -> Self {
        OptConfig {
            restarts: 8,
            max_iters: 400,
            seed: 0,
            max_denominator: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RestartTrace {
    pub restart: usize,
    pub warm: bool,
    pub iterations: usize,
    pub start_value: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptResult {
    pub best_value: f64,
    /// Winning inputs, one per variable (`[U, V]` for the two-variable search).
    pub best: Vec<RationalDist>,
    pub best_restart: usize,
    pub trace: Vec<RestartTrace>,
    pub seed: u64,
}

/// Outcome of a Nelder–Mead run.
#[derive(Debug, Clone)]
pub struct NmOutcome<F> {
    pub x: Vec<F>,
    pub value: F,
    pub iterations: usize,
}

/// Minimizes `f` with the Nelder–Mead simplex method, starting from the
/// simplex `x0, x0 + step·e_1, …`.
pub fn nelder_mead<F: Float>(
    mut f: impl FnMut(&[F]) -> F,
    x0: &[F],
    step: F,
    max_iters: usize,
    tol: F,
) -> NmOutcome<F> {
    let n = x0.len();
    let two = F::one() + F::one();
    let half = F::one() / two;
    let mut simplex: Vec<(Vec<F>, F)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] = x[i] + step;
        let v = f(&x);
        simplex.push((x, v));
    }
    let order = |s: &mut Vec<(Vec<F>, F)>| {
        s.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
    };
    let mut iterations = 0;
    while iterations < max_iters {
        order(&mut simplex);
        if (simplex[n].1 - simplex[0].1).abs() <= tol {
            break;
        }
        iterations += 1;
        let mut centroid = vec![F::zero(); n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c = *c + *xi;
            }
        }
        let nf = F::from(n).expect("dimension fits");
        centroid.iter_mut().for_each(|c| *c = *c / nf);
        let towards = |t: F, from: &[F]| -> Vec<F> {
            centroid
                .iter()
                .zip(from)
                .map(|(c, w)| *c + t * (*w - *c))
                .collect()
        };
        let worst = simplex[n].0.clone();
        let xr = towards(-F::one(), &worst);
        let fr = f(&xr);
        if fr < simplex[0].1 {
            let xe = towards(-two, &worst);
            let fe = f(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < simplex[n].1 {
            let xc = towards(-half, &worst);
            let fc = f(&xc);
            (xc, fc)
        } else {
            let xc = towards(half, &worst);
            let fc = f(&xc);
            (xc, fc)
        };
        if fc < simplex[n].1.min(fr) {
            simplex[n] = (xc, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for (x, v) in simplex.iter_mut().skip(1) {
            *x = best.iter().zip(x.iter()).map(|(b, xi)| *b + half * (*xi - *b)).collect();
            *v = f(x);
        }
    }
    order(&mut simplex);
    let (x, value) = simplex.swap_remove(0);
    NmOutcome {
        x,
        value,
        iterations,
    }
}

/// Exact distribution on `{0, …, n−1}` from log-weights: softmax in floating
/// point, continued-fraction rationalization, then exact normalization.
pub fn rationalize(log_weights: &[f64], max_denominator: u64) -> RationalDist {
    let top = log_weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = log_weights.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = w.iter().sum();
    let floor = Rational::new(1, max_denominator as i64);
    let q: Vec<Rational> = w
        .iter()
        .map(|x| {
            Rational::approximate(x / total, max_denominator)
                .filter(|r| *r >= floor)
                .unwrap_or_else(|| floor.clone())
        })
        .collect();
    let support = (0..q.len() as i64).map(Rational::from_integer).collect();
    DiscreteDist::from_weights(support, &q).expect("positive weights")
}

fn log_weights_of(d: &RationalDist, n: usize) -> Vec<f64> {
    (0..n as i64)
        .map(|i| {
            d.prob(&Rational::from_integer(i))
                .map(|p| p.to_f64().ln())
                .unwrap_or(-20.0)
        })
        .collect()
}

struct Candidate {
    value: f64,
    dists: Vec<RationalDist>,
}

fn run_restart(
    objective: &(dyn Fn(&[RationalDist]) -> Option<f64> + Sync),
    vars: usize,
    n: usize,
    config: &OptConfig,
    index: usize,
    warm: Option<&Vec<RationalDist>>,
) -> (Candidate, RestartTrace) {
    let x0: Vec<f64> = match warm {
        Some(ds) => ds.iter().flat_map(|d| log_weights_of(d, n)).collect(),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(index as u64));
            (0..vars * n).map(|_| rng.gen_range(-3.0..3.0)).collect()
        }
    };
    let decode = |x: &[f64]| -> Vec<RationalDist> {
        x.chunks(n)
            .map(|c| rationalize(c, config.max_denominator))
            .collect()
    };
    let mut best: Option<Candidate> = None;
    let mut consider = |value: f64, dists: Vec<RationalDist>| {
        if best.as_ref().map_or(true, |b| value > b.value) {
            best = Some(Candidate { value, dists });
        }
    };
    let start_dists = warm.cloned().unwrap_or_else(|| decode(&x0));
    let start_value = objective(&start_dists).unwrap_or(f64::NEG_INFINITY);
    consider(start_value, start_dists);
    let outcome = nelder_mead(
        |x| {
            let ds = decode(x);
            -objective(&ds).unwrap_or(f64::NEG_INFINITY)
        },
        &x0,
        1.0,
        config.max_iters,
        1e-12,
    );
    let end = decode(&outcome.x);
    if let Some(v) = objective(&end) {
        consider(v, end);
    }
    let best = best.expect("start candidate recorded");
    let trace = RestartTrace {
        restart: index,
        warm: warm.is_some(),
        iterations: outcome.iterations,
        start_value,
        value: best.value,
    };
    (best, trace)
}

fn search(
    objective: &(dyn Fn(&[RationalDist]) -> Option<f64> + Sync),
    vars: usize,
    n: usize,
    config: &OptConfig,
    warm: &[Vec<RationalDist>],
) -> Result<OptResult> {
    let total = warm.len() + config.restarts;
    if total == 0 {
        return Err(Error::InvalidParameter("at least one restart is required".into()));
    }
    let runs: Vec<(Candidate, RestartTrace)> = (0..total)
        .into_par_iter()
        .map(|i| run_restart(objective, vars, n, config, i, warm.get(i)))
        .collect();
    let mut best_idx = None;
    for (i, (c, _)) in runs.iter().enumerate() {
        if c.value.is_finite() && best_idx.map_or(true, |b: usize| c.value > runs[b].0.value) {
            best_idx = Some(i);
        }
    }
    let best_idx = best_idx.ok_or(Error::DeterministicInputs)?;
    let (mut cands, trace): (Vec<Candidate>, Vec<RestartTrace>) = runs.into_iter().unzip();
    let best = cands.swap_remove(best_idx);
    Ok(OptResult {
        best_value: best.value,
        best: best.dists,
        best_restart: best_idx,
        trace,
        seed: config.seed,
    })
}

/// Maximizes `2 − H(U+V)/H(U+λV)` over `U`, `V` on `{0, …, n−1}`. For
/// `λ = −1` and `n ≥ 4` the known good pair is always the first restart.
pub fn optimize_hlambda(lambda: &Rational, n: usize, config: &OptConfig) -> Result<OptResult> {
    if n < 2 {
        return Err(Error::InvalidParameter("n must be at least 2".into()));
    }
    if lambda.is_zero() {
        return Err(Error::InvalidParameter("lambda must be nonzero".into()));
    }
    let objective = |ds: &[RationalDist]| hlambda_bound(lambda, &ds[0], &ds[1]).ok();
    let mut warm = Vec::new();
    if *lambda == Rational::from_integer(-1) && n >= 4 {
        let p = prop4_inputs();
        warm.push(vec![p.clone(), p]);
    }
    search(&objective, 2, n, config, &warm)
}

/// Maximizes the channel entropy ratio over `K` independent inputs on
/// `{0, …, n−1}`; all-deterministic candidates are skipped.
pub fn optimize_theorem3(
    h: &ChannelMatrix,
    n: usize,
    config: &OptConfig,
    warm: &[Vec<RationalDist>],
) -> Result<OptResult> {
    if n < 2 {
        return Err(Error::InvalidParameter("n must be at least 2".into()));
    }
    for w in warm {
        if w.len() != h.k() {
            return Err(Error::DimensionMismatch {
                expected: h.k(),
                found: w.len(),
            });
        }
    }
    let rational_rows: Option<Vec<Vec<Rational>>> = h
        .rows()
        .iter()
        .map(|r| r.iter().map(|e| e.as_rational()).collect())
        .collect();
    let objective = |ds: &[RationalDist]| -> Option<f64> {
        match &rational_rows {
            Some(rows) => theorem3_report_rows(rows, ds).ok().map(|r| r.ratio),
            None => {
                let lifted: Vec<DiscreteDist<ExactScalar>> = ds
                    .iter()
                    .map(|d| d.map_support(ExactScalar::from_rational))
                    .collect::<Result<_>>()
                    .ok()?;
                theorem3_report_rows(h.rows(), &lifted).ok().map(|r| r.ratio)
            }
        }
    };
    search(&objective, h.k(), n, config, warm)
}
