//! Self-similar measures of the IFS `{x ↦ r·x + w_i}` with weights `p_i`:
//! the entropy formula for the information dimension and a quantization
//! estimator on exact truncations.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rustc_hash::{FxHashMap, FxHashSet};
use serde::Serialize;

use crate::dist::{DiscreteDist, Support};
use crate::dof::CAVEAT;
use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IfsSpec<V: Support> {
    pub r: Rational,
    pub w: Vec<V>,
    pub probs: Vec<Rational>,
}

impl<V: Support> IfsSpec<V> {
    pub fn new(r: Rational, w: Vec<V>, probs: Vec<Rational>) -> Result<Self> {
        if !(r.is_positive() && r < Rational::one()) {
            return Err(Error::InvalidParameter(format!("r must lie in (0, 1), got {r}")));
        }
        if w.len() != probs.len() {
            return Err(Error::DimensionMismatch {
                expected: w.len(),
                found: probs.len(),
            });
        }
        if w.len() < 2 {
            return Err(Error::InvalidParameter("an IFS needs at least two maps".into()));
        }
        let mut seen = FxHashSet::default();
        for v in &w {
            if !seen.insert(v) {
                return Err(Error::SupportNotDistinct(v.to_string()));
            }
        }
        if probs.iter().any(|p| !p.is_positive()) {
            return Err(Error::InvalidProbabilities("probabilities must be positive".into()));
        }
        let total = probs.iter().fold(Rational::zero(), |s, p| s + p);
        if !total.is_one() {
            return Err(Error::InvalidProbabilities(format!("probabilities sum to {total}")));
        }
        Ok(IfsSpec { r, w, probs })
    }

    /// Distribution of a single translation `W`.
    pub fn translation_dist(&self) -> DiscreteDist<V> {
        DiscreteDist::from_atoms(self.w.iter().cloned().zip(self.probs.iter().cloned()))
            .expect("validated")
    }

    /// `log2(1/r)`.
    pub fn r_log(&self) -> f64 {
        -self.r.log2()
    }

    fn rational(&self) -> Result<IfsSpec<Rational>> {
        let w = self
            .w
            .iter()
            .map(|v| {
                v.to_rational()
                    .ok_or_else(|| Error::RequiresOrderedRationals(v.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(IfsSpec {
            r: self.r.clone(),
            w,
            probs: self.probs.clone(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormulaReport {
    pub value: f64,
    pub entropy_bits: f64,
    pub r_log: f64,
    pub caveat: &'static str,
}

/// `min{H(W) / log(1/r), 1}`.
pub fn infodim_formula<V: Support>(ifs: &IfsSpec<V>) -> FormulaReport {
    let entropy_bits = ifs.translation_dist().entropy_bits();
    let r_log = ifs.r_log();
    FormulaReport {
        value: (entropy_bits / r_log).min(1.0),
        entropy_bits,
        r_log,
        caveat: CAVEAT,
    }
}

/// Exact distribution of `X_m = Σ_{k<m} r^k W_k` for i.i.d. `W_k`.
pub fn truncated_dist<V: Support>(ifs: &IfsSpec<V>, m: usize) -> Result<DiscreteDist<V>> {
    if m < 1 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    let w = ifs.translation_dist();
    let r = V::from(ifs.r.clone());
    let mut x = w.clone();
    for _ in 1..m {
        x = w.convolve(&x.scale(&r)?)?;
    }
    Ok(x)
}

/// `k·r^m·max|w| / (1 − r)`, the truncation error measured in quantization
/// cells; the estimator is reliable when it is at most 1.
pub fn guard_value(ifs: &IfsSpec<Rational>, m: usize, k: u64) -> f64 {
    let max_w = ifs.w.iter().map(|w| w.abs()).max().expect("nonempty");
    let g = Rational::from_integer(k as i64) * ifs.r.pow(m as i32) * max_w
        / (Rational::one() - &ifs.r);
    g.to_f64()
}

/// Largest `k` with `k·r^m·max|w| / (1 − r) ≤ 1`.
pub fn recommended_k<V: Support>(ifs: &IfsSpec<V>, m: usize) -> Result<u64> {
    let q = ifs.rational()?;
    let max_w = q.w.iter().map(|w| w.abs()).max().expect("nonempty");
    if max_w.is_zero() {
        return Ok(u64::MAX);
    }
    let k = ((Rational::one() - &q.r) / (q.r.pow(m as i32) * max_w)).floor();
    Ok(k.to_u64().unwrap_or(u64::MAX))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalReport {
    pub value: f64,
    pub m: usize,
    pub k: u64,
    pub cells: usize,
    pub quantized_entropy_bits: f64,
    pub guard: f64,
    pub guard_ok: bool,
    /// A single scale cannot tell the lower and upper dimensions apart.
    pub single_scale: bool,
}

/// `H(⌊k·X̂_m⌋) / log k`, where `X̂_m` is `X_m` mapped affinely onto `[0, 1)`
/// by the hull of the attractor.
pub fn empirical_infodim<V: Support>(ifs: &IfsSpec<V>, m: usize, k: u64) -> Result<EmpiricalReport> {
    if k < 2 {
        return Err(Error::InvalidParameter("k must be at least 2".into()));
    }
    let q = ifs.rational()?;
    let x = truncated_dist(&q, m)?;
    let one_minus_r = Rational::one() - &q.r;
    let lo = q.w.iter().min().expect("nonempty").clone();
    let hi = q.w.iter().max().expect("nonempty").clone();
    let offset = &lo / &one_minus_r;
    let scale = Rational::from_integer(k as i64) * &one_minus_r / (hi - lo);
    let mut cells: FxHashMap<BigInt, Rational> = FxHashMap::default();
    for (v, p) in x.atoms() {
        let cell = ((v - &offset) * &scale).floor();
        *cells.entry(cell).or_insert_with(Rational::zero) += p;
    }
    let n = cells.len();
    let quantized = DiscreteDist::from_atoms(cells.into_iter().map(|(c, p)| (Rational::from(c), p)))?;
    let h = quantized.entropy_bits();
    let guard = guard_value(&q, m, k);
    Ok(EmpiricalReport {
        value: h / (k as f64).log2(),
        m,
        k,
        cells: n,
        quantized_entropy_bits: h,
        guard,
        guard_ok: guard <= 1.0,
        single_scale: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ExactScalar;
    use proptest::prelude::*;

    fn ifs(r: (i64, i64), w: &[i64], p: &[(i64, i64)]) -> IfsSpec<Rational> {
        IfsSpec::new(
            Rational::new(r.0, r.1),
            w.iter().map(|&x| Rational::from(x)).collect(),
            p.iter().map(|&(a, b)| Rational::new(a, b)).collect(),
        )
        .unwrap()
    }

    fn cantor() -> IfsSpec<Rational> {
        ifs((1, 3), &[0, 2], &[(1, 2), (1, 2)])
    }

    fn dyadic() -> IfsSpec<Rational> {
        ifs((1, 2), &[0, 1], &[(1, 2), (1, 2)])
    }

    #[test]
    fn validation() {
        let half = || vec![Rational::new(1, 2); 2];
        let w = || vec![Rational::from(0), Rational::from(1)];
        assert!(IfsSpec::new(Rational::from(1), w(), half()).is_err());
        assert!(IfsSpec::new(Rational::from(0), w(), half()).is_err());
        assert!(IfsSpec::new(Rational::new(1, 2), vec![Rational::from(0)], vec![Rational::from(1)]).is_err());
        assert!(IfsSpec::new(Rational::new(1, 2), vec![Rational::from(1); 2], half()).is_err());
        assert!(IfsSpec::new(Rational::new(1, 2), w(), vec![Rational::new(1, 3); 2]).is_err());
        assert!(IfsSpec::new(Rational::new(1, 2), w(), vec![Rational::from(1), Rational::from(0)]).is_err());
    }

    #[test]
    fn formula_examples() {
        assert!((infodim_formula(&dyadic()).value - 1.0).abs() < 1e-12);
        assert!((infodim_formula(&cantor()).value - 1.0 / 3f64.log2()).abs() < 1e-12);
        let quarter = ifs((1, 4), &[0, 1], &[(1, 2), (1, 2)]);
        assert!((infodim_formula(&quarter).value - 0.5).abs() < 1e-12);
        assert_eq!(infodim_formula(&cantor()).caveat, CAVEAT);
    }

    #[test]
    fn formula_accepts_symbolic_translations() {
        let s = IfsSpec::new(
            Rational::new(1, 4),
            vec![ExactScalar::zero(), ExactScalar::var("id_g")],
            vec![Rational::new(1, 2); 2],
        )
        .unwrap();
        assert!((infodim_formula(&s).value - 0.5).abs() < 1e-12);
        assert!(matches!(empirical_infodim(&s, 3, 4), Err(Error::RequiresOrderedRationals(_))));
    }

    #[test]
    fn truncation_examples() {
        assert_eq!(truncated_dist(&cantor(), 1).unwrap(), cantor().translation_dist());
        let d = truncated_dist(&dyadic(), 3).unwrap();
        let expect = DiscreteDist::uniform_on((0..8).map(|i| Rational::new(i, 4)).collect()).unwrap();
        assert_eq!(d, expect);
        let c = truncated_dist(&cantor(), 2).unwrap();
        let expect = DiscreteDist::uniform_on(
            [(0, 1), (2, 3), (2, 1), (8, 3)].iter().map(|&(a, b)| Rational::new(a, b)).collect(),
        )
        .unwrap();
        assert_eq!(c, expect);
    }

    #[test]
    fn empirical_small_cases() {
        // r = 1/2, W ∈ {0, 1}: X_8 is uniform on the 256 dyadic points of [0, 2)
        let e = empirical_infodim(&dyadic(), 8, 1 << 6).unwrap();
        assert!((e.value - 1.0).abs() < 1e-12);
        assert!(e.guard_ok);
        assert_eq!(e.cells, 64);
        let c = empirical_infodim(&cantor(), 8, 3u64.pow(5)).unwrap();
        assert!((c.value - 1.0 / 3f64.log2()).abs() < 1e-12);
        assert!(empirical_infodim(&dyadic(), 4, 1).is_err());
    }

    #[test]
    fn recommended_k_satisfies_guard() {
        let k = recommended_k(&cantor(), 20).unwrap();
        assert!(guard_value(&cantor(), 20, k) <= 1.0);
        assert!(guard_value(&cantor(), 20, k + 1) > 1.0);
        assert_eq!(recommended_k(&dyadic(), 16).unwrap(), 1 << 15);
    }

    #[test]
    fn near_deterministic_weights() {
        let eps = Rational::new(1, 1 << 20);
        let s = IfsSpec::new(
            Rational::new(1, 2),
            vec![Rational::from(0), Rational::from(1)],
            vec![Rational::one() - &eps, eps],
        )
        .unwrap();
        let k = recommended_k(&s, 12).unwrap();
        let e = empirical_infodim(&s, 12, k).unwrap();
        assert!((e.value - infodim_formula(&s).value).abs() < 0.05);
    }

    #[test]
    fn dyadic_converges_at_depth_16() {
        let k = recommended_k(&dyadic(), 16).unwrap();
        let e = empirical_infodim(&dyadic(), 16, k).unwrap();
        assert!((e.value - infodim_formula(&dyadic()).value).abs() <= 0.02);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn formula_in_unit_interval(den in 2i64..9, n in 2usize..5, seed in proptest::collection::vec(1i64..20, 4)) {
            let w: Vec<Rational> = (0..n).map(|i| Rational::from(i as i64 * 3)).collect();
            let total: i64 = seed[..n].iter().sum();
            let p: Vec<Rational> = seed[..n].iter().map(|&s| Rational::new(s, total)).collect();
            let f = infodim_formula(&IfsSpec::new(Rational::new(1, den), w, p).unwrap());
            prop_assert!(f.value > 0.0 && f.value <= 1.0);
        }

        #[test]
        fn truncation_conserves_mass(m in 1usize..6, a in 1i64..5) {
            let s = ifs((1, 3), &[0, 1, 5], &[(a, a + 2), (1, a + 2), (1, a + 2)]);
            prop_assert!(truncated_dist(&s, m).unwrap().total_mass().is_one());
        }

        #[test]
        fn refinement_moves_entropy_by_at_most_one_bit(m in 2usize..8, a in 1i64..4) {
            let s = ifs((1, 3), &[0, 1, 2], &[(a, a + 2), (1, a + 2), (1, a + 2)]);
            let k = recommended_k(&s, m).unwrap().max(2);
            let base = empirical_infodim(&s, m, k).unwrap().quantized_entropy_bits;
            for extra in 1..3 {
                let finer = empirical_infodim(&s, m + extra, k).unwrap().quantized_entropy_bits;
                prop_assert!((finer - base).abs() <= 1.0 + 1e-12);
            }
        }
    }
}
