//! Sumsets, arithmetic progressions, and the entropy sumset inequalities.

use num_traits::{Signed, Zero};
use rustc_hash::FxHashSet;
use serde::Serialize;

use crate::dist::{DiscreteDist, Support};
use crate::error::{Error, Result};
use crate::rational::Rational;

/// A finite set of exact values.
#[derive(Clone, PartialEq, Eq)]
pub struct FiniteSet<V: Support> {
    elements: FxHashSet<V>,
}

impl<V: Support> FiniteSet<V> {
    /// Builds a set, merging duplicates.
    pub fn new(elements: impl IntoIterator<Item = V>) -> Self {
        FiniteSet {
            elements: elements.into_iter().collect(),
        }
    }

    pub(crate) fn from_unique(elements: impl IntoIterator<Item = V>) -> Self {
        Self::new(elements)
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, v: &V) -> bool {
        self.elements.contains(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = &V> {
        self.elements.iter()
    }

    pub fn sorted(&self) -> Vec<V> {
        let mut v: Vec<V> = self.elements.iter().cloned().collect();
        v.sort();
        v
    }

    /// `{c·x : x ∈ self}`.
    pub fn scale(&self, c: &V) -> Self {
        Self::new(self.elements.iter().map(|x| c.mul_ref(x)))
    }
}

impl<V: Support> std::fmt::Debug for FiniteSet<V> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.sorted()).finish()
    }
}

/// `A + B = {a + b}` with exact collision merging.
pub fn sumset<V: Support>(a: &FiniteSet<V>, b: &FiniteSet<V>) -> Result<FiniteSet<V>> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySupport);
    }
    let mut out = FxHashSet::with_capacity_and_hasher(a.len() * b.len(), Default::default());
    for x in a.iter() {
        for y in b.iter() {
            out.insert(x.add_ref(y));
        }
    }
    Ok(FiniteSet { elements: out })
}

/// `A − B`, computed as `A + (−1)·B`.
pub fn difference_set<V: Support>(a: &FiniteSet<V>, b: &FiniteSet<V>) -> Result<FiniteSet<V>> {
    sumset(a, &b.scale(&V::from(-Rational::from_integer(1))))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TrivialBounds {
    pub size_a: usize,
    pub size_b: usize,
    pub size_sum: usize,
    /// `max(|A|, |B|) ≤ |A + B|`
    pub lower_ok: bool,
    /// `|A + B| ≤ |A|·|B|`
    pub upper_ok: bool,
}

pub fn check_trivial_bounds<V: Support>(a: &FiniteSet<V>, b: &FiniteSet<V>) -> Result<TrivialBounds> {
    let s = sumset(a, b)?;
    Ok(TrivialBounds {
        size_a: a.len(),
        size_b: b.len(),
        size_sum: s.len(),
        lower_ok: a.len().max(b.len()) <= s.len(),
        upper_ok: s.len() <= a.len() * b.len(),
    })
}

/// `{start, start + step, …}` with `length` elements. Singletons have no step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Progression {
    pub start: Rational,
    pub step: Option<Rational>,
    pub length: usize,
}

/// Decomposes a set of rationals as an arithmetic progression with positive
/// step, if it is one.
pub fn is_arithmetic_progression<V: Support>(a: &FiniteSet<V>) -> Result<Option<Progression>> {
    if a.is_empty() {
        return Err(Error::EmptySupport);
    }
    let mut vals = Vec::with_capacity(a.len());
    for v in a.iter() {
        vals.push(
            v.to_rational()
                .ok_or_else(|| Error::RequiresOrderedRationals(v.to_string()))?,
        );
    }
    vals.sort();
    if vals.len() == 1 {
        return Ok(Some(Progression {
            start: vals[0].clone(),
            step: None,
            length: 1,
        }));
    }
    let step = &vals[1] - &vals[0];
    if vals.windows(2).all(|w| &w[1] - &w[0] == step) {
        Ok(Some(Progression {
            start: vals[0].clone(),
            step: Some(step),
            length: vals.len(),
        }))
    } else {
        Ok(None)
    }
}

/// Entropies of `U`, `V`, `U + V`, `U − V` and the slack (right side minus
/// left side) of each sumset-type entropy inequality.
#[derive(Debug, Clone, Serialize)]
pub struct InequalitySlacks {
    pub h_u: f64,
    pub h_v: f64,
    pub h_sum: f64,
    pub h_diff: f64,
    /// `3H(U−V) − [H(U+V) + H(U) + H(V)]`
    pub sum_difference: f64,
    /// `3H(U+V) − [H(U−V) + H(U) + H(V)]`
    pub difference_sum: f64,
    /// `½H(U+V) + ⅔(H(U) + H(V)) − H(U−V)`
    pub ruzsa: f64,
    /// `(5/2)H(U+V) − (5/3)H(U−V)`
    pub combined: f64,
    /// `H(U+V) / H(U−V)`, absent when `H(U−V) = 0`.
    pub sum_difference_ratio: Option<f64>,
}

impl InequalitySlacks {
    pub fn min_slack(&self) -> f64 {
        self.sum_difference
            .min(self.difference_sum)
            .min(self.ruzsa)
            .min(self.combined)
    }
}

/// Evaluates the entropy inequality suite for independent `U`, `V`.
pub fn entropy_inequality_suite<V: Support>(
    u: &DiscreteDist<V>,
    v: &DiscreteDist<V>,
) -> Result<InequalitySlacks> {
    let h_u = u.entropy_bits();
    let h_v = v.entropy_bits();
    let h_sum = u.convolve(v)?.entropy_bits();
    let h_diff = u.convolve(&v.negate())?.entropy_bits();
    Ok(InequalitySlacks {
        h_u,
        h_v,
        h_sum,
        h_diff,
        sum_difference: 3.0 * h_diff - (h_sum + h_u + h_v),
        difference_sum: 3.0 * h_sum - (h_diff + h_u + h_v),
        ruzsa: 0.5 * h_sum + (2.0 / 3.0) * (h_u + h_v) - h_diff,
        combined: 2.5 * h_sum - (5.0 / 3.0) * h_diff,
        sum_difference_ratio: (h_diff > 0.0).then(|| h_sum / h_diff),
    })
}

/// Whether `|A + B| = |A| + |B| − 1`, the minimum for sets of rationals.
pub fn attains_progression_bound<V: Support>(a: &FiniteSet<V>, b: &FiniteSet<V>) -> Result<bool> {
    Ok(sumset(a, b)?.len() + 1 == a.len() + b.len())
}

/// The structural side of the equality case of `|A + B| ≥ |A| + |B| − 1`:
/// one set is a singleton, or both are progressions with the same step.
pub fn same_step_progressions<V: Support>(a: &FiniteSet<V>, b: &FiniteSet<V>) -> Result<bool> {
    if a.len() == 1 || b.len() == 1 {
        return Ok(true);
    }
    let (pa, pb) = (is_arithmetic_progression(a)?, is_arithmetic_progression(b)?);
    Ok(match (pa, pb) {
        (Some(x), Some(y)) => match (x.step, y.step) {
            (Some(s), Some(t)) => s.abs() == t.abs() && !s.is_zero(),
            _ => true,
        },
        _ => false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Dist, ExactScalar, ScalarSet};

    fn set(xs: &[i64]) -> ScalarSet {
        ScalarSet::new(xs.iter().map(|&x| ExactScalar::from_integer(x)))
    }

    #[test]
    fn sumset_examples() {
        let a = set(&[0, 1, 2]);
        let s = sumset(&a, &a).unwrap();
        assert_eq!(s, set(&[0, 1, 2, 3, 4]));
        assert_eq!(s.len(), 3 + 3 - 1);

        // generic position: enumerate all 9 sums and check they are distinct
        let (x, y) = ([0i64, 1, 4], [0i64, 2, 9]);
        let mut sums: Vec<i64> = x.iter().flat_map(|a| y.iter().map(move |b| a + b)).collect();
        sums.sort();
        sums.dedup();
        assert_eq!(sums.len(), 9);
        assert_eq!(sumset(&set(&x), &set(&y)).unwrap().len(), 9);

        assert_eq!(sumset(&a, &set(&[0])).unwrap(), a);
        assert!(matches!(sumset(&a, &set(&[])), Err(Error::EmptySupport)));
    }

    #[test]
    fn trivial_bounds_and_progressions() {
        let b = check_trivial_bounds(&set(&[3, 5, 7]), &set(&[10, 12, 14, 16])).unwrap();
        assert!(b.lower_ok && b.upper_ok);
        assert_eq!(b.size_sum, 3 + 4 - 1);
        assert!(attains_progression_bound(&set(&[3, 5, 7]), &set(&[10, 12, 14, 16])).unwrap());
        assert!(!attains_progression_bound(&set(&[0, 1, 3]), &set(&[0, 1, 2])).unwrap());
    }

    #[test]
    fn progression_examples() {
        let p = is_arithmetic_progression(&set(&[9, 3, 7, 5])).unwrap().unwrap();
        assert_eq!(p.start, Rational::from(3));
        assert_eq!(p.step, Some(Rational::from(2)));
        assert_eq!(p.length, 4);
        assert_eq!(is_arithmetic_progression(&set(&[0, 1, 3])).unwrap(), None);
        let single = is_arithmetic_progression(&set(&[5])).unwrap().unwrap();
        assert_eq!((single.length, single.step), (1, None));
        let sym = ScalarSet::new([ExactScalar::var("ss_g"), ExactScalar::from_integer(1)]);
        assert!(matches!(
            is_arithmetic_progression(&sym),
            Err(Error::RequiresOrderedRationals(_))
        ));
    }

    #[test]
    fn inequality_suite_on_fair_bits() {
        let u = Dist::uniform_on(vec![ExactScalar::from_integer(0), ExactScalar::from_integer(1)]).unwrap();
        let s = entropy_inequality_suite(&u, &u).unwrap();
        assert!((s.h_sum - 1.5).abs() < 1e-12 && (s.h_diff - 1.5).abs() < 1e-12);
        assert!((s.sum_difference - 1.0).abs() < 1e-12);
        assert!((s.ruzsa - (0.75 + 4.0 / 3.0 - 1.5)).abs() < 1e-12);
        assert!((s.combined - 1.25).abs() < 1e-12);
    }

    #[test]
    fn inequality_suite_with_point_mass() {
        let u = Dist::point(ExactScalar::from_integer(4));
        let v = Dist::from_atoms([
            (ExactScalar::from_integer(0), Rational::new(1, 5)),
            (ExactScalar::from_integer(3), Rational::new(4, 5)),
        ])
        .unwrap();
        let s = entropy_inequality_suite(&u, &v).unwrap();
        let hv = v.entropy_bits();
        assert!((s.h_sum - hv).abs() < 1e-12 && (s.h_diff - hv).abs() < 1e-12);
        assert!((s.sum_difference - hv).abs() < 1e-12);
    }
}
