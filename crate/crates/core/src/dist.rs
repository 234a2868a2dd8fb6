//! Finitely supported distributions with exact rational probabilities.
//!
//! Support points are any [`Support`] value (exact scalars, or plain
//! rationals on the fast path). Collisions in sums are merged by exact
//! equality; only the final entropy is evaluated in floating point.

use std::collections::hash_map::Entry;
use std::fmt;
use std::hash::Hash;
use std::sync::atomic::{AtomicUsize, Ordering};

use num_traits::{Float, One, Signed, Zero};
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::parse::parse_scalar;
use crate::poly::{Coeff, Poly};
use crate::rational::Rational;
use crate::sumset::FiniteSet;

/// Default cap on the number of atoms any single operation may materialize.
pub const DEFAULT_ATOM_BUDGET: usize = 5_000_000;

static ATOM_BUDGET: AtomicUsize = AtomicUsize::new(DEFAULT_ATOM_BUDGET);

/// Current process-wide atom budget.
pub fn atom_budget() -> usize {
    ATOM_BUDGET.load(Ordering::Relaxed)
}

/// Overrides the process-wide atom budget used by the non-`_within` operations.
pub fn set_atom_budget(budget: usize) {
    ATOM_BUDGET.store(budget.max(1), Ordering::Relaxed);
}

/// Values that can serve as support points: a commutative ring with exact,
/// hashable equality.
pub trait Support:
    Clone + Eq + Hash + Ord + fmt::Debug + fmt::Display + Send + Sync + From<Rational> + 'static
{
    fn is_zero_value(&self) -> bool;
    fn add_ref(&self, other: &Self) -> Self;
    fn mul_ref(&self, other: &Self) -> Self;
    /// The value as a rational, if it has no symbolic part.
    fn to_rational(&self) -> Option<Rational>;
    fn parse_value(s: &str) -> Result<Self>;
}

impl Support for Rational {
    fn is_zero_value(&self) -> bool {
        self.is_zero()
    }
    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn to_rational(&self) -> Option<Rational> {
        Some(self.clone())
    }
    fn parse_value(s: &str) -> Result<Self> {
        parse_scalar(s)?
            .as_rational()
            .ok_or_else(|| Error::RequiresOrderedRationals(s.to_string()))
    }
}

impl<C: Coeff> Support for Poly<C> {
    fn is_zero_value(&self) -> bool {
        self.is_zero()
    }
    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn to_rational(&self) -> Option<Rational> {
        self.as_rational()
    }
    fn parse_value(s: &str) -> Result<Self> {
        let e = parse_scalar(s)?;
        Ok(Poly::from_terms(
            e.terms().into_iter().map(|(m, c)| (m, C::from_rational(&c))),
        ))
    }
}

/// A probability distribution on finitely many points.
#[derive(Clone)]
pub struct DiscreteDist<V: Support> {
    atoms: FxHashMap<V, Rational>,
}

impl<V: Support> PartialEq for DiscreteDist<V> {
    fn eq(&self, other: &Self) -> bool {
        self.atoms == other.atoms
    }
}

impl<V: Support> Eq for DiscreteDist<V> {}

impl<V: Support> DiscreteDist<V> {
    /// Unit mass at `v`.
    pub fn point(v: V) -> Self {
        let mut atoms = FxHashMap::default();
        atoms.insert(v, Rational::one());
        DiscreteDist { atoms }
    }

    /// Uniform distribution on pairwise distinct points.
    pub fn uniform_on(support: Vec<V>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::EmptySupport);
        }
        let p = Rational::from_bigints(1.into(), support.len().into());
        let mut atoms = FxHashMap::with_capacity_and_hasher(support.len(), Default::default());
        for v in support {
            if atoms.contains_key(&v) {
                return Err(Error::SupportNotDistinct(v.to_string()));
            }
            atoms.insert(v, p.clone());
        }
        Ok(DiscreteDist { atoms })
    }

    /// Validating constructor: probabilities must be positive, points
    /// distinct, and the total exactly one.
    pub fn from_atoms(atoms: impl IntoIterator<Item = (V, Rational)>) -> Result<Self> {
        let mut map = FxHashMap::default();
        let mut total = Rational::zero();
        for (v, p) in atoms {
            if !p.is_positive() {
                return Err(Error::InvalidProbabilities(format!(
                    "probability {} at {} is not positive",
                    p, v
                )));
            }
            total += &p;
            if map.contains_key(&v) {
                return Err(Error::SupportNotDistinct(v.to_string()));
            }
            map.insert(v, p);
        }
        if map.is_empty() {
            return Err(Error::EmptySupport);
        }
        if !total.is_one() {
            return Err(Error::InvalidProbabilities(format!(
                "probabilities sum to {}, not 1",
                total
            )));
        }
        Ok(DiscreteDist { atoms: map })
    }

    /// Normalizes positive rational weights into a distribution.
    pub fn from_weights(support: Vec<V>, weights: &[Rational]) -> Result<Self> {
        if support.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: support.len(),
                found: weights.len(),
            });
        }
        let total = weights.iter().fold(Rational::zero(), |acc, w| acc + w);
        if !total.is_positive() {
            return Err(Error::InvalidProbabilities("weights sum to zero".into()));
        }
        Self::from_atoms(
            support
                .into_iter()
                .zip(weights.iter())
                .map(|(v, w)| (v, w / &total)),
        )
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn prob(&self, v: &V) -> Option<&Rational> {
        self.atoms.get(v)
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&V, &Rational)> {
        self.atoms.iter()
    }

    /// Atoms in ascending support order, for deterministic output.
    pub fn sorted_atoms(&self) -> Vec<(V, Rational)> {
        let mut v: Vec<_> = self.atoms.iter().map(|(x, p)| (x.clone(), p.clone())).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }

    /// Exact sum of the probabilities (always one for a valid distribution).
    pub fn total_mass(&self) -> Rational {
        self.atoms.values().fold(Rational::zero(), |acc, p| acc + p)
    }

    pub fn is_deterministic(&self) -> bool {
        self.atoms.len() == 1
    }

    /// Distribution of `c·X`.
    pub fn scale(&self, c: &V) -> Result<Self> {
        if c.is_zero_value() {
            return Err(Error::DegenerateScaling);
        }
        Ok(DiscreteDist {
            atoms: self
                .atoms
                .iter()
                .map(|(x, p)| (c.mul_ref(x), p.clone()))
                .collect(),
        })
    }

    /// Distribution of `−X`.
    pub fn negate(&self) -> Self {
        self.scale(&V::from(-Rational::one()))
            .expect("-1 is a nonzero scale")
    }

    /// Applies an injective map to the support points.
    pub fn map_support<W: Support>(&self, f: impl Fn(&V) -> W) -> Result<DiscreteDist<W>> {
        DiscreteDist::from_atoms(self.atoms.iter().map(|(x, p)| (f(x), p.clone())))
    }

    /// Distribution of `X + Y` for independent `X ~ self`, `Y ~ other`,
    /// using the process-wide atom budget.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        self.convolve_within(other, atom_budget())
    }

    pub fn convolve_within(&self, other: &Self, budget: usize) -> Result<Self> {
        let (a, b) = if self.len() >= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        let cap = a.len().saturating_mul(b.len()).min(budget).min(1 << 22);
        let mut out: FxHashMap<V, Rational> =
            FxHashMap::with_capacity_and_hasher(cap, Default::default());
        for (x, p) in a.atoms.iter() {
            for (y, q) in b.atoms.iter() {
                let s = x.add_ref(y);
                let pq = p * q;
                let len = out.len();
                match out.entry(s) {
                    Entry::Occupied(mut e) => *e.get_mut() += &pq,
                    Entry::Vacant(e) => {
                        if len >= budget {
                            return Err(Error::BudgetExceeded { budget });
                        }
                        e.insert(pq);
                    }
                }
            }
        }
        Ok(DiscreteDist { atoms: out })
    }

    /// Distribution of `Σ c_j X_j` for independent `X_j ~ dists[j]`; terms
    /// with a zero coefficient are dropped.
    pub fn linear_combination(coeffs: &[V], dists: &[Self]) -> Result<Self> {
        Self::linear_combination_within(coeffs, dists, atom_budget())
    }

    pub fn linear_combination_within(coeffs: &[V], dists: &[Self], budget: usize) -> Result<Self> {
        if coeffs.len() != dists.len() {
            return Err(Error::DimensionMismatch {
                expected: coeffs.len(),
                found: dists.len(),
            });
        }
        let mut acc: Option<Self> = None;
        for (c, d) in coeffs.iter().zip(dists) {
            if c.is_zero_value() {
                continue;
            }
            let term = d.scale(c)?;
            acc = Some(match acc {
                None => term,
                Some(a) => a.convolve_within(&term, budget)?,
            });
        }
        acc.ok_or(Error::DegenerateCombination)
    }

    /// Shannon entropy in bits.
    pub fn entropy_bits(&self) -> f64 {
        self.entropy_as::<f64>()
    }

    /// Shannon entropy in bits, accumulated in `F`. Equal probabilities are
    /// grouped and the sum is compensated, so results for large supports are
    /// accurate to a few ulps.
    pub fn entropy_as<F: Float>(&self) -> F {
        let mut groups: FxHashMap<&Rational, u64> = FxHashMap::default();
        for p in self.atoms.values() {
            *groups.entry(p).or_insert(0) += 1;
        }
        let mut keys: Vec<(&Rational, u64)> = groups.into_iter().collect();
        keys.sort_by(|a, b| a.0.cmp(b.0));
        let mut sum = F::zero();
        let mut comp = F::zero();
        for (p, n) in keys {
            if p.is_one() {
                continue;
            }
            let pf = F::from(p.to_f64()).unwrap_or_else(F::nan);
            let lf = F::from(p.log2()).unwrap_or_else(F::nan);
            let term = -(F::from(n).unwrap_or_else(F::nan) * pf * lf);
            // Neumaier summation
            let t = sum + term;
            if sum.abs() >= term.abs() {
                comp = comp + ((sum - t) + term);
            } else {
                comp = comp + ((term - t) + sum);
            }
            sum = t;
        }
        (sum + comp).max(F::zero())
    }

    pub fn support_set(&self) -> FiniteSet<V> {
        FiniteSet::from_unique(self.atoms.keys().cloned())
    }
}

impl<V: Support> fmt::Debug for DiscreteDist<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, (v, p)) in self.sorted_atoms().iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}: {}", v, p)?;
        }
        f.write_str("}")
    }
}

#[derive(serde::Serialize, serde::Deserialize)]
struct AtomRepr<V> {
    value: V,
    prob: Rational,
}

#[derive(serde::Serialize, serde::Deserialize)]
struct DistRepr<V> {
    atoms: Vec<AtomRepr<V>>,
}

/// Serialized as `{"atoms": [{"value": …, "prob": "p/q"}, …]}` in sorted order.
impl<V: Support + serde::Serialize> serde::Serialize for DiscreteDist<V> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DistRepr {
            atoms: self
                .sorted_atoms()
                .into_iter()
                .map(|(value, prob)| AtomRepr { value, prob })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de, V: Support + serde::Deserialize<'de>> serde::Deserialize<'de> for DiscreteDist<V> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = DistRepr::<V>::deserialize(d)?;
        DiscreteDist::from_atoms(repr.atoms.into_iter().map(|a| (a.value, a.prob)))
            .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Dist, ExactScalar};

    fn s(x: i64) -> ExactScalar {
        ExactScalar::from_integer(x)
    }

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn bern() -> Dist {
        Dist::uniform_on(vec![s(0), s(1)]).unwrap()
    }

    fn dist(pairs: &[(i64, Rational)]) -> Dist {
        Dist::from_atoms(pairs.iter().map(|(v, p)| (s(*v), p.clone()))).unwrap()
    }

    #[test]
    fn uniform_on_examples() {
        let d = bern();
        assert_eq!(d, dist(&[(0, r(1, 2)), (1, r(1, 2))]));
        let g1 = ExactScalar::var("dt_g1");
        let g2 = ExactScalar::var("dt_g2");
        let t = Dist::uniform_on(vec![g1.clone(), g2.clone(), &g1 + &g2]).unwrap();
        assert_eq!(t.len(), 3);
        assert!(t.atoms().all(|(_, p)| *p == r(1, 3)));
        let e = Dist::uniform_on((0..8).map(s).collect()).unwrap();
        assert!(e.atoms().all(|(_, p)| *p == r(1, 8)));
        assert!(matches!(Dist::uniform_on(vec![]), Err(Error::EmptySupport)));
        assert!(matches!(
            Dist::uniform_on(vec![s(1), s(1)]),
            Err(Error::SupportNotDistinct(_))
        ));
    }

    #[test]
    fn scale_examples() {
        let d = bern();
        assert_eq!(d.scale(&s(1)).unwrap(), d);
        let g1 = ExactScalar::var("dt_g1");
        let scaled = d.scale(&g1).unwrap();
        assert_eq!(scaled, Dist::uniform_on(vec![s(0), g1]).unwrap());
        let skew = dist(&[(0, r(1, 4)), (1, r(3, 4))]);
        assert_eq!(skew.scale(&s(-1)).unwrap(), dist(&[(0, r(1, 4)), (-1, r(3, 4))]));
        assert!(matches!(d.scale(&s(0)), Err(Error::DegenerateScaling)));
    }

    #[test]
    fn convolve_examples() {
        let tri = dist(&[(0, r(1, 4)), (1, r(1, 2)), (2, r(1, 4))]);
        assert_eq!(bern().convolve(&bern()).unwrap(), tri);
        assert_eq!(tri.convolve(&Dist::point(s(0))).unwrap(), tri);
        let a = Dist::uniform_on(vec![s(0), ExactScalar::var("dt_g1")]).unwrap();
        let b = Dist::uniform_on(vec![s(0), ExactScalar::var("dt_g2")]).unwrap();
        let c = a.convolve(&b).unwrap();
        assert_eq!(c.len(), 4);
        assert!(c.atoms().all(|(_, p)| *p == r(1, 4)));
    }

    #[test]
    fn budget_is_enforced() {
        let a = Dist::uniform_on((0..10).map(s).collect()).unwrap();
        let b = Dist::uniform_on((0..10).map(|k| s(100 * k)).collect()).unwrap();
        assert!(matches!(
            a.convolve_within(&b, 50),
            Err(Error::BudgetExceeded { budget: 50 })
        ));
        assert_eq!(a.convolve_within(&b, 100).unwrap().len(), 100);
    }

    #[test]
    fn linear_combination_examples() {
        let d = bern();
        assert_eq!(Dist::linear_combination(&[s(1)], &[d.clone()]).unwrap(), d);
        let two = Dist::linear_combination(&[s(1), s(1)], &[d.clone(), d.clone()]).unwrap();
        assert_eq!(two, bern().convolve(&bern()).unwrap());

        // binomial(3, 1/2) by brute force over the 8 equally likely outcomes
        let mut counts = [0i64; 4];
        for mask in 0..8u32 {
            counts[mask.count_ones() as usize] += 1;
        }
        let oracle = dist(
            &counts
                .iter()
                .enumerate()
                .map(|(k, c)| (k as i64, r(*c, 8)))
                .collect::<Vec<_>>(),
        );
        let three = Dist::linear_combination(&[s(1), s(1), s(1)], &[d.clone(), d.clone(), d.clone()]).unwrap();
        assert_eq!(three, oracle);
        assert_eq!(oracle, dist(&[(0, r(1, 8)), (1, r(3, 8)), (2, r(3, 8)), (3, r(1, 8))]));

        let zero_dropped = Dist::linear_combination(&[s(0), s(1)], &[d.clone(), d.clone()]).unwrap();
        assert_eq!(zero_dropped, d);
        assert!(matches!(
            Dist::linear_combination(&[s(0), s(0)], &[d.clone(), d.clone()]),
            Err(Error::DegenerateCombination)
        ));
        assert!(matches!(
            Dist::linear_combination(&[s(1)], &[d.clone(), d]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(Dist::point(s(0)).entropy_bits(), 0.0);
        let u8 = Dist::uniform_on((0..8).map(s).collect()).unwrap();
        assert!((u8.entropy_bits() - 3.0).abs() < 1e-15);
        let tri = dist(&[(0, r(1, 4)), (1, r(1, 2)), (2, r(1, 4))]);
        assert!((tri.entropy_bits() - 1.5).abs() < 1e-15);
        assert!((tri.entropy_as::<f32>() - 1.5f32).abs() < 1e-6);
    }

    #[test]
    fn support_set_examples() {
        assert_eq!(Dist::point(s(0)).support_set().sorted(), vec![s(0)]);
        let u3 = Dist::uniform_on(vec![s(0), s(1), s(2)]).unwrap();
        assert_eq!(u3.support_set().sorted(), vec![s(0), s(1), s(2)]);
        assert_eq!(bern().convolve(&bern()).unwrap().support_set().sorted(), vec![s(0), s(1), s(2)]);
    }

    #[test]
    fn from_atoms_validation() {
        assert!(matches!(
            Dist::from_atoms([(s(0), r(1, 2)), (s(1), r(1, 3))]),
            Err(Error::InvalidProbabilities(_))
        ));
        assert!(matches!(
            Dist::from_atoms([(s(0), r(0, 1)), (s(1), r(1, 1))]),
            Err(Error::InvalidProbabilities(_))
        ));
        assert!(matches!(
            Dist::from_atoms([(s(0), r(1, 2)), (s(0), r(1, 2))]),
            Err(Error::SupportNotDistinct(_))
        ));
    }

    #[test]
    fn rational_fast_path_matches_symbolic_path() {
        let d1 = DiscreteDist::<Rational>::from_weights(
            (0..5).map(Rational::from_integer).collect(),
            &[r(1, 1), r(2, 1), r(3, 1), r(4, 1), r(5, 1)],
        )
        .unwrap();
        let d2 = d1.map_support(|x| ExactScalar::from_rational(x)).unwrap();
        let a = d1.convolve(&d1.negate()).unwrap();
        let b = d2.convolve(&d2.negate()).unwrap();
        assert_eq!(a.entropy_bits(), b.entropy_bits());
        assert_eq!(a.len(), b.len());
    }
}
