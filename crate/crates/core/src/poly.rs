//! Exact scalars as multivariate polynomials over formal generators.
//!
//! Generators stand for algebraically independent reals, so two scalars are
//! equal exactly when their canonical term lists coincide. Monomials are
//! interned process-wide and a polynomial stores `(MonoId, coefficient)`
//! pairs sorted by id, which keeps the hot path of distribution convolution
//! (adding and hashing) free of locks and allocation-light.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock, RwLock};

use num_rational::BigRational;
use num_traits::{Float, Num, One, Signed, ToPrimitive, Zero};
use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Coefficient field of a [`Poly`].
pub trait Coeff:
    Clone + Eq + Hash + Ord + fmt::Debug + fmt::Display + Send + Sync + Num + Signed + 'static
{
    fn from_rational(q: &Rational) -> Self;
    fn to_rational(&self) -> Rational;
    fn to_f64(&self) -> f64;
}

impl Coeff for Rational {
    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }
    fn to_rational(&self) -> Rational {
        self.clone()
    }
    fn to_f64(&self) -> f64 {
        Rational::to_f64(self)
    }
}

impl Coeff for BigRational {
    fn from_rational(q: &Rational) -> Self {
        q.to_big()
    }
    fn to_rational(&self) -> Rational {
        Rational::from_big(self.clone())
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

// ---------------------------------------------------------------------------
// generators

/// A formal generator, interned by name.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Generator(u32);

#[derive(Default)]
struct GeneratorTable {
    names: Vec<Arc<str>>,
    ids: HashMap<Arc<str>, u32>,
}

fn generators() -> &'static RwLock<GeneratorTable> {
    static TABLE: OnceLock<RwLock<GeneratorTable>> = OnceLock::new();
    TABLE.get_or_init(Default::default)
}

impl Generator {
    /// Returns the generator with this name, registering it on first use.
    pub fn named(name: &str) -> Generator {
        if let Some(&id) = generators().read().unwrap().ids.get(name) {
            return Generator(id);
        }
        let mut t = generators().write().unwrap();
        if let Some(&id) = t.ids.get(name) {
            return Generator(id);
        }
        let id = t.names.len() as u32;
        let name: Arc<str> = Arc::from(name);
        t.names.push(name.clone());
        t.ids.insert(name, id);
        Generator(id)
    }

    pub fn name(&self) -> Arc<str> {
        generators().read().unwrap().names[self.0 as usize].clone()
    }
}

impl fmt::Debug for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

// ---------------------------------------------------------------------------
// monomials

/// Product of generator powers. Exponents are positive; the empty product is 1.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial {
    powers: SmallVec<[(Generator, u32); 2]>,
}

impl Monomial {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn var(g: Generator) -> Self {
        Self::from_powers([(g, 1)])
    }

    pub fn from_powers(powers: impl IntoIterator<Item = (Generator, u32)>) -> Self {
        let mut v: SmallVec<[(Generator, u32); 2]> =
            powers.into_iter().filter(|&(_, e)| e > 0).collect();
        v.sort_unstable_by_key(|&(g, _)| g);
        let mut out: SmallVec<[(Generator, u32); 2]> = SmallVec::new();
        for (g, e) in v {
            match out.last_mut() {
                Some((lg, le)) if *lg == g => *le += e,
                _ => out.push((g, e)),
            }
        }
        Monomial { powers: out }
    }

    pub fn is_one(&self) -> bool {
        self.powers.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.powers.iter().map(|&(_, e)| e).sum()
    }

    pub fn powers(&self) -> &[(Generator, u32)] {
        &self.powers
    }

    pub fn exponent(&self, g: Generator) -> u32 {
        self.powers
            .iter()
            .find(|&&(h, _)| h == g)
            .map_or(0, |&(_, e)| e)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial::from_powers(self.powers.iter().chain(other.powers.iter()).copied())
    }

    fn named_powers(&self) -> Vec<(Arc<str>, u32)> {
        let mut v: Vec<_> = self.powers.iter().map(|&(g, e)| (g.name(), e)).collect();
        v.sort();
        v
    }

    /// Graded lexicographic order on generator names: higher degree first is
    /// `Greater`; ties go to the larger exponent on the first differing
    /// generator in name order.
    pub fn grlex_cmp(&self, other: &Monomial) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| lex_cmp(&self.named_powers(), &other.named_powers()))
    }
}

fn lex_cmp(a: &[(Arc<str>, u32)], b: &[(Arc<str>, u32)]) -> Ordering {
    let (mut i, mut j) = (0, 0);
    loop {
        match (a.get(i), b.get(j)) {
            (None, None) => return Ordering::Equal,
            (Some(_), None) => return Ordering::Greater,
            (None, Some(_)) => return Ordering::Less,
            (Some((na, ea)), Some((nb, eb))) => match na.cmp(nb) {
                // `a` mentions a generator that sorts earlier than anything in `b`
                Ordering::Less => return Ordering::Greater,
                Ordering::Greater => return Ordering::Less,
                Ordering::Equal => {
                    if ea != eb {
                        return ea.cmp(eb);
                    }
                    i += 1;
                    j += 1;
                }
            },
        }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return f.write_str("1");
        }
        for (k, (name, e)) in self.named_powers().iter().enumerate() {
            if k > 0 {
                f.write_str("*")?;
            }
            if *e == 1 {
                write!(f, "{}", name)?;
            } else {
                write!(f, "{}^{}", name, e)?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Process-wide handle of an interned monomial. `MonoId::ONE` is the constant.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct MonoId(u32);

impl MonoId {
    pub const ONE: MonoId = MonoId(0);

    pub fn of(m: &Monomial) -> MonoId {
        if m.is_one() {
            return MonoId::ONE;
        }
        if let Some(&id) = monomials().read().unwrap().ids.get(m) {
            return id;
        }
        let mut t = monomials().write().unwrap();
        if let Some(&id) = t.ids.get(m) {
            return id;
        }
        let id = MonoId(t.list.len() as u32);
        t.list.push(m.clone());
        t.ids.insert(m.clone(), id);
        id
    }

    pub fn monomial(self) -> Monomial {
        if self == MonoId::ONE {
            return Monomial::one();
        }
        monomials().read().unwrap().list[self.0 as usize].clone()
    }

    fn mul(self, other: MonoId) -> MonoId {
        if self == MonoId::ONE {
            return other;
        }
        if other == MonoId::ONE {
            return self;
        }
        let prod = {
            let t = monomials().read().unwrap();
            t.list[self.0 as usize].mul(&t.list[other.0 as usize])
        };
        MonoId::of(&prod)
    }
}

struct MonomialTable {
    list: Vec<Monomial>,
    ids: FxHashMap<Monomial, MonoId>,
}

fn monomials() -> &'static RwLock<MonomialTable> {
    static TABLE: OnceLock<RwLock<MonomialTable>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut ids = FxHashMap::default();
        ids.insert(Monomial::one(), MonoId::ONE);
        RwLock::new(MonomialTable {
            list: vec![Monomial::one()],
            ids,
        })
    })
}

// ---------------------------------------------------------------------------
// polynomials

/// A polynomial with coefficients in `C`, always held in canonical form:
/// terms sorted by monomial id, no zero coefficients, zero is the empty list.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly<C> {
    terms: Box<[(MonoId, C)]>,
}

impl<C: Coeff> Poly<C> {
    pub fn zero() -> Self {
        Poly {
            terms: Box::new([]),
        }
    }

    pub fn one() -> Self {
        Self::constant(C::one())
    }

    pub fn constant(c: C) -> Self {
        if c.is_zero() {
            Self::zero()
        } else {
            Poly {
                terms: Box::new([(MonoId::ONE, c)]),
            }
        }
    }

    pub fn from_rational(q: &Rational) -> Self {
        Self::constant(C::from_rational(q))
    }

    pub fn from_integer(n: i64) -> Self {
        Self::from_rational(&Rational::from_integer(n))
    }

    pub fn generator(g: Generator) -> Self {
        Self::monomial(&Monomial::var(g), C::one())
    }

    /// Shorthand for the generator with the given name.
    pub fn var(name: &str) -> Self {
        Self::generator(Generator::named(name))
    }

    pub fn monomial(m: &Monomial, c: C) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Poly {
            terms: Box::new([(MonoId::of(m), c)]),
        }
    }

    /// Builds the canonical polynomial from arbitrary (possibly repeated or
    /// zero) terms.
    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, C)>) -> Self {
        Self::from_id_terms(terms.into_iter().map(|(m, c)| (MonoId::of(&m), c)))
    }

    fn from_id_terms(terms: impl IntoIterator<Item = (MonoId, C)>) -> Self {
        let mut v: Vec<(MonoId, C)> = terms.into_iter().collect();
        v.sort_by_key(|(m, _)| *m);
        let mut out: Vec<(MonoId, C)> = Vec::with_capacity(v.len());
        for (m, c) in v {
            match out.last_mut() {
                Some((lm, lc)) if *lm == m => *lc = lc.clone() + c,
                _ => out.push((m, c)),
            }
        }
        out.retain(|(_, c)| !c.is_zero());
        Poly {
            terms: out.into_boxed_slice(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms[0].0 == MonoId::ONE)
    }

    /// The value if this polynomial has no generator terms.
    pub fn as_constant(&self) -> Option<C> {
        match &*self.terms {
            [] => Some(C::zero()),
            [(m, c)] if *m == MonoId::ONE => Some(c.clone()),
            _ => None,
        }
    }

    pub fn as_rational(&self) -> Option<Rational> {
        self.as_constant().map(|c| c.to_rational())
    }

    /// The single generator if this polynomial is exactly that generator.
    pub fn as_generator(&self) -> Option<Generator> {
        match &*self.terms {
            [(m, c)] if c.is_one() => match m.monomial().powers() {
                [(g, 1)] => Some(*g),
                _ => None,
            },
            _ => None,
        }
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|(m, _)| m.monomial().degree())
            .max()
            .unwrap_or(0)
    }

    /// Terms in graded-lex descending order on generator names.
    pub fn terms(&self) -> Vec<(Monomial, C)> {
        let mut v: Vec<(Monomial, C)> = self
            .terms
            .iter()
            .map(|(m, c)| (m.monomial(), c.clone()))
            .collect();
        v.sort_by(|a, b| b.0.grlex_cmp(&a.0));
        v
    }

    pub(crate) fn id_terms(&self) -> &[(MonoId, C)] {
        &self.terms
    }

    /// Whether the internal invariants hold; always true for values built
    /// through this API.
    pub fn is_canonical(&self) -> bool {
        self.terms.windows(2).all(|w| w[0].0 < w[1].0) && self.terms.iter().all(|(_, c)| !c.is_zero())
    }

    pub fn generators(&self) -> Vec<Generator> {
        let mut gs: Vec<Generator> = self
            .terms
            .iter()
            .flat_map(|(m, _)| m.monomial().powers().iter().map(|&(g, _)| g).collect::<Vec<_>>())
            .collect();
        gs.sort();
        gs.dedup();
        gs
    }

    /// Multiplies every coefficient by `c`.
    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, x)| (*m, x.clone() * c.clone()))
                .collect(),
        }
    }

    fn merge(&self, other: &Self, negate_other: bool) -> Self {
        let (a, b) = (&*self.terms, &*other.terms);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        let conv = |c: &C| if negate_other { -c.clone() } else { c.clone() };
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push((b[j].0, conv(&b[j].1)));
                    j += 1;
                }
                Ordering::Equal => {
                    let s = if negate_other {
                        a[i].1.clone() - b[j].1.clone()
                    } else {
                        a[i].1.clone() + b[j].1.clone()
                    };
                    if !s.is_zero() {
                        out.push((a[i].0, s));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend(b[j..].iter().map(|(m, c)| (*m, conv(c))));
        Poly {
            terms: out.into_boxed_slice(),
        }
    }

    fn product(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        if let Some(c) = self.as_constant() {
            return other.scale(&c);
        }
        if let Some(c) = other.as_constant() {
            return self.scale(&c);
        }
        let mut acc: FxHashMap<MonoId, C> = FxHashMap::default();
        for (ma, ca) in self.terms.iter() {
            for (mb, cb) in other.terms.iter() {
                let m = ma.mul(*mb);
                let c = ca.clone() * cb.clone();
                match acc.get_mut(&m) {
                    Some(x) => *x = x.clone() + c,
                    None => {
                        acc.insert(m, c);
                    }
                }
            }
        }
        Self::from_id_terms(acc)
    }

    pub fn pow(&self, exp: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..exp {
            acc = acc.product(self);
        }
        acc
    }

    /// Floating evaluation with generator values supplied by `value_of`.
    pub fn eval_with<F: Float>(&self, value_of: impl Fn(Generator) -> Option<F>) -> Result<F> {
        let mut sum = F::zero();
        for (m, c) in self.terms.iter() {
            let mut term = F::from(c.to_f64()).unwrap_or_else(F::nan);
            for &(g, e) in m.monomial().powers() {
                let x = value_of(g).ok_or_else(|| Error::MissingAssignment(g.name().to_string()))?;
                term = term * x.powi(e as i32);
            }
            sum = sum + term;
        }
        Ok(sum)
    }

    /// Floating evaluation under a name-to-value assignment. Diagnostics only;
    /// never used to decide equality.
    pub fn eval_float(&self, assignment: &HashMap<String, f64>) -> Result<f64> {
        self.eval_with(|g| assignment.get(&*g.name()).copied())
    }
}

impl<C: Coeff> Default for Poly<C> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<C: Coeff> Zero for Poly<C> {
    fn zero() -> Self {
        Poly::zero()
    }
    fn is_zero(&self) -> bool {
        Poly::is_zero(self)
    }
}

impl<C: Coeff> One for Poly<C> {
    fn one() -> Self {
        Poly::one()
    }
}

impl<C: Coeff> From<Rational> for Poly<C> {
    fn from(q: Rational) -> Self {
        Poly::from_rational(&q)
    }
}

impl<C: Coeff> From<i64> for Poly<C> {
    fn from(n: i64) -> Self {
        Poly::from_integer(n)
    }
}

macro_rules! poly_binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl<'a, C: Coeff> $tr<&'a Poly<C>> for &'a Poly<C> {
            type Output = Poly<C>;
            fn $m(self, rhs: &'a Poly<C>) -> Poly<C> {
                $body(self, rhs)
            }
        }
        impl<C: Coeff> $tr<Poly<C>> for Poly<C> {
            type Output = Poly<C>;
            fn $m(self, rhs: Poly<C>) -> Poly<C> {
                $body(&self, &rhs)
            }
        }
        impl<'a, C: Coeff> $tr<&'a Poly<C>> for Poly<C> {
            type Output = Poly<C>;
            fn $m(self, rhs: &'a Poly<C>) -> Poly<C> {
                $body(&self, rhs)
            }
        }
    };
}

poly_binop!(Add, add, |a: &Poly<C>, b: &Poly<C>| a.merge(b, false));
poly_binop!(Sub, sub, |a: &Poly<C>, b: &Poly<C>| a.merge(b, true));
poly_binop!(Mul, mul, |a: &Poly<C>, b: &Poly<C>| a.product(b));

impl<C: Coeff> Neg for Poly<C> {
    type Output = Poly<C>;
    fn neg(self) -> Poly<C> {
        -&self
    }
}

impl<C: Coeff> Neg for &Poly<C> {
    type Output = Poly<C>;
    fn neg(self) -> Poly<C> {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (*m, -c.clone())).collect(),
        }
    }
}

/// Total order used for deterministic output: constants compare numerically
/// and sort below every non-constant; otherwise term lists are compared in
/// graded-lex order.
impl<C: Coeff> Ord for Poly<C> {
    fn cmp(&self, other: &Self) -> Ordering {
        if self == other {
            return Ordering::Equal;
        }
        match (self.as_constant(), other.as_constant()) {
            (Some(a), Some(b)) => a.cmp(&b),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => {
                let (ta, tb) = (self.terms(), other.terms());
                for (x, y) in ta.iter().zip(tb.iter()) {
                    let o = x.0.grlex_cmp(&y.0).then_with(|| x.1.cmp(&y.1));
                    if o != Ordering::Equal {
                        return o;
                    }
                }
                ta.len().cmp(&tb.len())
            }
        }
    }
}

impl<C: Coeff> PartialOrd for Poly<C> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<C: Coeff> fmt::Display for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.terms();
        if terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (m, c)) in terms.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            match (k, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if m.is_one() {
                write!(f, "{}", mag)?;
            } else if mag.is_one() {
                write!(f, "{}", m)?;
            } else {
                write!(f, "{}*{}", mag, m)?;
            }
        }
        Ok(())
    }
}

impl<C: Coeff> fmt::Debug for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<C: Coeff> serde::Serialize for Poly<C> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl serde::Serialize for Monomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}
