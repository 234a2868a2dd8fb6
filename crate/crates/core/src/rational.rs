//! Arbitrary-precision rationals with an inline fast path.
//!
//! Values whose reduced numerator and denominator fit in an `i64` are stored
//! inline; everything else spills to a boxed [`BigRational`]. The two
//! representations never overlap, so derived equality and hashing are sound.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Rem, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Num, One, Pow, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// An exact rational number in canonical reduced form.
#[derive(Clone)]
pub struct Rational(Repr);

#[derive(Clone, PartialEq, Eq)]
enum Repr {
    /// `den > 0`, `gcd(|num|, den) == 1`, `num != i64::MIN`.
    Small { num: i64, den: i64 },
    /// Never representable as `Small`.
    Big(Box<BigRational>),
}

fn fits_small(v: i128) -> bool {
    v > i64::MIN as i128 && v <= i64::MAX as i128
}

impl Rational {
    /// Builds `num / den`, reducing to canonical form. Panics if `den == 0`.
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Self::from_i128(num as i128, den as i128)
    }

    pub fn from_integer(n: i64) -> Self {
        Self::from_i128(n as i128, 1)
    }

    /// Builds `num / den` from big integers. Panics if `den` is zero.
    pub fn from_bigints(num: BigInt, den: BigInt) -> Self {
        Self::from_big(BigRational::new(num, den))
    }

    pub fn from_big(q: BigRational) -> Self {
        if let (Some(n), Some(d)) = (q.numer().to_i64(), q.denom().to_i64()) {
            if n != i64::MIN {
                return Rational(Repr::Small { num: n, den: d });
            }
        }
        Rational(Repr::Big(Box::new(q)))
    }

    fn from_i128(mut n: i128, mut d: i128) -> Self {
        debug_assert!(d != 0);
        if d < 0 {
            n = -n;
            d = -d;
        }
        let g = n.unsigned_abs().gcd(&d.unsigned_abs());
        if g > 1 {
            n /= g as i128;
            d /= g as i128;
        }
        if fits_small(n) && fits_small(d) {
            Rational(Repr::Small {
                num: n as i64,
                den: d as i64,
            })
        } else {
            Rational(Repr::Big(Box::new(BigRational::new_raw(
                BigInt::from(n),
                BigInt::from(d),
            ))))
        }
    }

    pub fn to_big(&self) -> BigRational {
        match &self.0 {
            Repr::Small { num, den } => {
                BigRational::new_raw(BigInt::from(*num), BigInt::from(*den))
            }
            Repr::Big(q) => (**q).clone(),
        }
    }

    pub fn numer(&self) -> BigInt {
        match &self.0 {
            Repr::Small { num, .. } => BigInt::from(*num),
            Repr::Big(q) => q.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match &self.0 {
            Repr::Small { den, .. } => BigInt::from(*den),
            Repr::Big(q) => q.denom().clone(),
        }
    }

    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small { den, .. } => *den == 1,
            Repr::Big(q) => q.is_integer(),
        }
    }

    /// Largest integer not exceeding `self`.
    pub fn floor(&self) -> BigInt {
        match &self.0 {
            Repr::Small { num, den } => BigInt::from(num.div_floor(den)),
            Repr::Big(q) => q.floor().to_integer(),
        }
    }

    pub fn recip(&self) -> Self {
        match &self.0 {
            Repr::Small { num, den } => {
                assert!(*num != 0, "reciprocal of zero");
                Self::from_i128(*den as i128, *num as i128)
            }
            Repr::Big(q) => Self::from_big(q.recip()),
        }
    }

    /// Integer power; negative exponents invert. Panics on `0^negative`.
    pub fn pow(&self, exp: i32) -> Self {
        if exp < 0 {
            return self.recip().pow(-exp);
        }
        let mut base = self.clone();
        let mut acc = Rational::one();
        let mut e = exp as u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Small { num, den } => {
                const EXACT: i64 = 1 << 53;
                if num.abs() <= EXACT && *den <= EXACT {
                    *num as f64 / *den as f64
                } else {
                    self.to_big().to_f64().unwrap_or(f64::NAN)
                }
            }
            Repr::Big(q) => q.to_f64().unwrap_or(f64::NAN),
        }
    }

    /// `log2(self)` for positive values, computed without overflowing
    /// through `f64` when numerator or denominator are huge.
    pub fn log2(&self) -> f64 {
        debug_assert!(self.is_positive());
        match &self.0 {
            Repr::Small { num, den } => (*num as f64).log2() - (*den as f64).log2(),
            Repr::Big(q) => big_log2(q.numer()) - big_log2(q.denom()),
        }
    }

    fn cmp_zero(&self) -> Ordering {
        match &self.0 {
            Repr::Small { num, .. } => num.cmp(&0),
            Repr::Big(q) => match q.numer().sign() {
                Sign::Minus => Ordering::Less,
                Sign::NoSign => Ordering::Equal,
                Sign::Plus => Ordering::Greater,
            },
        }
    }

    /// Parses `p`, `p/q`, or an exact decimal such as `-0.08`.
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim().replace('\u{2212}', "-");
        let err = |m: &str| Error::Parse {
            input: s.to_string(),
            message: m.to_string(),
        };
        if t.is_empty() {
            return Err(err("empty rational"));
        }
        if let Some((n, d)) = t.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| err("bad numerator"))?;
            let d: BigInt = d.trim().parse().map_err(|_| err("bad denominator"))?;
            if d.is_zero() {
                return Err(err("zero denominator"));
            }
            return Ok(Self::from_bigints(n, d));
        }
        if let Some((ip, fp)) = t.split_once('.') {
            let neg = ip.starts_with('-');
            let ip = ip.trim_start_matches(['-', '+']);
            if (ip.is_empty() && fp.is_empty())
                || !ip.chars().all(|c| c.is_ascii_digit())
                || !fp.chars().all(|c| c.is_ascii_digit())
            {
                return Err(err("bad decimal"));
            }
            let digits = format!("{}{}", ip, fp);
            let mut n: BigInt = digits.parse().map_err(|_| err("bad decimal"))?;
            if neg {
                n = -n;
            }
            let d = BigInt::from(10u32).pow(fp.len() as u32);
            return Ok(Self::from_bigints(n, d));
        }
        let n: BigInt = t.parse().map_err(|_| err("bad integer"))?;
        Ok(Self::from_bigints(n, BigInt::one()))
    }

    /// Best rational approximation of `x` with denominator at most
    /// `max_den`, via continued fractions (convergents and semiconvergents).
    pub fn approximate(x: f64, max_den: u64) -> Option<Self> {
        if !x.is_finite() || max_den == 0 {
            return None;
        }
        let neg = x < 0.0;
        let mut v = x.abs();
        let (mut p0, mut q0, mut p1, mut q1) = (0i128, 1i128, 1i128, 0i128);
        let max_den = max_den as i128;
        for _ in 0..64 {
            let a = v.floor();
            if a > 1e18 {
                break;
            }
            let ai = a as i128;
            let p2 = ai * p1 + p0;
            let q2 = ai * q1 + q0;
            if q2 > max_den {
                // semiconvergent with the largest admissible partial quotient
                let k = (max_den - q0) / q1;
                let (ps, qs) = (k * p1 + p0, k * q1 + q0);
                let cand = if qs > 0
                    && (ps as f64 / qs as f64 - x.abs()).abs()
                        < (p1 as f64 / q1 as f64 - x.abs()).abs()
                {
                    (ps, qs)
                } else {
                    (p1, q1)
                };
                return Some(Self::from_i128(if neg { -cand.0 } else { cand.0 }, cand.1));
            }
            p0 = p1;
            q0 = q1;
            p1 = p2;
            q1 = q2;
            let frac = v - a;
            if frac < 1e-15 {
                break;
            }
            v = 1.0 / frac;
        }
        if q1 == 0 {
            return None;
        }
        Some(Self::from_i128(if neg { -p1 } else { p1 }, q1))
    }
}

fn big_log2(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        n.to_f64().unwrap_or(f64::NAN).log2()
    } else {
        let shift = bits - 64;
        let top = (n >> shift).to_f64().unwrap_or(f64::NAN);
        top.log2() + shift as f64
    }
}

fn add_ref(a: &Rational, b: &Rational) -> Rational {
    match (&a.0, &b.0) {
        (Repr::Small { num: an, den: ad }, Repr::Small { num: bn, den: bd }) => {
            if *ad == 1 && *bd == 1 {
                if let Some(s) = an.checked_add(*bn) {
                    if s != i64::MIN {
                        return Rational(Repr::Small { num: s, den: 1 });
                    }
                }
            }
            let (an, ad, bn, bd) = (*an as i128, *ad as i128, *bn as i128, *bd as i128);
            if ad == bd {
                Rational::from_i128(an + bn, ad)
            } else {
                Rational::from_i128(an * bd + bn * ad, ad * bd)
            }
        }
        _ => Rational::from_big(a.to_big() + b.to_big()),
    }
}

fn mul_ref(a: &Rational, b: &Rational) -> Rational {
    match (&a.0, &b.0) {
        (Repr::Small { num: an, den: ad }, Repr::Small { num: bn, den: bd }) => {
            Rational::from_i128(*an as i128 * *bn as i128, *ad as i128 * *bd as i128)
        }
        _ => Rational::from_big(a.to_big() * b.to_big()),
    }
}

fn neg_ref(a: &Rational) -> Rational {
    match &a.0 {
        Repr::Small { num, den } => Rational(Repr::Small {
            num: -num,
            den: *den,
        }),
        Repr::Big(q) => Rational::from_big(-(**q).clone()),
    }
}

fn div_ref(a: &Rational, b: &Rational) -> Rational {
    mul_ref(a, &b.recip())
}

fn rem_ref(a: &Rational, b: &Rational) -> Rational {
    Rational::from_big(a.to_big() % b.to_big())
}

macro_rules! binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl<'a> $tr<&'a Rational> for &'a Rational {
            type Output = Rational;
            fn $m(self, rhs: &'a Rational) -> Rational {
                $f(self, rhs)
            }
        }
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $m(self, rhs: Rational) -> Rational {
                $f(&self, &rhs)
            }
        }
        impl<'a> $tr<&'a Rational> for Rational {
            type Output = Rational;
            fn $m(self, rhs: &'a Rational) -> Rational {
                $f(&self, rhs)
            }
        }
        impl<'a> $tr<Rational> for &'a Rational {
            type Output = Rational;
            fn $m(self, rhs: Rational) -> Rational {
                $f(self, &rhs)
            }
        }
    };
}

binop!(Add, add, add_ref);
binop!(Mul, mul, mul_ref);
binop!(Div, div, div_ref);
binop!(Rem, rem, rem_ref);

fn sub_ref(a: &Rational, b: &Rational) -> Rational {
    add_ref(a, &neg_ref(b))
}
binop!(Sub, sub, sub_ref);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        neg_ref(&self)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        neg_ref(self)
    }
}

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        *self = add_ref(self, rhs);
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        *self = sub_ref(self, rhs);
    }
}

impl MulAssign<&Rational> for Rational {
    fn mul_assign(&mut self, rhs: &Rational) {
        *self = mul_ref(self, rhs);
    }
}

impl PartialEq for Rational {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

impl Eq for Rational {}

impl Hash for Rational {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match &self.0 {
            Repr::Small { num, den } => {
                state.write_u8(0);
                num.hash(state);
                den.hash(state);
            }
            Repr::Big(q) => {
                state.write_u8(1);
                q.hash(state);
            }
        }
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small { num: an, den: ad }, Repr::Small { num: bn, den: bd }) => {
                (*an as i128 * *bd as i128).cmp(&(*bn as i128 * *ad as i128))
            }
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Zero for Rational {
    fn zero() -> Self {
        Rational(Repr::Small { num: 0, den: 1 })
    }
    fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small { num: 0, .. })
    }
}

impl One for Rational {
    fn one() -> Self {
        Rational(Repr::Small { num: 1, den: 1 })
    }
}

impl Num for Rational {
    type FromStrRadixErr = Error;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self> {
        if radix != 10 {
            return Err(Error::Parse {
                input: s.to_string(),
                message: "only radix 10 is supported".into(),
            });
        }
        Self::parse(s)
    }
}

impl Signed for Rational {
    fn abs(&self) -> Self {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }
    fn abs_sub(&self, other: &Self) -> Self {
        if self <= other {
            Rational::zero()
        } else {
            self - other
        }
    }
    fn signum(&self) -> Self {
        match self.cmp_zero() {
            Ordering::Less => -Rational::one(),
            Ordering::Equal => Rational::zero(),
            Ordering::Greater => Rational::one(),
        }
    }
    fn is_positive(&self) -> bool {
        self.cmp_zero() == Ordering::Greater
    }
    fn is_negative(&self) -> bool {
        self.cmp_zero() == Ordering::Less
    }
}

impl ToPrimitive for Rational {
    fn to_i64(&self) -> Option<i64> {
        match &self.0 {
            Repr::Small { num, den: 1 } => Some(*num),
            _ => None,
        }
    }
    fn to_u64(&self) -> Option<u64> {
        self.to_i64().and_then(|v| u64::try_from(v).ok())
    }
    fn to_f64(&self) -> Option<f64> {
        Some(Rational::to_f64(self))
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl From<i32> for Rational {
    fn from(n: i32) -> Self {
        Rational::from_integer(n as i64)
    }
}

impl From<BigInt> for Rational {
    fn from(n: BigInt) -> Self {
        Rational::from_bigints(n, BigInt::one())
    }
}

impl From<BigRational> for Rational {
    fn from(q: BigRational) -> Self {
        Rational::from_big(q)
    }
}

impl FromStr for Rational {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Rational::parse(s)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small { num, den: 1 } => write!(f, "{}", num),
            Repr::Small { num, den } => write!(f, "{}/{}", num, den),
            Repr::Big(q) if q.is_integer() => write!(f, "{}", q.numer()),
            Repr::Big(q) => write!(f, "{}/{}", q.numer(), q.denom()),
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        match v {
            serde_json::Value::String(s) => Rational::parse(&s).map_err(serde::de::Error::custom),
            serde_json::Value::Number(n) if n.is_i64() => {
                Ok(Rational::from_integer(n.as_i64().unwrap_or_default()))
            }
            other => Err(serde::de::Error::custom(format!(
                "expected a rational string such as \"2/25\", found {}",
                other
            ))),
        }
    }
}
