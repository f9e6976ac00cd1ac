//! Exact rationals and the frozen enumerations of `Q` and `(0,1) ∩ Q`.
//!
//! Every rational is kept in lowest terms with a positive denominator. The
//! enumeration of `Q` is the Calkin–Wilf sequence with signs interleaved:
//! `0, 1, -1, 1/2, -1/2, 2, -2, 1/3, …`. The unit interval is enumerated as
//! the image of the positive Calkin–Wilf sequence under `x ↦ x / (x + 1)`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::RationalError;

/// An exact rational number in canonical form.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Result<Self, RationalError> {
        let denom = denom.into();
        if denom.is_zero() {
            return Err(RationalError::ZeroDenominator);
        }
        Ok(Rational(BigRational::new(numer.into(), denom)))
    }

    /// Builds `numer / denom` for small integers.
    ///
    /// Panics if `denom` is zero; meant for constants and tests.
    pub fn frac(numer: i64, denom: i64) -> Self {
        Self::new(numer, denom).expect("nonzero denominator")
    }

    pub fn integer(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    /// Reciprocal; `None` for zero.
    pub fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(Rational(self.0.recip()))
        }
    }

    /// Largest integer not exceeding `self`.
    pub fn floor(&self) -> BigInt {
        self.numer().div_floor(self.denom())
    }

    /// True iff `0 < self < 1`.
    pub fn in_unit_interval(&self) -> bool {
        self.is_positive() && self.numer() < self.denom()
    }

    /// Midpoint of `self` and `other`.
    pub fn midpoint(&self, other: &Rational) -> Rational {
        &(self + other) / &Rational::integer(2)
    }

    /// Small-integer view, when it fits.
    pub fn to_i64_pair(&self) -> Option<(i64, i64)> {
        Some((self.numer().to_i64()?, self.denom().to_i64()?))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = RationalError;

    /// Accepts `n/d` (any sign placement, reduced on parse) or a bare integer.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || RationalError::Parse(s.to_string());
        match s.split_once('/') {
            Some((n, d)) => {
                let n: BigInt = n.trim().parse().map_err(|_| bad())?;
                let d: BigInt = d.trim().parse().map_err(|_| bad())?;
                Rational::new(n, d)
            }
            None => Ok(Rational::integer(s.trim().parse::<BigInt>().map_err(|_| bad())?)),
        }
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::integer(n)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
        impl $trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl Div<&Rational> for &Rational {
    type Output = Rational;
    /// Panics on division by zero, like the integer operators.
    fn div(self, rhs: &Rational) -> Rational {
        assert!(!rhs.is_zero(), "division by zero rational");
        Rational(&self.0 / &rhs.0)
    }
}

impl Div for Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        &self / &rhs
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

/// Position in one of the frozen enumerations, starting at 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EnumerationIndex(u64);

impl EnumerationIndex {
    pub fn new(index: u64) -> Result<Self, RationalError> {
        if index == 0 {
            Err(RationalError::ZeroIndex)
        } else {
            Ok(EnumerationIndex(index))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }
}

impl fmt::Display for EnumerationIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl TryFrom<u64> for EnumerationIndex {
    type Error = RationalError;
    fn try_from(value: u64) -> Result<Self, Self::Error> {
        EnumerationIndex::new(value)
    }
}

/// The `n`-th positive Calkin–Wilf rational (`n ≥ 1`) as a reduced pair.
///
/// Walks the bits of `n` below the leading one: `0` takes the left child
/// `a/(a+b)`, `1` the right child `(a+b)/b`.
fn calkin_wilf_pair(n: u64) -> (u64, u64) {
    debug_assert!(n >= 1);
    let (mut a, mut b) = (1u64, 1u64);
    let top = 63 - n.leading_zeros();
    for bit in (0..top).rev() {
        if n >> bit & 1 == 0 {
            b += a;
        } else {
            a += b;
        }
    }
    (a, b)
}

/// Calkin–Wilf rational at an arbitrary-precision position.
fn calkin_wilf_big(n: &BigUint) -> (BigUint, BigUint) {
    let (mut a, mut b) = (BigUint::one(), BigUint::one());
    let bits = n.bits();
    for bit in (0..bits.saturating_sub(1)).rev() {
        if n.bit(bit) {
            a += &b;
        } else {
            b += &a;
        }
    }
    (a, b)
}

/// The `n`-th element of the positive Calkin–Wilf sequence.
pub fn calkin_wilf(n: EnumerationIndex) -> Rational {
    let (a, b) = calkin_wilf_pair(n.get());
    Rational::new(a, b).expect("positive denominator")
}

/// Position of a positive rational in the Calkin–Wilf sequence.
///
/// The tree path is recovered from the continued fraction of `r`, so the cost
/// is logarithmic in the index even when the index has thousands of bits.
pub fn calkin_wilf_index(r: &Rational) -> Result<BigUint, RationalError> {
    if !r.is_positive() {
        return Err(RationalError::OutOfRange(r.clone()));
    }
    let mut a = r.numer().magnitude().clone();
    let mut b = r.denom().magnitude().clone();
    // (bit, run length), lowest bits first
    let mut runs: Vec<(bool, BigUint)> = Vec::new();
    while a != b {
        if a > b {
            let (q, rem) = a.div_rem(&b);
            if rem.is_zero() {
                runs.push((true, q - 1u32));
                break;
            }
            runs.push((true, q));
            a = rem;
        } else {
            let (q, rem) = b.div_rem(&a);
            if rem.is_zero() {
                runs.push((false, q - 1u32));
                break;
            }
            runs.push((false, q));
            b = rem;
        }
    }
    let mut index = BigUint::one();
    for (bit, len) in runs.iter().rev() {
        let len = len.to_u64().ok_or_else(|| RationalError::IndexOverflow(r.clone()))?;
        index <<= len;
        if *bit {
            index += (BigUint::one() << len) - 1u32;
        }
    }
    Ok(index)
}

/// `enum_q`: the frozen bijection from positive integers onto `Q`.
///
/// `e_1 = 0`, `e_{2k} = c_k`, `e_{2k+1} = -c_k` where `c` is Calkin–Wilf.
pub fn enum_q(i: EnumerationIndex) -> Rational {
    let i = i.get();
    if i == 1 {
        return Rational::zero();
    }
    let c = calkin_wilf(EnumerationIndex(i / 2));
    if i.is_multiple_of(2) {
        c
    } else {
        -c
    }
}

/// `enum_q` at an arbitrary-precision position.
pub fn enum_q_big(i: &BigUint) -> Result<Rational, RationalError> {
    if i.is_zero() {
        return Err(RationalError::ZeroIndex);
    }
    if i.is_one() {
        return Ok(Rational::zero());
    }
    let (a, b) = calkin_wilf_big(&(i >> 1u32));
    let c = Rational::new(BigInt::from_biguint(Sign::Plus, a), BigInt::from_biguint(Sign::Plus, b))?;
    Ok(if i.bit(0) { -c } else { c })
}

/// Inverse of [`enum_q`] with an unbounded index.
pub fn enum_index_big(r: &Rational) -> BigUint {
    match r.0.numer().sign() {
        Sign::NoSign => BigUint::one(),
        Sign::Plus => calkin_wilf_index(r).expect("positive") << 1u32,
        Sign::Minus => (calkin_wilf_index(&-r).expect("positive") << 1u32) + 1u32,
    }
}

/// Inverse of [`enum_q`]: `enum_q(enum_index_of(r)) == r`.
///
/// Fails with [`RationalError::IndexOverflow`] when the index needs more
/// than 64 bits (e.g. the integer 70 sits at position `2^71 - 2`).
pub fn enum_index_of(r: &Rational) -> Result<EnumerationIndex, RationalError> {
    enum_index_big(r).to_u64().map(EnumerationIndex).ok_or_else(|| RationalError::IndexOverflow(r.clone()))
}

/// `enum_unit_interval`: the frozen bijection onto `(0,1) ∩ Q`.
pub fn enum_unit_interval(i: EnumerationIndex) -> Rational {
    let (a, b) = calkin_wilf_pair(i.get());
    Rational::new(a, a + b).expect("positive denominator")
}

/// Inverse of [`enum_unit_interval`], unbounded.
pub fn unit_index_big(r: &Rational) -> Result<BigUint, RationalError> {
    if !r.in_unit_interval() {
        return Err(RationalError::OutOfRange(r.clone()));
    }
    calkin_wilf_index(&unit_to_positive(r))
}

/// Inverse of [`enum_unit_interval`].
pub fn unit_index_of(r: &Rational) -> Result<EnumerationIndex, RationalError> {
    unit_index_big(r)?.to_u64().map(EnumerationIndex).ok_or_else(|| RationalError::IndexOverflow(r.clone()))
}

/// `r ↦ r / (1 - r)`, the order isomorphism `(0,1) → (0,∞)`.
fn unit_to_positive(r: &Rational) -> Rational {
    r / &(&Rational::one() - r)
}

/// `t ↦ t / (1 + t)`, the order isomorphism `(0,∞) → (0,1)`.
fn positive_to_unit(t: &Rational) -> Rational {
    t / &(&Rational::one() + t)
}

/// Least Calkin–Wilf position rational in the open interval `(lo, hi)`.
///
/// `lo` is `≥ 0` (`None` means 0) and `hi` may be `None` for `+∞`. The
/// shallowest node of the Stern–Brocot tree inside an interval is unique and
/// equals the simplest rational there; Calkin–Wilf shares the levels of that
/// tree, so the same node carries the least index.
pub fn simplest_positive_between(lo: Option<&Rational>, hi: Option<&Rational>) -> Rational {
    let mut lo = lo.cloned().unwrap_or_else(Rational::zero);
    let mut hi = hi.cloned();
    debug_assert!(!lo.is_negative());
    debug_assert!(hi.as_ref().is_none_or(|h| &lo < h));
    // continued fraction terms of the answer, outermost first
    let mut terms: Vec<BigInt> = Vec::new();
    loop {
        let fl = lo.floor();
        let next = Rational::integer(&fl + 1);
        if hi.as_ref().is_none_or(|h| &next < h) {
            terms.push(fl + 1);
            break;
        }
        let base = Rational::integer(fl.clone());
        terms.push(fl);
        let hi_off = &hi.expect("bounded here") - &base;
        let lo_off = &lo - &base;
        lo = hi_off.recip().expect("hi > lo >= floor");
        hi = lo_off.recip();
    }
    let mut acc = Rational::integer(terms.pop().expect("at least one term"));
    while let Some(t) = terms.pop() {
        acc = &Rational::integer(t) + &acc.recip().expect("nonzero tail");
    }
    acc
}

/// Least `enum_q` index rational in `(lo, hi)`; `None` bounds are infinite.
pub fn least_enum_between(lo: Option<&Rational>, hi: Option<&Rational>) -> Rational {
    let lo_below_zero = lo.is_none_or(|l| l.is_negative());
    let hi_above_zero = hi.is_none_or(|h| h.is_positive());
    if lo_below_zero && hi_above_zero {
        return Rational::zero();
    }
    if !lo_below_zero {
        simplest_positive_between(lo, hi)
    } else {
        let neg_hi = hi.map(|h| -h);
        let neg_lo = lo.map(|l| -l);
        -simplest_positive_between(neg_hi.as_ref(), neg_lo.as_ref())
    }
}

/// Least `enum_unit_interval` index rational in `(lo, hi) ⊆ (0,1)`.
///
/// `None` bounds stand for 0 and 1 respectively.
pub fn least_unit_between(lo: Option<&Rational>, hi: Option<&Rational>) -> Rational {
    let lo = lo.map(unit_to_positive);
    let hi = hi.map(unit_to_positive);
    positive_to_unit(&simplest_positive_between(lo.as_ref(), hi.as_ref()))
}

/// Compares `a/b` and `c/d` by cross-multiplication without reducing.
pub fn cross_compare(a: &BigInt, b: &BigInt, c: &BigInt, d: &BigInt) -> Ordering {
    debug_assert!(b.is_positive() && d.is_positive());
    (a * d).cmp(&(c * b))
}
