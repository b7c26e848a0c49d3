//! Exact scalars over a prime field `F_q` or the rationals.
//!
//! Every [`Scalar`] carries the identity of its field, so mixing elements of
//! different fields is detected. The `checked_*` methods report a mismatch as
//! an error; the operator impls panic on one and are meant for code that has
//! already validated its inputs share a field.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("field mismatch: {0} vs {1}")]
    FieldMismatch(FieldSpec, FieldSpec),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("invalid field spec `{0}` (expected `q=<prime>` or `rational`)")]
    InvalidFieldSpec(String),
    #[error("invalid scalar literal `{0}`")]
    InvalidLiteral(String),
}

/// The ground field: `F_q` for a prime `q`, or `Q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FieldSpec {
    Prime(u64),
    Rational,
}

/// Field cardinality; the rationals are infinite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Cardinality {
    Finite(u64),
    Infinite,
}

impl Cardinality {
    /// True when the cardinality strictly exceeds `bound`.
    pub fn exceeds(self, bound: u64) -> bool {
        match self {
            Cardinality::Finite(q) => q > bound,
            Cardinality::Infinite => true,
        }
    }
}

/// Serialized as the integer `q`, or the string `"infinite"`.
impl serde::Serialize for Cardinality {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Cardinality::Finite(q) => s.serialize_u64(*q),
            Cardinality::Infinite => s.serialize_str("infinite"),
        }
    }
}

impl fmt::Display for Cardinality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cardinality::Finite(q) => write!(f, "{q}"),
            Cardinality::Infinite => f.write_str("infinite"),
        }
    }
}

impl FieldSpec {
    pub fn prime(q: u64) -> Result<Self, ScalarError> {
        if is_prime(q) {
            Ok(FieldSpec::Prime(q))
        } else {
            Err(ScalarError::NotPrime(q))
        }
    }

    pub fn cardinality(self) -> Cardinality {
        match self {
            FieldSpec::Prime(q) => Cardinality::Finite(q),
            FieldSpec::Rational => Cardinality::Infinite,
        }
    }

    pub fn zero(self) -> Scalar {
        match self {
            FieldSpec::Prime(q) => Scalar::Prime { value: 0, modulus: q },
            FieldSpec::Rational => Scalar::Rational(BigRational::zero()),
        }
    }

    pub fn one(self) -> Scalar {
        self.from_i64(1)
    }

    pub fn from_i64(self, v: i64) -> Scalar {
        match self {
            FieldSpec::Prime(q) => Scalar::Prime {
                value: (v as i128).rem_euclid(q as i128) as u64,
                modulus: q,
            },
            FieldSpec::Rational => Scalar::Rational(BigRational::from_integer(BigInt::from(v))),
        }
    }

    /// Image of an arbitrary integer in the field.
    pub fn from_bigint(self, v: &BigInt) -> Scalar {
        match self {
            FieldSpec::Prime(q) => {
                let r = v.mod_floor_u64(q);
                Scalar::Prime { value: r, modulus: q }
            }
            FieldSpec::Rational => Scalar::Rational(BigRational::from_integer(v.clone())),
        }
    }

    /// Image of `num/den` in the field.
    pub fn from_fraction(self, num: &BigInt, den: &BigInt) -> Result<Scalar, ScalarError> {
        match self {
            FieldSpec::Prime(_) => {
                let d = self.from_bigint(den);
                self.from_bigint(num).checked_div(&d)
            }
            FieldSpec::Rational => {
                if den.is_zero() {
                    return Err(ScalarError::DivisionByZero);
                }
                Ok(Scalar::Rational(BigRational::new(num.clone(), den.clone())))
            }
        }
    }

    /// Parses a scalar in the serialized form: a decimal residue for prime
    /// fields, `num/den` (or an integer) for the rationals. Any integer or
    /// fraction is accepted and reduced into the field.
    pub fn parse_scalar(self, text: &str) -> Result<Scalar, ScalarError> {
        let bad = || ScalarError::InvalidLiteral(text.to_string());
        let t = text.trim();
        let (num, den) = match t.split_once('/') {
            Some((a, b)) => (a.trim(), b.trim()),
            None => (t, "1"),
        };
        let num = BigInt::from_str(num).map_err(|_| bad())?;
        let den = BigInt::from_str(den).map_err(|_| bad())?;
        self.from_fraction(&num, &den)
    }

    /// Field elements in canonical order: `0, 1, .., q-1` for `F_q`, and
    /// `0, 1, -1, 2, -2, ..` (unbounded) for `Q`.
    pub fn elements(self) -> FieldElements {
        FieldElements { field: self, next: 0 }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Prime(q) => write!(f, "q={q}"),
            FieldSpec::Rational => f.write_str("rational"),
        }
    }
}

impl FromStr for FieldSpec {
    type Err = ScalarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("rational") || t == "Q" {
            return Ok(FieldSpec::Rational);
        }
        let digits = t.strip_prefix("q=").or_else(|| t.strip_prefix("F_")).unwrap_or(t);
        let q: u64 = digits
            .parse()
            .map_err(|_| ScalarError::InvalidFieldSpec(s.to_string()))?;
        FieldSpec::prime(q)
    }
}

/// Iterator returned by [`FieldSpec::elements`].
#[derive(Debug, Clone)]
pub struct FieldElements {
    field: FieldSpec,
    next: u64,
}

impl Iterator for FieldElements {
    type Item = Scalar;

    fn next(&mut self) -> Option<Scalar> {
        let k = self.next;
        match self.field {
            FieldSpec::Prime(q) => {
                if k >= q {
                    return None;
                }
                self.next += 1;
                Some(Scalar::Prime { value: k, modulus: q })
            }
            FieldSpec::Rational => {
                self.next += 1;
                // 0, 1, -1, 2, -2, ...
                let mag = k.div_ceil(2) as i64;
                let v = if k % 2 == 1 { mag } else { -mag };
                Some(FieldSpec::Rational.from_i64(v))
            }
        }
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        match self.field {
            FieldSpec::Prime(q) => {
                let left = (q - self.next.min(q)) as usize;
                (left, Some(left))
            }
            FieldSpec::Rational => (usize::MAX, None),
        }
    }
}

/// An element of a [`FieldSpec`], always in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Scalar {
    Prime { value: u64, modulus: u64 },
    Rational(BigRational),
}

impl Scalar {
    pub fn field(&self) -> FieldSpec {
        match self {
            Scalar::Prime { modulus, .. } => FieldSpec::Prime(*modulus),
            Scalar::Rational(_) => FieldSpec::Rational,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Prime { value, .. } => *value == 0,
            Scalar::Rational(r) => r.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Prime { value, .. } => *value == 1,
            Scalar::Rational(r) => r.is_one(),
        }
    }

    /// Residue for prime-field elements.
    pub fn residue(&self) -> Option<u64> {
        match self {
            Scalar::Prime { value, .. } => Some(*value),
            Scalar::Rational(_) => None,
        }
    }

    fn same_field(&self, other: &Scalar) -> Result<(), ScalarError> {
        let (a, b) = (self.field(), other.field());
        if a == b {
            Ok(())
        } else {
            Err(ScalarError::FieldMismatch(a, b))
        }
    }

    pub fn checked_add(&self, other: &Scalar) -> Result<Scalar, ScalarError> {
        self.same_field(other)?;
        Ok(match (self, other) {
            (Scalar::Prime { value: a, modulus: q }, Scalar::Prime { value: b, .. }) => {
                Scalar::Prime { value: add_mod(*a, *b, *q), modulus: *q }
            }
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a + b),
            _ => unreachable!(),
        })
    }

    pub fn checked_sub(&self, other: &Scalar) -> Result<Scalar, ScalarError> {
        self.checked_add(&other.neg_ref())
    }

    pub fn checked_mul(&self, other: &Scalar) -> Result<Scalar, ScalarError> {
        self.same_field(other)?;
        Ok(match (self, other) {
            (Scalar::Prime { value: a, modulus: q }, Scalar::Prime { value: b, .. }) => {
                Scalar::Prime { value: mul_mod(*a, *b, *q), modulus: *q }
            }
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a * b),
            _ => unreachable!(),
        })
    }

    pub fn checked_div(&self, other: &Scalar) -> Result<Scalar, ScalarError> {
        self.same_field(other)?;
        self.checked_mul(&other.inv()?)
    }

    pub fn neg_ref(&self) -> Scalar {
        match self {
            Scalar::Prime { value, modulus } => Scalar::Prime {
                value: if *value == 0 { 0 } else { modulus - value },
                modulus: *modulus,
            },
            Scalar::Rational(r) => Scalar::Rational(-r),
        }
    }

    /// Multiplicative inverse.
    pub fn inv(&self) -> Result<Scalar, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(match self {
            Scalar::Prime { value, modulus } => Scalar::Prime {
                value: inv_mod(*value, *modulus),
                modulus: *modulus,
            },
            Scalar::Rational(r) => Scalar::Rational(r.recip()),
        })
    }

    /// Serialized form: residue for `F_q`, reduced `num/den` (or integer) for `Q`.
    pub fn to_text(&self) -> String {
        self.to_string()
    }

    /// True when the value prints as a negative literal (rationals only).
    pub fn is_negative(&self) -> bool {
        matches!(self, Scalar::Rational(r) if r.is_negative())
    }

    /// Integer value when the scalar is a small integer (used by printers).
    pub fn as_i64(&self) -> Option<i64> {
        match self {
            Scalar::Prime { value, .. } => i64::try_from(*value).ok(),
            Scalar::Rational(r) if r.is_integer() => r.to_integer().to_i64(),
            Scalar::Rational(_) => None,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Prime { value, .. } => write!(f, "{value}"),
            Scalar::Rational(r) => write!(f, "{r}"),
        }
    }
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        self.checked_add(rhs).expect("scalar field mismatch")
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        self.checked_sub(rhs).expect("scalar field mismatch")
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        self.checked_mul(rhs).expect("scalar field mismatch")
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        self.neg_ref()
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        &self + &rhs
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        &self - &rhs
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        &self * &rhs
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        self.neg_ref()
    }
}

trait ModFloorU64 {
    fn mod_floor_u64(&self, q: u64) -> u64;
}

impl ModFloorU64 for BigInt {
    fn mod_floor_u64(&self, q: u64) -> u64 {
        let m = BigInt::from(q);
        let r = ((self % &m) + &m) % &m;
        r.to_u64().expect("residue fits in u64")
    }
}

pub(crate) fn add_mod(a: u64, b: u64, q: u64) -> u64 {
    ((a as u128 + b as u128) % q as u128) as u64
}

pub(crate) fn mul_mod(a: u64, b: u64, q: u64) -> u64 {
    ((a as u128 * b as u128) % q as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, q: u64) -> u64 {
    let mut acc = 1 % q;
    base %= q;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, q);
        }
        base = mul_mod(base, base, q);
        exp >>= 1;
    }
    acc
}

fn inv_mod(a: u64, q: u64) -> u64 {
    // Extended Euclid on i128 to stay clear of overflow.
    let (mut r0, mut r1) = (q as i128, a as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let k = r0 / r1;
        (r0, r1) = (r1, r0 - k * r1);
        (t0, t1) = (t1, t0 - k * t1);
    }
    debug_assert_eq!(r0, 1);
    t0.rem_euclid(q as i128) as u64
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for p in SMALL {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in SMALL {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(q: u64) -> FieldSpec {
        FieldSpec::prime(q).unwrap()
    }

    fn rat(n: i64, d: i64) -> Scalar {
        FieldSpec::Rational
            .from_fraction(&BigInt::from(n), &BigInt::from(d))
            .unwrap()
    }

    #[test]
    fn small_field_examples() {
        assert_eq!(f(5).from_i64(2).inv().unwrap(), f(5).from_i64(3));
        assert_eq!(&f(7).from_i64(5) + &f(7).from_i64(4), f(7).from_i64(2));
        assert_eq!(rat(-3, 4).inv().unwrap(), rat(-4, 3));
    }

    #[test]
    fn enumeration_order() {
        let v: Vec<String> = f(3).elements().map(|s| s.to_string()).collect();
        assert_eq!(v, ["0", "1", "2"]);
        let v: Vec<String> = f(2).elements().map(|s| s.to_string()).collect();
        assert_eq!(v, ["0", "1"]);
        let v: Vec<String> = FieldSpec::Rational.elements().take(5).map(|s| s.to_string()).collect();
        assert_eq!(v, ["0", "1", "-1", "2", "-2"]);
        assert_eq!(f(97).elements().count(), 97);
    }

    #[test]
    fn errors() {
        assert_eq!(f(5).zero().inv(), Err(ScalarError::DivisionByZero));
        assert!(matches!(
            f(5).one().checked_add(&f(7).one()),
            Err(ScalarError::FieldMismatch(..))
        ));
        assert!(matches!(
            f(5).one().checked_mul(&FieldSpec::Rational.one()),
            Err(ScalarError::FieldMismatch(..))
        ));
        assert_eq!(FieldSpec::prime(9), Err(ScalarError::NotPrime(9)));
        assert_eq!(FieldSpec::prime(1), Err(ScalarError::NotPrime(1)));
    }

    #[test]
    fn parsing_and_printing() {
        assert_eq!("q=5".parse::<FieldSpec>().unwrap(), FieldSpec::Prime(5));
        assert_eq!("rational".parse::<FieldSpec>().unwrap(), FieldSpec::Rational);
        assert!("q=8".parse::<FieldSpec>().is_err());
        assert!("bogus".parse::<FieldSpec>().is_err());
        assert_eq!(f(5).parse_scalar("-1").unwrap().to_text(), "4");
        assert_eq!(f(5).parse_scalar("1/2").unwrap().to_text(), "3");
        assert_eq!(FieldSpec::Rational.parse_scalar("6/-8").unwrap().to_text(), "-3/4");
        assert_eq!(FieldSpec::Rational.parse_scalar("4/2").unwrap().to_text(), "2");
        assert!(FieldSpec::Rational.parse_scalar("1/0").is_err());
        assert!(f(5).parse_scalar("1/5").is_err());
        assert!(f(5).parse_scalar("x").is_err());
    }

    #[test]
    fn primality() {
        let primes: Vec<u64> = (0..60).filter(|&n| is_prime(n)).collect();
        assert_eq!(primes, [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]);
        assert!(is_prime(1_000_000_007));
        assert!(!is_prime(1_000_000_007 * 3));
        assert!(is_prime(18_446_744_073_709_551_557));
    }
}
