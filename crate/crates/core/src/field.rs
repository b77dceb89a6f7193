//! Exact scalars over a prime field GF(p) or the rationals.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::MatrixError;

/// Largest admissible prime modulus (exclusive).
pub const MAX_PRIME: u32 = 1 << 16;

/// Coefficient field of a matrix or module.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Field {
    /// GF(p) for a prime `p < 2^16`.
    Prime(u32),
    /// The rationals, with arbitrary-precision numerators and denominators.
    Rational,
}

impl Default for Field {
    fn default() -> Self {
        Field::Prime(2)
    }
}

impl Field {
    pub const GF2: Field = Field::Prime(2);

    /// GF(p), rejecting composite or oversized moduli.
    pub fn prime(p: u32) -> Result<Field, MatrixError> {
        if p >= MAX_PRIME || !is_prime(p) {
            return Err(MatrixError::InvalidModulus(p));
        }
        Ok(Field::Prime(p))
    }

    pub fn is_prime_field(self) -> bool {
        matches!(self, Field::Prime(_))
    }

    /// Number of elements, or `None` for the rationals.
    pub fn order(self) -> Option<u32> {
        match self {
            Field::Prime(p) => Some(p),
            Field::Rational => None,
        }
    }

    pub fn zero(self) -> Scalar {
        self.from_i64(0)
    }

    pub fn one(self) -> Scalar {
        self.from_i64(1)
    }

    pub fn from_i64(self, v: i64) -> Scalar {
        match self {
            Field::Prime(p) => Scalar::Mod {
                value: v.rem_euclid(p as i64) as u32,
                modulus: p,
            },
            Field::Rational => Scalar::Rational(Box::new(BigRational::from_integer(v.into()))),
        }
    }

    /// The element with canonical index `i` (GF(p) only): `0, 1, ..., p-1`.
    pub fn element(self, i: u32) -> Scalar {
        match self {
            Field::Prime(p) => Scalar::Mod {
                value: i % p,
                modulus: p,
            },
            Field::Rational => self.from_i64(i as i64),
        }
    }

    pub fn rational(num: i64, den: i64) -> Scalar {
        assert!(den != 0, "zero denominator");
        Scalar::Rational(Box::new(BigRational::new(num.into(), den.into())))
    }

    /// Parses `"k"` for GF(p) and `"n/d"` or `"n"` for rationals.
    pub fn parse_scalar(self, s: &str) -> Result<Scalar, MatrixError> {
        let bad = || MatrixError::ParseScalar(s.to_string());
        let s = s.trim();
        match self {
            Field::Prime(p) => {
                let v: BigInt = s.parse().map_err(|_| bad())?;
                let r = ((v % BigInt::from(p)) + BigInt::from(p)) % BigInt::from(p);
                let value = u32::try_from(r).map_err(|_| bad())?;
                Ok(Scalar::Mod { value, modulus: p })
            }
            Field::Rational => {
                let (n, d) = match s.split_once('/') {
                    Some((n, d)) => (n.trim(), d.trim()),
                    None => (s, "1"),
                };
                let n: BigInt = n.parse().map_err(|_| bad())?;
                let d: BigInt = d.parse().map_err(|_| bad())?;
                if d.is_zero() {
                    return Err(bad());
                }
                Ok(Scalar::Rational(Box::new(BigRational::new(n, d))))
            }
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Prime(p) => write!(f, "GF({p})"),
            Field::Rational => write!(f, "Q"),
        }
    }
}

impl std::str::FromStr for Field {
    type Err = MatrixError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t == "Q" || t.eq_ignore_ascii_case("rational") {
            return Ok(Field::Rational);
        }
        let inner = t
            .strip_prefix("GF(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| MatrixError::ParseField(s.to_string()))?;
        let p: u32 = inner.parse().map_err(|_| MatrixError::ParseField(s.to_string()))?;
        Field::prime(p)
    }
}

pub(crate) fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// A field element that carries its field.
///
/// GF(p) values are canonical representatives in `[0, p)`; rationals are kept
/// in lowest terms with a positive denominator by `BigRational`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Scalar {
    Mod { value: u32, modulus: u32 },
    Rational(Box<BigRational>),
}

impl Scalar {
    pub fn field(&self) -> Field {
        match self {
            Scalar::Mod { modulus, .. } => Field::Prime(*modulus),
            Scalar::Rational(_) => Field::Rational,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Mod { value, .. } => *value == 0,
            Scalar::Rational(r) => r.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Mod { value, .. } => *value == 1,
            Scalar::Rational(r) => r.is_one(),
        }
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self) -> Option<Scalar> {
        if self.is_zero() {
            return None;
        }
        Some(match self {
            Scalar::Mod { value, modulus } => Scalar::Mod {
                value: mod_pow(*value, modulus - 2, *modulus),
                modulus: *modulus,
            },
            Scalar::Rational(r) => Scalar::Rational(Box::new(r.recip())),
        })
    }

    /// Canonical GF(p) representative, if this is a GF(p) element.
    pub fn as_mod(&self) -> Option<u32> {
        match self {
            Scalar::Mod { value, .. } => Some(*value),
            Scalar::Rational(_) => None,
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Scalar::Rational(r) => Some(r),
            Scalar::Mod { .. } => None,
        }
    }

    /// Nearest `f64` of a rational; GF(p) values map to their representative.
    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Mod { value, .. } => *value as f64,
            Scalar::Rational(r) => rational_to_f64(r),
        }
    }

    /// Serialization form: `"k"` for GF(p), `"n/d"` for rationals.
    pub fn to_exact_string(&self) -> String {
        match self {
            Scalar::Mod { value, .. } => value.to_string(),
            Scalar::Rational(r) => format!("{}/{}", r.numer(), r.denom()),
        }
    }
}

fn rational_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    if let Some(v) = r.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // Scale down huge numerators/denominators before dividing.
    let n = r.numer().abs();
    let d = r.denom().clone();
    let shift = n.bits().max(d.bits()).saturating_sub(1000);
    let n = (n >> shift).to_f64().unwrap_or(f64::INFINITY);
    let d = (d >> shift).to_f64().unwrap_or(f64::INFINITY);
    let v = n / d;
    if r.is_negative() {
        -v
    } else {
        v
    }
}

fn mod_pow(base: u32, mut exp: u32, m: u32) -> u32 {
    let mut acc: u64 = 1;
    let mut b = base as u64 % m as u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m as u64;
        }
        b = b * b % m as u64;
        exp >>= 1;
    }
    acc as u32
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Mod { value, .. } => write!(f, "{value}"),
            Scalar::Rational(r) => write!(f, "{r}"),
        }
    }
}

#[inline]
fn field_mismatch(a: &Scalar, b: &Scalar) -> ! {
    panic!("field mismatch: {} vs {}", a.field(), b.field())
}

impl Add for &Scalar {
    type Output = Scalar;

    #[inline]
    fn add(self, rhs: &Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Mod { value: a, modulus }, Scalar::Mod { value: b, modulus: m2 }) if modulus == m2 => {
                let s = a + b;
                Scalar::Mod {
                    value: if s >= *modulus { s - modulus } else { s },
                    modulus: *modulus,
                }
            }
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(Box::new(a.as_ref() + b.as_ref())),
            _ => field_mismatch(self, rhs),
        }
    }
}

impl Sub for &Scalar {
    type Output = Scalar;

    #[inline]
    fn sub(self, rhs: &Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Mod { value: a, modulus }, Scalar::Mod { value: b, modulus: m2 }) if modulus == m2 => {
                Scalar::Mod {
                    value: if a >= b { a - b } else { a + modulus - b },
                    modulus: *modulus,
                }
            }
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(Box::new(a.as_ref() - b.as_ref())),
            _ => field_mismatch(self, rhs),
        }
    }
}

impl Mul for &Scalar {
    type Output = Scalar;

    #[inline]
    fn mul(self, rhs: &Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Mod { value: a, modulus }, Scalar::Mod { value: b, modulus: m2 }) if modulus == m2 => {
                Scalar::Mod {
                    value: ((*a as u64 * *b as u64) % *modulus as u64) as u32,
                    modulus: *modulus,
                }
            }
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(Box::new(a.as_ref() * b.as_ref())),
            _ => field_mismatch(self, rhs),
        }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;

    #[inline]
    fn neg(self) -> Scalar {
        match self {
            Scalar::Mod { value, modulus } => Scalar::Mod {
                value: if *value == 0 { 0 } else { modulus - value },
                modulus: *modulus,
            },
            Scalar::Rational(r) => Scalar::Rational(Box::new(-r.as_ref())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gf_arithmetic_is_canonical() {
        let f = Field::prime(7).unwrap();
        let a = f.from_i64(-3);
        assert_eq!(a.as_mod(), Some(4));
        assert_eq!((&a + &f.from_i64(5)).as_mod(), Some(2));
        assert_eq!((&a * &a.inv().unwrap()), f.one());
        assert_eq!((&f.zero() - &f.one()).as_mod(), Some(6));
        assert!(f.zero().inv().is_none());
    }

    #[test]
    fn rationals_stay_reduced() {
        let r = Field::rational(6, -4);
        assert_eq!(r.to_exact_string(), "-3/2");
        let q = Field::Rational.parse_scalar("10/4").unwrap();
        assert_eq!(q.to_exact_string(), "5/2");
        assert_eq!((&r + &q).to_exact_string(), "1/1");
    }

    #[test]
    fn field_parsing() {
        assert_eq!("GF(5)".parse::<Field>().unwrap(), Field::Prime(5));
        assert_eq!("Q".parse::<Field>().unwrap(), Field::Rational);
        assert!("GF(4)".parse::<Field>().is_err());
        assert!("GF(65537)".parse::<Field>().is_err());
        assert_eq!(Field::Prime(3).to_string(), "GF(3)");
    }

    #[test]
    fn parse_gf_reduces() {
        let f = Field::Prime(5);
        assert_eq!(f.parse_scalar("-1").unwrap().as_mod(), Some(4));
        assert!(f.parse_scalar("x").is_err());
        assert!(Field::Rational.parse_scalar("1/0").is_err());
    }
}
