//! Exact field elements: arbitrary-precision rationals and odd prime fields.
//!
//! Every value carries its field tag; mixing tags is a programming error and
//! panics inside arithmetic operators. Checked constructors ([`crate::matrix::Matrix::from_rows`]
//! and friends) turn mixed input into a proper [`GlabError::FieldMismatch`]
//! before any arithmetic runs. No operation ever rounds.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{GlabError, Result};

/// The coefficient field a computation runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldTag {
    Rationals,
    /// F_p for an odd prime p.
    Prime(u64),
}

impl FieldTag {
    /// Validated constructor for the prime-field tag. Requires an odd prime.
    pub fn prime(p: u64) -> Result<FieldTag> {
        if p > 2 && is_prime_u64(p) {
            Ok(FieldTag::Prime(p))
        } else {
            Err(GlabError::NotPrime(p))
        }
    }

    pub fn is_prime_field(&self) -> bool {
        matches!(self, FieldTag::Prime(_))
    }
}

impl fmt::Display for FieldTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldTag::Rationals => write!(f, "rationals"),
            FieldTag::Prime(p) => write!(f, "F_{p}"),
        }
    }
}

/// Deterministic Miller-Rabin; the witness set below is exact for all u64.
fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
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

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// An exact field element.
///
/// Rationals are kept in lowest terms with positive denominator (the
/// underlying `BigRational` maintains that on construction); prime-field
/// values are kept reduced to `[0, p)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Scalar {
    Rational(BigRational),
    Prime { value: u64, modulus: u64 },
}

impl Scalar {
    pub fn field(&self) -> FieldTag {
        match self {
            Scalar::Rational(_) => FieldTag::Rationals,
            Scalar::Prime { modulus, .. } => FieldTag::Prime(*modulus),
        }
    }

    pub fn zero(field: FieldTag) -> Scalar {
        Scalar::from_int(field, 0)
    }

    pub fn one(field: FieldTag) -> Scalar {
        Scalar::from_int(field, 1)
    }

    pub fn from_int(field: FieldTag, v: i64) -> Scalar {
        match field {
            FieldTag::Rationals => Scalar::Rational(BigRational::from_integer(BigInt::from(v))),
            FieldTag::Prime(p) => {
                let r = v.rem_euclid(p as i64);
                Scalar::Prime {
                    value: r as u64,
                    modulus: p,
                }
            }
        }
    }

    pub fn from_ratio(num: i64, den: i64) -> Result<Scalar> {
        if den == 0 {
            return Err(GlabError::DivisionByZero);
        }
        Ok(Scalar::Rational(BigRational::new(
            BigInt::from(num),
            BigInt::from(den),
        )))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rational(r) => r.is_zero(),
            Scalar::Prime { value, .. } => *value == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Rational(r) => r.is_one(),
            Scalar::Prime { value, .. } => *value == 1,
        }
    }

    pub fn inverse(&self) -> Result<Scalar> {
        if self.is_zero() {
            return Err(GlabError::DivisionByZero);
        }
        Ok(match self {
            Scalar::Rational(r) => Scalar::Rational(r.recip()),
            Scalar::Prime { value, modulus } => Scalar::Prime {
                value: pow_mod(*value, modulus - 2, *modulus),
                modulus: *modulus,
            },
        })
    }

    pub fn pow(&self, mut e: u32) -> Scalar {
        let mut acc = Scalar::one(self.field());
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// True for rationals below zero; prime-field values have no sign.
    pub fn is_negative(&self) -> bool {
        match self {
            Scalar::Rational(r) => r.is_negative(),
            Scalar::Prime { .. } => false,
        }
    }

    /// For rational scalars only: the value as i64 if it is a small integer.
    pub fn to_integer(&self) -> Option<i64> {
        match self {
            Scalar::Rational(r) if r.is_integer() => r.numer().to_i64(),
            Scalar::Prime { value, .. } => (*value).to_i64(),
            _ => None,
        }
    }

    fn check_field(&self, other: &Scalar) {
        if self.field() != other.field() {
            panic!("field mismatch: {} vs {}", self.field(), other.field());
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rational(r) => {
                if r.is_integer() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Prime { value, .. } => write!(f, "{value}"),
        }
    }
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        self.check_field(rhs);
        match (self, rhs) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a + b),
            (Scalar::Prime { value: a, modulus }, Scalar::Prime { value: b, .. }) => {
                Scalar::Prime {
                    value: (a + b) % modulus,
                    modulus: *modulus,
                }
            }
            _ => unreachable!(),
        }
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        self.check_field(rhs);
        match (self, rhs) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a - b),
            (Scalar::Prime { value: a, modulus }, Scalar::Prime { value: b, .. }) => {
                Scalar::Prime {
                    value: (a + modulus - b) % modulus,
                    modulus: *modulus,
                }
            }
            _ => unreachable!(),
        }
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        self.check_field(rhs);
        match (self, rhs) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a * b),
            (Scalar::Prime { value: a, modulus }, Scalar::Prime { value: b, .. }) => {
                Scalar::Prime {
                    value: mul_mod(*a, *b, *modulus),
                    modulus: *modulus,
                }
            }
            _ => unreachable!(),
        }
    }
}

impl Div for &Scalar {
    type Output = Scalar;
    fn div(self, rhs: &Scalar) -> Scalar {
        let inv = rhs.inverse().expect("division by zero");
        self * &inv
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Rational(r) => Scalar::Rational(-r),
            Scalar::Prime { value, modulus } => Scalar::Prime {
                value: if *value == 0 { 0 } else { modulus - value },
                modulus: *modulus,
            },
        }
    }
}

macro_rules! forward_owned_binop {
    ($($t:ident :: $m:ident),*) => {$(
        impl $t for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar {
                (&self).$m(&rhs)
            }
        }
    )*};
}
forward_owned_binop!(Add::add, Sub::sub, Mul::mul, Div::div);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

/// Parse a scalar literal: an integer, or `a/b` over the rationals.
pub fn parse_scalar(s: &str, field: FieldTag) -> Result<Scalar> {
    let s = s.trim();
    let parse_int = |t: &str| -> Result<i64> {
        t.trim()
            .parse::<i64>()
            .map_err(|_| GlabError::Parse(format!("bad integer literal {t:?}")))
    };
    if let Some((num, den)) = s.split_once('/') {
        let (num, den) = (parse_int(num)?, parse_int(den)?);
        match field {
            FieldTag::Rationals => Scalar::from_ratio(num, den),
            FieldTag::Prime(_) => {
                let d = Scalar::from_int(field, den);
                Ok(&Scalar::from_int(field, num) * &d.inverse()?)
            }
        }
    } else {
        Ok(Scalar::from_int(field, parse_int(s)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_lowest_terms_positive_denominator() {
        let x = Scalar::from_ratio(2, -4).unwrap();
        match &x {
            Scalar::Rational(r) => {
                assert!(r.denom().is_positive());
                assert_eq!(r.numer(), &BigInt::from(-1));
                assert_eq!(r.denom(), &BigInt::from(2));
            }
            _ => unreachable!(),
        }
        assert_eq!(x.to_string(), "-1/2");
    }

    #[test]
    fn prime_field_reduction_and_inverse() {
        let f = FieldTag::prime(7).unwrap();
        let x = Scalar::from_int(f, -3);
        assert_eq!(x, Scalar::from_int(f, 4));
        let inv = x.inverse().unwrap();
        assert!((&x * &inv).is_one());
    }

    #[test]
    fn prime_tag_rejects_composites_and_two() {
        assert!(FieldTag::prime(2).is_err());
        assert!(FieldTag::prime(1_000_003).is_ok());
        assert!(FieldTag::prime(1_000_004).is_err());
        assert!(FieldTag::prime((1 << 31) - 1).is_ok());
    }

    #[test]
    #[should_panic(expected = "field mismatch")]
    fn mixed_field_arithmetic_panics() {
        let a = Scalar::from_int(FieldTag::Rationals, 1);
        let b = Scalar::from_int(FieldTag::prime(5).unwrap(), 1);
        let _ = &a + &b;
    }

    #[test]
    fn parse_scalar_literals() {
        let f = FieldTag::Rationals;
        assert_eq!(parse_scalar("-7", f).unwrap(), Scalar::from_int(f, -7));
        assert_eq!(
            parse_scalar("3/7", f).unwrap(),
            Scalar::from_ratio(3, 7).unwrap()
        );
        let p = FieldTag::prime(11).unwrap();
        let half = parse_scalar("1/2", p).unwrap();
        assert_eq!(&half + &half, Scalar::one(p));
    }

    proptest::proptest! {
        #[test]
        fn field_axioms_rational(a in -50i64..50, b in -50i64..50, c in 1i64..50) {
            let f = FieldTag::Rationals;
            let (x, y) = (Scalar::from_ratio(a, c).unwrap(), Scalar::from_int(f, b));
            proptest::prop_assert_eq!(&x + &y, &y + &x);
            proptest::prop_assert_eq!(&(&x + &y) * &x, &(&x * &x) + &(&y * &x));
            if !x.is_zero() {
                proptest::prop_assert!((&x * &x.inverse().unwrap()).is_one());
            }
        }
    }
}
