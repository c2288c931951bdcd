//! Exact rational scalars.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

/// Arbitrary-precision rational, always in lowest terms with positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rat(BigRational);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("not a rational literal: {0:?}")]
pub struct ParseRatError(pub String);

impl Rat {
    pub fn zero() -> Self {
        Rat(BigRational::zero())
    }
    pub fn one() -> Self {
        Rat(BigRational::one())
    }
    pub fn int(n: i64) -> Self {
        Rat(BigRational::from_integer(BigInt::from(n)))
    }
    pub fn from_big(n: BigInt) -> Self {
        Rat(BigRational::from_integer(n))
    }
    /// `n/d`; panics on `d == 0`.
    pub fn new(n: i64, d: i64) -> Self {
        Rat(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }
    pub fn from_parts(n: BigInt, d: BigInt) -> Self {
        Rat(BigRational::new(n, d))
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
    pub fn is_one(&self) -> bool {
        self.0.is_one()
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
        Rat(self.0.abs())
    }
    pub fn recip(&self) -> Self {
        Rat(self.0.recip())
    }
    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }
    pub fn ceil(&self) -> BigInt {
        self.0.ceil().to_integer()
    }
    pub fn pow(&self, e: u64) -> Self {
        // square-and-multiply; `num` only offers i32 exponents
        let mut base = self.clone();
        let mut acc = Rat::one();
        let mut e = e;
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
    pub fn to_i64(&self) -> Option<i64> {
        if self.is_integer() {
            self.numer().to_i64()
        } else {
            None
        }
    }
    /// Nearest float, for display only.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
    pub fn inner(&self) -> &BigRational {
        &self.0
    }
    pub fn max_of(a: Rat, b: Rat) -> Rat {
        if a >= b {
            a
        } else {
            b
        }
    }
    pub fn min_of(a: Rat, b: Rat) -> Rat {
        if a <= b {
            a
        } else {
            b
        }
    }
}

/// lcm of two positive integers.
pub fn lcm(a: &BigInt, b: &BigInt) -> BigInt {
    a.lcm(b)
}

impl From<i64> for Rat {
    fn from(n: i64) -> Self {
        Rat::int(n)
    }
}

impl From<BigInt> for Rat {
    fn from(n: BigInt) -> Self {
        Rat::from_big(n)
    }
}

impl From<&BigInt> for Rat {
    fn from(n: &BigInt) -> Self {
        Rat::from_big(n.clone())
    }
}

impl FromStr for Rat {
    type Err = ParseRatError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let bad = || ParseRatError(s.to_string());
        let parse_int = |x: &str| -> Result<BigInt, ParseRatError> {
            let x = x.trim();
            let digits = x.strip_prefix(['+', '-']).unwrap_or(x);
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            BigInt::from_str(x.strip_prefix('+').unwrap_or(x)).map_err(|_| bad())
        };
        match t.split_once('/') {
            None => Ok(Rat::from_big(parse_int(t)?)),
            Some((n, d)) => {
                let n = parse_int(n)?;
                let d = parse_int(d)?;
                if d.is_zero() {
                    return Err(bad());
                }
                Ok(Rat::from_parts(n, d))
            }
        }
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $atr:ident, $am:ident) => {
        impl $tr<Rat> for Rat {
            type Output = Rat;
            fn $m(self, o: Rat) -> Rat {
                Rat(self.0.$m(o.0))
            }
        }
        impl<'a> $tr<&'a Rat> for Rat {
            type Output = Rat;
            fn $m(self, o: &'a Rat) -> Rat {
                Rat(self.0.$m(&o.0))
            }
        }
        impl<'a> $tr<Rat> for &'a Rat {
            type Output = Rat;
            fn $m(self, o: Rat) -> Rat {
                Rat((&self.0).$m(o.0))
            }
        }
        impl<'a, 'b> $tr<&'b Rat> for &'a Rat {
            type Output = Rat;
            fn $m(self, o: &'b Rat) -> Rat {
                Rat((&self.0).$m(&o.0))
            }
        }
        impl $atr<Rat> for Rat {
            fn $am(&mut self, o: Rat) {
                self.0.$am(o.0)
            }
        }
        impl<'a> $atr<&'a Rat> for Rat {
            fn $am(&mut self, o: &'a Rat) {
                self.0.$am(&o.0)
            }
        }
    };
}

binop!(Add, add, AddAssign, add_assign);
binop!(Sub, sub, SubAssign, sub_assign);
binop!(Mul, mul, MulAssign, mul_assign);
binop!(Div, div, DivAssign, div_assign);

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-&self.0)
    }
}

impl Sum for Rat {
    fn sum<I: Iterator<Item = Rat>>(it: I) -> Rat {
        it.fold(Rat::zero(), |a, b| a + b)
    }
}

impl<'a> Sum<&'a Rat> for Rat {
    fn sum<I: Iterator<Item = &'a Rat>>(it: I) -> Rat {
        it.fold(Rat::zero(), |a, b| a + b)
    }
}

impl Product for Rat {
    fn product<I: Iterator<Item = Rat>>(it: I) -> Rat {
        it.fold(Rat::one(), |a, b| a * b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_and_print_lowest_terms() {
        assert_eq!("2/4".parse::<Rat>().unwrap().to_string(), "1/2");
        assert_eq!("-6/3".parse::<Rat>().unwrap().to_string(), "-2");
        assert_eq!("3/-4".parse::<Rat>().unwrap().to_string(), "-3/4");
        assert_eq!("+7".parse::<Rat>().unwrap(), Rat::int(7));
        assert!("1/0".parse::<Rat>().is_err());
        assert!("1.5".parse::<Rat>().is_err());
        assert!("".parse::<Rat>().is_err());
    }

    #[test]
    fn pow_matches_repeated_product() {
        let x = Rat::new(3, 4);
        let mut acc = Rat::one();
        for e in 0..12 {
            assert_eq!(x.pow(e), acc);
            acc = &acc * &x;
        }
    }

    #[test]
    fn floor_ceil() {
        assert_eq!(Rat::new(-3, 2).floor(), BigInt::from(-2));
        assert_eq!(Rat::new(-3, 2).ceil(), BigInt::from(-1));
        assert_eq!(Rat::new(7, 7).ceil(), BigInt::from(1));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn cross_multiplication(a in any::<i64>(), b in 1i64..i64::MAX, c in any::<i64>(), d in 1i64..i64::MAX) {
            let x = Rat::from_parts(BigInt::from(a), BigInt::from(b));
            let y = Rat::from_parts(BigInt::from(c), BigInt::from(d));
            let lhs = (x + y) * Rat::int(d) * Rat::int(b);
            let rhs = Rat::from_big(BigInt::from(a) * d + BigInt::from(c) * b);
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn display_roundtrip(a in any::<i64>(), b in 1i64..1_000_000) {
            let x = Rat::new(a, b);
            prop_assert_eq!(x.to_string().parse::<Rat>().unwrap(), x);
        }
    }
}
