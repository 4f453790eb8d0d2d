//! Exact non-negative dyadic rationals `p / 2^k`.
//!
//! Request weights and the `v_{α,i}` sums are compared against powers of
//! two, so they are kept exact rather than approximated in floating point.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign};
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// `numerator / 2^exponent`, kept normalised (numerator odd, or zero with
/// exponent zero) so that structural equality is numeric equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    numerator: BigUint,
    exponent: u32,
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic {
            numerator: BigUint::zero(),
            exponent: 0,
        }
    }

    pub fn one() -> Self {
        Dyadic::from_integer(1)
    }

    pub fn from_integer(n: u64) -> Self {
        Dyadic::new(BigUint::from(n), 0)
    }

    /// `2^{-k}`.
    pub fn pow2_neg(k: u32) -> Self {
        Dyadic {
            numerator: BigUint::one(),
            exponent: k,
        }
    }

    pub fn new(numerator: BigUint, exponent: u32) -> Self {
        let mut d = Dyadic {
            numerator,
            exponent,
        };
        d.normalise();
        d
    }

    fn normalise(&mut self) {
        if self.numerator.is_zero() {
            self.exponent = 0;
            return;
        }
        let tz = self.numerator.trailing_zeros().unwrap_or(0);
        let shift = tz.min(self.exponent as u64) as u32;
        if shift > 0 {
            self.numerator >>= shift;
            self.exponent -= shift;
        }
    }

    pub fn numerator(&self) -> &BigUint {
        &self.numerator
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    /// Multiply by `2^k`.
    pub fn shl(&self, k: u32) -> Self {
        if k <= self.exponent {
            Dyadic::new(self.numerator.clone(), self.exponent - k)
        } else {
            Dyadic::new(&self.numerator << (k - self.exponent), 0)
        }
    }

    pub fn to_f64(&self) -> f64 {
        let n: f64 = self.numerator.to_string().parse().unwrap_or(f64::INFINITY);
        n * 2f64.powi(-(self.exponent as i32))
    }

    fn aligned(&self, other: &Self) -> (BigUint, BigUint, u32) {
        let e = self.exponent.max(other.exponent);
        let a = &self.numerator << (e - self.exponent);
        let b = &other.numerator << (e - other.exponent);
        (a, b, e)
    }
}

impl Default for Dyadic {
    fn default() -> Self {
        Dyadic::zero()
    }
}

impl Add for &Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        let (a, b, e) = self.aligned(rhs);
        Dyadic::new(a + b, e)
    }
}

impl Add for Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: Dyadic) -> Dyadic {
        &self + &rhs
    }
}

impl AddAssign<&Dyadic> for Dyadic {
    fn add_assign(&mut self, rhs: &Dyadic) {
        *self = &*self + rhs;
    }
}

impl std::iter::Sum for Dyadic {
    fn sum<I: Iterator<Item = Dyadic>>(iter: I) -> Self {
        iter.fold(Dyadic::zero(), |acc, x| &acc + &x)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = self.aligned(other);
        a.cmp(&b)
    }
}

/// Renders as `p` for integers and `p/q` otherwise, with `q = 2^k`.
impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent == 0 {
            write!(f, "{}", self.numerator)
        } else {
            write!(f, "{}/{}", self.numerator, BigUint::one() << self.exponent)
        }
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("not a dyadic rational: {0:?}")]
pub struct ParseDyadicError(pub String);

impl FromStr for Dyadic {
    type Err = ParseDyadicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseDyadicError(s.to_string());
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n, d),
            None => (s, "1"),
        };
        let numerator: BigUint = num.trim().parse().map_err(|_| err())?;
        let den: BigUint = den.trim().parse().map_err(|_| err())?;
        if den.is_zero() || den.count_ones() != 1 {
            return Err(err());
        }
        let exponent = den.trailing_zeros().unwrap_or(0);
        let exponent = u32::try_from(exponent).map_err(|_| err())?;
        Ok(Dyadic::new(numerator, exponent))
    }
}

impl Serialize for Dyadic {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Dyadic {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sums_of_powers() {
        let half = Dyadic::pow2_neg(1);
        assert_eq!(&half + &half, Dyadic::one());
        let w = [1, 1, 1].iter().map(|&k| Dyadic::pow2_neg(k)).sum::<Dyadic>();
        assert_eq!(w.to_string(), "3/2");
        assert!(w > Dyadic::one());
    }

    #[test]
    fn display_and_parse() {
        assert_eq!(Dyadic::zero().to_string(), "0");
        assert_eq!(Dyadic::pow2_neg(3).to_string(), "1/8");
        assert_eq!("6/16".parse::<Dyadic>().unwrap(), "3/8".parse().unwrap());
        assert!("1/3".parse::<Dyadic>().is_err());
    }

    #[test]
    fn shifting() {
        assert_eq!(Dyadic::pow2_neg(5).shl(5), Dyadic::one());
        assert_eq!(Dyadic::pow2_neg(1).shl(3), Dyadic::from_integer(4));
    }

    proptest! {
        #[test]
        fn text_roundtrip_is_exact(ks in proptest::collection::vec(0u32..90, 0..40)) {
            let w: Dyadic = ks.iter().map(|&k| Dyadic::pow2_neg(k)).sum();
            let back: Dyadic = w.to_string().parse().unwrap();
            prop_assert_eq!(back, w);
        }

        #[test]
        fn addition_commutes(a in 0u32..70, b in 0u32..70, c in 0u32..70) {
            let (x, y, z) = (Dyadic::pow2_neg(a), Dyadic::pow2_neg(b), Dyadic::pow2_neg(c));
            prop_assert_eq!(&(&x + &y) + &z, &x + &(&y + &z));
            prop_assert_eq!(&x + &y, &y + &x);
        }
    }
}
