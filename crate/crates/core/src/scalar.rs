//! Arithmetic modes: exact rationals for closed-form fixtures, `f64` for
//! numerically computed spectral data.

use std::collections::BTreeMap;
use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive};

use crate::alphabet::Letter;

/// A field in which the measure and eigenvector identities are evaluated.
pub trait Scalar: Num + Signed + Clone + PartialOrd + Debug {
    /// Whether equalities in this field are exact.
    const EXACT: bool;

    fn from_u64(v: u64) -> Self;
    fn from_u128(v: u128) -> Self;
    fn from_rational(r: &BigRational) -> Self;
    fn as_f64(&self) -> f64;

    fn powi(&self, n: usize) -> Self {
        num_traits::pow::pow(self.clone(), n)
    }

    fn mode_name() -> &'static str {
        if Self::EXACT {
            "rational"
        } else {
            "float"
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_u64(v: u64) -> Self {
        v as f64
    }
    fn from_u128(v: u128) -> Self {
        v as f64
    }
    fn from_rational(r: &BigRational) -> Self {
        r.to_f64().unwrap_or(f64::NAN)
    }
    fn as_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_u64(v: u64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_u128(v: u128) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }
    fn as_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// `p/q` as a big rational.
pub fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// `2ᵏ` for any integer k, exactly.
pub fn pow2(k: i64) -> BigRational {
    let base = BigRational::from_integer(BigInt::from(2));
    if k >= 0 {
        num_traits::pow::pow(base, k as usize)
    } else {
        BigRational::one() / num_traits::pow::pow(base, (-k) as usize)
    }
}

/// A Perron–Frobenius value with left and right eigenvector entries on a
/// finite set of letters (the "interior" where they are trusted).
#[derive(Clone, Debug, PartialEq)]
pub struct Eigenpair<T> {
    pub lambda: T,
    pub left: BTreeMap<Letter, T>,
    pub right: BTreeMap<Letter, T>,
}

impl<T: Scalar> Eigenpair<T> {
    pub fn map<U, F: Fn(&T) -> U>(&self, f: F) -> Eigenpair<U> {
        Eigenpair {
            lambda: f(&self.lambda),
            left: self.left.iter().map(|(a, v)| (*a, f(v))).collect(),
            right: self.right.iter().map(|(a, v)| (*a, f(v))).collect(),
        }
    }

    pub fn to_f64(&self) -> Eigenpair<f64> {
        self.map(Scalar::as_f64)
    }

    /// Multiplies the left vector by `c` (eigenvectors are only defined up to
    /// positive scalars).
    pub fn scale_left(&self, c: &T) -> Self {
        Eigenpair {
            lambda: self.lambda.clone(),
            left: self
                .left
                .iter()
                .map(|(a, v)| (*a, v.clone() * c.clone()))
                .collect(),
            right: self.right.clone(),
        }
    }

    /// Sum of the left entries on the stored letters.
    pub fn left_sum(&self) -> T {
        self.left.values().fold(T::zero(), |s, v| s + v.clone())
    }

    pub fn all_positive(&self) -> bool {
        self.lambda > T::zero()
            && self.left.values().all(|v| *v > T::zero())
            && self.right.values().all(|v| *v > T::zero())
    }
}

impl Eigenpair<f64> {
    pub fn is_finite(&self) -> bool {
        self.lambda.is_finite()
            && self.left.values().all(|v| v.is_finite())
            && self.right.values().all(|v| v.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn powers_of_two() {
        assert_eq!(pow2(3), ratio(8, 1));
        assert_eq!(pow2(-2), ratio(1, 4));
        assert_eq!(pow2(0), ratio(1, 1));
    }

    #[test]
    fn conversions() {
        assert_eq!(<f64 as Scalar>::from_rational(&ratio(1, 4)), 0.25);
        assert_eq!(<BigRational as Scalar>::from_u128(7).as_f64(), 7.0);
        assert_eq!(<BigRational as Scalar>::mode_name(), "rational");
        assert_eq!(ratio(2, 3).powi(2), ratio(4, 9));
    }
}
