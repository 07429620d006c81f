//! Numeric abstraction for the closed-form estimators.
//!
//! Every estimator whose formula only needs field operations is generic over
//! [`Scalar`], so the same code runs on `f64` for production use and on
//! [`Exact`] rationals where identities between estimators must hold exactly.

use std::fmt::Debug;

use num_rational::Ratio;
use num_traits::Num;

/// Exact rational arithmetic used for identity checks.
pub type Exact = Ratio<i128>;

pub trait Scalar: Clone + PartialOrd + Debug + Num + Send + Sync + 'static {
    fn from_count(n: u64) -> Self;
    fn to_f64(&self) -> f64;

    fn from_usize(n: usize) -> Self {
        Self::from_count(n as u64)
    }

    fn is_positive(&self) -> bool {
        *self > Self::zero()
    }

    fn is_negative(&self) -> bool {
        *self < Self::zero()
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl Scalar for f64 {
    fn from_count(n: u64) -> Self {
        n as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for Exact {
    fn from_count(n: u64) -> Self {
        Ratio::from_integer(n as i128)
    }

    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

/// Convenience constructor for exact rationals.
pub fn exact(numer: i128, denom: i128) -> Exact {
    Ratio::new(numer, denom)
}

pub(crate) fn sum<T: Scalar>(values: impl IntoIterator<Item = T>) -> T {
    values.into_iter().fold(T::zero(), |acc, v| acc + v)
}
