//! Component values of a state vector.

use std::fmt::{Debug, Display};
use std::ops::{Add, Sub};

/// A non-negative, totally ordered component value.
///
/// Integral types are used for proposal counts and prices, `f64` for costs.
/// `f64` components are compared exactly; the engine never rounds.
pub trait LatticeValue:
    Copy
    + PartialOrd
    + Debug
    + Display
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + 'static
{
    const ZERO: Self;
    const ONE: Self;

    /// Value standing in for "no finite advance exists" (always above any top).
    fn unbounded() -> Self;

    fn from_level(level: u64) -> Self;

    /// The value as an exact non-negative integer, if it is one.
    fn as_level(self) -> Option<u64>;

    fn to_f64(self) -> f64;

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    /// `ceil(top / delta)` for strictly positive `delta`.
    fn steps(top: Self, delta: Self) -> u128;
}

macro_rules! int_value {
    ($($t:ty),*) => {$(
        impl LatticeValue for $t {
            const ZERO: Self = 0;
            const ONE: Self = 1;

            fn unbounded() -> Self {
                <$t>::MAX
            }

            fn from_level(level: u64) -> Self {
                level as $t
            }

            fn as_level(self) -> Option<u64> {
                Some(self as u64)
            }

            fn to_f64(self) -> f64 {
                self as f64
            }

            fn steps(top: Self, delta: Self) -> u128 {
                (top as u128).div_ceil(delta as u128)
            }
        }
    )*};
}

int_value!(u32, u64);

impl LatticeValue for f64 {
    const ZERO: Self = 0.0;
    const ONE: Self = 1.0;

    fn unbounded() -> Self {
        f64::INFINITY
    }

    fn from_level(level: u64) -> Self {
        level as f64
    }

    fn as_level(self) -> Option<u64> {
        if self >= 0.0 && self.fract() == 0.0 && self < 9.007_199_254_740_992e15 {
            Some(self as u64)
        } else {
            None
        }
    }

    fn to_f64(self) -> f64 {
        self
    }

    fn steps(top: Self, delta: Self) -> u128 {
        let s = (top / delta).ceil();
        if s.is_finite() && s >= 0.0 {
            s as u128
        } else {
            u128::MAX
        }
    }
}

/// Step assumed for problems with non-integral inputs, where no positive
/// lower bound on advancement is known in general.
pub const REAL_STEP_EPSILON: f64 = 1e-9;

/// Smallest guaranteed advancement for problems whose values are built from
/// `inputs` by `+`, `-`, `min` and `max`: the gcd of the inputs when they are
/// all integral, `None` otherwise.
pub fn integral_step(inputs: impl IntoIterator<Item = f64>) -> Option<f64> {
    let mut g: u64 = 0;
    for x in inputs {
        let level = x.as_level()?;
        g = gcd(g, level);
    }
    Some(if g == 0 { 1.0 } else { g as f64 })
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_is_gcd_of_integral_inputs() {
        assert_eq!(integral_step([4.0, 6.0, 0.0]), Some(2.0));
        assert_eq!(integral_step([]), Some(1.0));
        assert_eq!(integral_step([0.0, 0.0]), Some(1.0));
        assert_eq!(integral_step([1.5, 3.0]), None);
    }

    #[test]
    fn steps_round_up() {
        assert_eq!(u64::steps(7, 2), 4);
        assert_eq!(u64::steps(0, 1), 0);
        assert_eq!(f64::steps(7.0, 2.0), 4);
        assert_eq!(f64::steps(f64::INFINITY, 1.0), u128::MAX);
    }

    #[test]
    fn levels() {
        assert_eq!(3.0f64.as_level(), Some(3));
        assert_eq!(2.5f64.as_level(), None);
        assert_eq!(f64::INFINITY.as_level(), None);
        assert_eq!(7u32.as_level(), Some(7));
    }
}
