//! Numeric abstraction shared by every model in the crate.

use std::fmt::{Debug, Display};

use num_rational::Rational64;
pub use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

/// Scalar type for prices, values and rewards.
///
/// Implemented for `f32`, `f64` and [`Rational64`]. The rational type is used
/// where results have to be reproduced exactly.
pub trait Scalar:
    Num
    + Signed
    + Clone
    + PartialOrd
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// `n / d` in this scalar type.
    fn ratio(n: i64, d: i64) -> Self {
        Self::from_i64(n).expect("numerator out of range") / Self::from_i64(d).expect("denominator out of range")
    }

    /// Nearest representable value; rationals approximate with a bounded denominator.
    fn from_f64_lossy(x: f64) -> Self;

    /// Comparison slack: zero for exact types.
    fn tolerance() -> Self;

    /// `a == b` up to [`Scalar::tolerance`].
    fn near(a: &Self, b: &Self) -> bool {
        let d = a.clone() - b.clone();
        d.abs() <= Self::tolerance()
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count out of range")
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }

    fn sum_of<'a, I: IntoIterator<Item = &'a Self>>(items: I) -> Self {
        items.into_iter().fold(Self::zero(), |acc, x| acc + x.clone())
    }
}

impl Scalar for f32 {
    fn from_f64_lossy(x: f64) -> Self {
        x as f32
    }
    fn tolerance() -> Self {
        1e-4
    }
}

impl Scalar for f64 {
    fn from_f64_lossy(x: f64) -> Self {
        x
    }
    fn tolerance() -> Self {
        1e-9
    }
}

impl Scalar for Rational64 {
    fn from_f64_lossy(x: f64) -> Self {
        Rational64::approximate_float(x).unwrap_or_else(|| Rational64::from_integer(0))
    }
    fn tolerance() -> Self {
        Rational64::from_integer(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_is_exact_for_rationals() {
        let third = Rational64::ratio(1, 3);
        assert_eq!(third * Rational64::from_i64(3).unwrap(), Rational64::from_integer(1));
    }

    #[test]
    fn float_helpers() {
        assert_eq!(f64::ratio(1, 4), 0.25);
        assert_eq!(f32::from_count(3), 3.0);
        assert_eq!(f64::max_of(0.2, 0.7), 0.7);
        assert_eq!(f64::sum_of(&[0.25, 0.5]), 0.75);
    }

    #[test]
    fn lossy_conversion_round_trips_dyadics() {
        let r = Rational64::from_f64_lossy(0.375);
        assert_eq!(r, Rational64::new(3, 8));
        assert_eq!(r.to_f64_lossy(), 0.375);
    }
}
