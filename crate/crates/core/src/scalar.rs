//! Scalar abstraction for alignment scores.
//!
//! Binary Smatch counts are integers, so they can be carried exactly in a
//! rational type. Graded scores come from cosine similarities and live in
//! floating point. The matching engine is written once against [`Scalar`].

use std::fmt::Debug;

use num_rational::Ratio;
use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

/// Numeric type usable as an alignment score.
pub trait Scalar:
    Num + Clone + PartialOrd + Debug + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// `true` when addition and division are exact.
    const EXACT: bool;

    /// Slack used by branch-and-bound pruning so rounding never discards
    /// an optimal branch. Zero for exact types.
    fn slack() -> Self;

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    fn as_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;
    fn slack() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;
    fn slack() -> Self {
        1e-4
    }
}

impl Scalar for Ratio<i64> {
    const EXACT: bool = true;
    fn slack() -> Self {
        Ratio::from_integer(0)
    }
}

impl Scalar for Ratio<i128> {
    const EXACT: bool = true;
    fn slack() -> Self {
        Ratio::from_integer(0)
    }
}

/// Floating-point scalars, used where similarities come from vectors.
pub trait FloatScalar: Scalar + Float {}

impl FloatScalar for f32 {}
impl FloatScalar for f64 {}

pub(crate) fn max_of<S: Scalar>(a: S, b: S) -> S {
    if b > a {
        b
    } else {
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_convert() {
        assert_eq!(<Ratio<i64>>::from_count(7), Ratio::from_integer(7));
        assert_eq!(f64::from_count(3), 3.0);
        const { assert!(<Ratio<i64> as Scalar>::EXACT) };
        const { assert!(!<f32 as Scalar>::EXACT) };
    }

    #[test]
    fn ratio_to_f64() {
        let r = Ratio::new(12i64, 15);
        assert_eq!(r.as_f64(), 0.8);
    }
}
