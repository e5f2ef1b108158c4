use std::fmt::{Debug, Display};
use std::iter::Sum;

use ndarray::ScalarOperand;
use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point scalar the whole pipeline is generic over: `f32` or `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + ScalarOperand
    + Sum<Self>
    + for<'a> Sum<&'a Self>
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Lossy conversion from a count.
    fn of_usize(x: usize) -> Self {
        Self::from_usize(x).expect("usize representable")
    }

    /// Tolerance used when validating that masses sum to one.
    ///
    /// 1e-10 for `f64`; scaled machine epsilon for narrower types.
    fn mass_tolerance() -> Self {
        let scaled = Self::epsilon() * Self::lit(1000.0);
        if scaled > Self::lit(1e-10) {
            scaled
        } else {
            Self::lit(1e-10)
        }
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `x ln x` with the `0 ln 0 = 0` convention.
pub(crate) fn xlogx<T: Scalar>(x: T) -> T {
    if x > T::zero() {
        x * x.ln()
    } else {
        T::zero()
    }
}

/// Numerically stable `ln Σ exp(v_i)`.
pub fn log_sum_exp<T: Scalar>(values: impl IntoIterator<Item = T> + Clone) -> T {
    let max = values
        .clone()
        .into_iter()
        .fold(T::neg_infinity(), |acc, v| if v > acc { v } else { acc });
    if max == T::neg_infinity() {
        return max;
    }
    let s: T = values.into_iter().map(|v| (v - max).exp()).sum();
    max + s.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lse_matches_naive_and_survives_underflow() {
        let v = [0.0_f64, -0.5, -1.0];
        let naive = v.iter().map(|x| x.exp()).sum::<f64>().ln();
        assert!((log_sum_exp(v) - naive).abs() < 1e-15);
        let tiny = [-2000.0_f64, -2000.0];
        assert!((log_sum_exp(tiny) - (-2000.0 + 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn tolerance_per_width() {
        assert_eq!(f64::mass_tolerance(), 1e-10);
        assert!(f32::mass_tolerance() > 1e-5);
    }
}
