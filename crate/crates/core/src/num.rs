//! Scalar abstraction shared by the simulator, the models and the optimizer.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real floating point type the whole crate is generic over.
///
/// Implemented for `f32` and `f64`. Exact-tolerance guarantees (norm
/// preservation to 1e-12, gradient agreement to 1e-9) only hold for `f64`;
/// `f32` is useful for quick training sweeps.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`, used for constants and RNG draws.
    fn of(x: f64) -> Self;

    fn to_f64_lossy(self) -> f64;

    fn half() -> Self {
        Self::of(0.5)
    }

    fn two() -> Self {
        Self::of(2.0)
    }
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Real for $t {
            #[inline(always)]
            fn of(x: f64) -> Self {
                x as $t
            }

            #[inline(always)]
            fn to_f64_lossy(self) -> f64 {
                self as f64
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);

#[cfg(test)]
mod tests {
    use super::*;

    fn roundtrip<T: Real>(x: f64) -> f64 {
        T::of(x).to_f64_lossy()
    }

    #[test]
    fn conversions() {
        assert_eq!(roundtrip::<f64>(0.1), 0.1);
        assert!((roundtrip::<f32>(0.1) - 0.1).abs() < 1e-7);
        assert_eq!(f64::half(), 0.5);
        assert_eq!(f32::two(), 2.0);
    }
}
