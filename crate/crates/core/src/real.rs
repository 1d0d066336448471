use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, NumAssign};
use rustfft::FftNum;

/// Floating point scalar the solver is generic over.
///
/// Implemented for `f32` and `f64`. Every tolerance quoted in the tests
/// assumes `f64`; the `f32` instantiation is useful for quick exploratory
/// runs and for checking that nothing silently depends on double precision.
pub trait Real:
    Float + FloatConst + FftNum + NumAssign + Default + Display + LowerExp + Debug + Sum + Send + Sync + 'static
{
    /// Converts an `f64` literal. Lossy for `f32`.
    fn lit(x: f64) -> Self;

    fn from_count(n: usize) -> Self {
        Self::lit(n as f64)
    }

    fn to_f64_lossy(self) -> f64;
}

impl Real for f32 {
    #[inline]
    fn lit(x: f64) -> Self {
        x as f32
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    #[inline]
    fn lit(x: f64) -> Self {
        x
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self
    }
}
