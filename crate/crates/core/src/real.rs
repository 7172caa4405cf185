use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, NumAssign};
use rustfft::FftNum;

/// Floating-point scalar the solver is generic over.
///
/// `Real` pulls in both `Float` and (through `FftNum`) `Signed`, so `abs` and
/// `signum` are ambiguous as methods; call them as `Float::abs(x)`.
pub trait Real: Float + FloatConst + NumAssign + FftNum + Display + Debug + Sum + Default {
    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Converts a count or index.
    #[inline]
    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
