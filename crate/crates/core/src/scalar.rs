//! Floating point abstraction shared by the statistical and plant code.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use ndarray::ScalarOperand;

/// Real scalar used throughout the numeric core.
///
/// Implemented for `f32` and `f64`. The LP layer works in `f64` only, so
/// anything that feeds the solver converts through [`Scalar::to_f64_lossy`].
pub trait Scalar:
    Float
    + FloatConst
    + ScalarOperand
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Panics only if the target cannot
    /// represent finite values, which never happens for `f32`/`f64`.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("finite literal")
    }

    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize fits in float")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Tolerance used by iterative special-function routines.
    #[inline]
    fn series_tol() -> Self {
        Self::epsilon() * Self::lit(4.0)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
