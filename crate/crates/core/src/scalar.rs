//! Scalar abstraction for the numeric engines.
//!
//! Rate evaluation, ODE integration and ensemble statistics are generic
//! over the floating-point type; `f64` is the default used by the CLI and
//! all file formats (see the aliases at the crate root).

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Conversion from `f64`; used to inject model constants
    /// (rate constants, initial amounts) into the working precision.
    fn from_f64_lossy(value: f64) -> Self {
        <Self as FromPrimitive>::from_f64(value).expect("finite f64 converts to any Scalar")
    }

    /// Conversion from a molecule count.
    fn from_count(count: i64) -> Self {
        <Self as FromPrimitive>::from_i64(count).expect("i64 converts to any Scalar")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
