//! Scalar abstraction shared by the matrix models and the special functions.

use nalgebra::RealField;
use num_traits::{FloatConst, FromPrimitive, ToPrimitive};

/// Real floating-point scalar usable by every generic routine in the crate.
///
/// Implemented for `f32` and `f64`. Integration drivers, Monte Carlo and
/// reports run in `f64`; models, densities, spherical vectors and Bessel
/// kernels accept either.
pub trait Scalar:
    RealField + Copy + FromPrimitive + ToPrimitive + FloatConst + Send + Sync + 'static
{
    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }

    /// Machine epsilon of the type.
    fn eps() -> Self;
}

impl Scalar for f32 {
    fn eps() -> Self {
        f32::EPSILON
    }
}

impl Scalar for f64 {
    fn eps() -> Self {
        f64::EPSILON
    }
}

/// Orthogonality / unitarity tolerance for compact group elements.
pub(crate) fn unitary_tolerance<T: Scalar>() -> T {
    let floor = T::lit(1e-12);
    let scaled = T::eps() * T::lit(64.0);
    if scaled > floor {
        scaled
    } else {
        floor
    }
}
