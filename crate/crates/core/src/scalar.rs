//! Real scalar abstraction shared by every numerical routine in the crate.

use nalgebra::{Complex, RealField};
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point scalar (`f32` or `f64`) underlying all complex matrices.
///
/// The associated constants give the default tolerances for each precision.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync + std::fmt::Display + 'static
{
    /// Entrywise equality tolerance.
    const EQ_TOL: f64;
    /// Singular value / eigenvalue cutoff for numerical rank.
    const RANK_TOL: f64;
    /// Allowed negative eigenvalue for positive semidefinite inputs.
    const PSD_TOL: f64;

    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    const EQ_TOL: f64 = 1e-9;
    const RANK_TOL: f64 = 1e-9;
    const PSD_TOL: f64 = 1e-10;
}

impl Real for f32 {
    const EQ_TOL: f64 = 1e-4;
    const RANK_TOL: f64 = 1e-4;
    const PSD_TOL: f64 = 1e-5;
}

#[inline]
pub(crate) fn c<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn cr<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

/// Modulus of a complex scalar.
#[inline]
pub fn cabs<T: Real>(z: Complex<T>) -> T {
    z.re.hypot(z.im)
}
