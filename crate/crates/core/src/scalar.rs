//! Scalar abstraction shared by every numerical routine in the crate.
//!
//! All math is written against [`Real`], so the same code runs in `f32`
//! and `f64`. Complex entries are `Complex<T>` from `num-complex` (re-exported
//! by nalgebra), and dense matrices are nalgebra `DMatrix<Complex<T>>`.

use std::fmt::{Debug, Display};

use nalgebra::{DMatrix, RealField};
use num_traits::{FromPrimitive, ToPrimitive};

pub use nalgebra::Complex;

/// Real scalar usable by the solvers: `f32` or `f64`.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Default + Debug + Display + Send + Sync + 'static
{
    /// Unit roundoff of the type.
    fn machine_eps() -> Self;

    /// Converts an `f64` literal. Panics only for values the type cannot hold.
    fn lit(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("literal out of range for scalar type")
    }

    fn from_usize_lossy(v: usize) -> Self {
        <Self as FromPrimitive>::from_usize(v).expect("integer out of range for scalar type")
    }

    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {
    fn machine_eps() -> Self {
        f32::EPSILON
    }
}

impl Real for f64 {
    fn machine_eps() -> Self {
        f64::EPSILON
    }
}

/// Dense complex matrix; also the representation of every lifted matrix.
pub type CMatrix<T> = DMatrix<Complex<T>>;

#[inline]
pub fn cz<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

#[inline]
pub fn creal<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

/// `exp(i·2π·phase)`.
#[inline]
pub fn cis_turns<T: Real>(phase: T) -> Complex<T> {
    let angle = T::two_pi() * phase;
    Complex::new(angle.cos(), angle.sin())
}
