//! Real scalar abstraction shared by the matrix, state and channel types.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
///
/// The tolerance tiers live on the scalar because the absolute values that
/// make sense for `f64` are below the resolution of `f32`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Entrywise tolerance for exact identities (hermiticity, trace, equality).
    const EXACT_TOL: Self;
    /// Tolerance for spectral reconstructions and unitarity.
    const SPECTRAL_TOL: Self;
    /// Most negative eigenvalue still accepted as positive semidefinite.
    const PSD_TOL: Self;
    /// Off-diagonal Frobenius norm at which Jacobi sweeps stop.
    const JACOBI_TOL: Self;

    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    const EXACT_TOL: Self = 1e-10;
    const SPECTRAL_TOL: Self = 1e-9;
    const PSD_TOL: Self = 1e-9;
    const JACOBI_TOL: Self = 1e-12;
}

impl Real for f32 {
    const EXACT_TOL: Self = 1e-5;
    const SPECTRAL_TOL: Self = 1e-4;
    const PSD_TOL: Self = 1e-4;
    const JACOBI_TOL: Self = 1e-6;
}

/// Complex scalar over a [`Real`].
pub type C<T> = Complex<T>;

pub(crate) fn c<T: Real>(re: T, im: T) -> C<T> {
    Complex::new(re, im)
}

pub(crate) fn re<T: Real>(x: T) -> C<T> {
    Complex::new(x, T::zero())
}

/// `-Σ p log₂ p` with `0·log 0 = 0`; entries in `[−PSD_TOL, 0)` are clamped to zero.
pub fn shannon_bits<T: Real>(probs: impl IntoIterator<Item = T>) -> T {
    let mut h = T::zero();
    for p in probs {
        let p = if p < T::zero() { T::zero() } else { p };
        if p > T::zero() {
            h = h - p * p.log2();
        }
    }
    h
}
