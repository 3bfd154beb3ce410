//! Scalar abstraction shared by every numerical module.
//!
//! All operator and frame code is generic over [`Real`], which is implemented
//! for `f32` and `f64`. The acceptance tolerances (1e-10 and tighter) are only
//! meaningful in double precision; `f32` is supported for smoke-level use.

use nalgebra::{Complex, RealField};
use num_traits::{FromPrimitive, ToPrimitive};

/// A real floating-point scalar usable as the base field of operators.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync + 'static {}

impl<T> Real for T where T: RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync + 'static {}

/// Complex number over a [`Real`] scalar.
pub type C<T> = Complex<T>;

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

#[inline]
pub fn from_usize<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("usize representable in scalar type")
}

#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[inline]
pub fn cplx<T: Real>(re: T, im: T) -> C<T> {
    Complex::new(re, im)
}

#[inline]
pub fn creal<T: Real>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}

/// `exp(i * theta)`.
#[inline]
pub fn cis<T: Real>(theta: T) -> C<T> {
    Complex::new(theta.cos(), theta.sin())
}

/// `ω^k` with `ω = exp(2πi/d)`; `k` is reduced modulo `d` first.
pub fn root_of_unity<T: Real>(d: usize, k: i64) -> C<T> {
    let d_i = d as i64;
    let k = k.rem_euclid(d_i);
    cis(T::two_pi() * from_usize::<T>(k as usize) / from_usize::<T>(d))
}

/// Half-integer power `ω^{x/2} := exp(iπx/d)`.
///
/// This branch is periodic in `x` with period `2d`.
pub fn half_root_of_unity<T: Real>(d: usize, x: i64) -> C<T> {
    let period = 2 * d as i64;
    let x = x.rem_euclid(period);
    cis(T::pi() * lit::<T>(x as f64) / from_usize::<T>(d))
}

/// Modulus `|z|`.
#[inline]
pub fn cabs<T: Real>(z: C<T>) -> T {
    z.re.hypot(z.im)
}
