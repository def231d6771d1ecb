//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point type usable as the crate's scalar (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal, panicking only for types that cannot hold it.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).unwrap_or_else(Self::infinity)
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Volume of the unit ball in `R^d`.
pub fn unit_ball_volume<T: Real>(d: usize) -> T {
    // alpha_0 = 1, alpha_1 = 2, alpha_d = alpha_{d-2} * 2 pi / d
    let two_pi = T::PI() + T::PI();
    let mut a = if d % 2 == 0 { T::one() } else { T::lit(2.0) };
    let mut k = if d % 2 == 0 { 2 } else { 3 };
    while k <= d {
        a = a * two_pi / T::from_usize_lossy(k);
        k += 2;
    }
    a
}

/// Surface area of the unit sphere in `R^d`, i.e. `d * alpha_d`.
pub fn unit_sphere_area<T: Real>(d: usize) -> T {
    T::from_usize_lossy(d) * unit_ball_volume::<T>(d)
}

/// `x^n` for a small non-negative integer exponent.
#[inline]
pub fn powi<T: Real>(x: T, n: usize) -> T {
    let mut r = T::one();
    for _ in 0..n {
        r = r * x;
    }
    r
}

/// `ln(n!)` by direct summation.
pub fn ln_factorial<T: Real>(n: usize) -> T {
    let mut acc = T::zero();
    for i in 2..=n {
        acc = acc + T::from_usize_lossy(i).ln();
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_volumes_match_closed_forms() {
        let pi = std::f64::consts::PI;
        assert_eq!(unit_ball_volume::<f64>(0), 1.0);
        assert_eq!(unit_ball_volume::<f64>(1), 2.0);
        assert!((unit_ball_volume::<f64>(2) - pi).abs() < 1e-15);
        assert!((unit_ball_volume::<f64>(3) - 4.0 * pi / 3.0).abs() < 1e-14);
        assert!((unit_ball_volume::<f64>(4) - pi * pi / 2.0).abs() < 1e-14);
        assert!((unit_ball_volume::<f32>(2) - std::f32::consts::PI).abs() < 1e-6);
    }

    #[test]
    fn factorial_logs() {
        let v: f64 = ln_factorial(5);
        assert!((v - 120f64.ln()).abs() < 1e-13);
        assert_eq!(ln_factorial::<f64>(0), 0.0);
    }
}
