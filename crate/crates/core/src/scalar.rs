//! Scalar abstraction shared by every numerical routine in the crate.
//!
//! All math is written against [`Real`], implemented for `f32` and `f64`.
//! Tolerances quoted in the tests assume `f64`; `f32` is supported for
//! exploratory runs only.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(k: usize) -> Self {
        Self::from_usize(k).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

// Lanczos approximation, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma<T: Real>(x: T) -> T {
    let half = T::lit(0.5);
    if x < half {
        // reflection: Γ(x)Γ(1-x) = π / sin(πx)
        let pi = T::PI();
        return (pi / (pi * x).sin()).abs().ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let mut acc = T::lit(LANCZOS_COEF[0]);
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc = acc + T::lit(c) / (x + T::from_usize_lossy(i));
    }
    let t = x + T::lit(LANCZOS_G) + half;
    half * (T::lit(2.0) * T::PI()).ln() + (x + half) * t.ln() - t + acc.ln()
}

/// Gamma function for positive arguments.
pub fn gamma<T: Real>(x: T) -> T {
    ln_gamma(x).exp()
}

/// Γ(a) / Γ(b) evaluated through log-gamma.
pub fn gamma_ratio<T: Real>(a: T, b: T) -> T {
    (ln_gamma(a) - ln_gamma(b)).exp()
}

/// Relative difference `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn rel_diff<T: Real>(a: T, b: T) -> T {
    let scale = a.abs().max(b.abs());
    if scale == T::zero() {
        T::zero()
    } else {
        (a - b).abs() / scale
    }
}

/// Euclidean norm of a slice.
pub fn norm2<T: Real>(v: &[T]) -> T {
    v.iter().map(|&x| x * x).sum::<T>().sqrt()
}

/// Sign-preserving power `|t|^p sign(t)`; integer exponents use `t^p` directly.
pub(crate) fn signed_pow<T: Real>(t: T, p: T) -> T {
    match integral_exponent(p) {
        Some(k) => t.powi(k),
        None => t.abs().powf(p - T::one()) * t,
    }
}

/// Derivative of [`signed_pow`] in `t`.
pub(crate) fn signed_pow_deriv<T: Real>(t: T, p: T) -> T {
    match integral_exponent(p) {
        Some(0) => T::zero(),
        Some(k) => p * t.powi(k - 1),
        None => p * t.abs().powf(p - T::one()),
    }
}

fn integral_exponent<T: Real>(p: T) -> Option<i32> {
    if p.fract() == T::zero() && p.abs() < T::lit(64.0) {
        p.to_i32()
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gamma_matches_factorials_and_half_integers() {
        assert_relative_eq!(gamma(5.0_f64), 24.0, max_relative = 1e-13);
        assert_relative_eq!(gamma(0.5_f64), std::f64::consts::PI.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(
            gamma(4.5_f64),
            105.0 / 16.0 * std::f64::consts::PI.sqrt(),
            max_relative = 1e-13
        );
        assert_relative_eq!(gamma(0.25_f64), 3.625_609_908_221_908, max_relative = 1e-13);
    }

    #[test]
    fn ln_gamma_large_argument_is_finite() {
        // Stirling check at x = 200
        let x = 200.0_f64;
        let stirling = (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + 1.0 / (12.0 * x)
            - 1.0 / (360.0 * x.powi(3));
        assert_relative_eq!(ln_gamma(x), stirling, max_relative = 1e-14);
    }

    #[test]
    fn signed_pow_is_odd_for_fractional_exponents() {
        assert_relative_eq!(signed_pow(-2.0_f64, 1.5), -(2.0_f64.powf(1.5)));
        assert_eq!(signed_pow(-2.0_f64, 2.0), 4.0);
        assert_relative_eq!(signed_pow_deriv(-2.0_f64, 1.5), 1.5 * 2.0_f64.sqrt());
    }

    #[test]
    fn f32_gamma_is_usable() {
        assert!((gamma(3.0_f32) - 2.0).abs() < 1e-5);
    }
}
