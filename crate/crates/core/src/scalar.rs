use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumCast};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Binary floating-point scalar the optimizers are written against: `f32` or `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + NumCast
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Significand precision including the implicit leading bit.
    const SIGNIFICAND_BITS: u32;

    /// Largest mutation standard deviation GCS tolerates before resetting.
    fn default_sd_overflow_limit() -> Self;

    /// Draw from the standard normal distribution (ziggurat).
    fn sample_standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Lossy conversion from an `f64` literal.
    fn lit(v: f64) -> Self {
        <Self as NumCast>::from(v).expect("f64 literal representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        <f64 as NumCast>::from(self).unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    const SIGNIFICAND_BITS: u32 = f64::MANTISSA_DIGITS;

    fn default_sd_overflow_limit() -> Self {
        1e300
    }

    fn sample_standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
}

impl Scalar for f32 {
    const SIGNIFICAND_BITS: u32 = f32::MANTISSA_DIGITS;

    fn default_sd_overflow_limit() -> Self {
        1e36
    }

    fn sample_standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
}

/// Distance between `v` and the next representable value away from zero.
pub fn ulp<T: Scalar>(v: T) -> T {
    let v = v.abs();
    if !v.is_finite() {
        return T::nan();
    }
    if v.is_zero() {
        return T::min_positive_value() * T::epsilon();
    }
    let up = next_up(v);
    up - v
}

/// Distance between a positive finite `v` and its predecessor. Equals
/// `ulp(v)` except at powers of two, where it is half as large.
pub fn gap_below<T: Scalar>(v: T) -> T {
    v - next_down(v)
}

/// Smallest representable value strictly greater than `v`.
pub fn next_up<T: Scalar>(v: T) -> T {
    step_bits(v, true)
}

/// Largest representable value strictly less than `v`.
pub fn next_down<T: Scalar>(v: T) -> T {
    step_bits(v, false)
}

fn step_bits<T: Scalar>(v: T, up: bool) -> T {
    if v.is_nan() || (v.is_infinite() && (v > T::zero()) == up) {
        return v;
    }
    if v.is_zero() {
        let tiny = T::min_positive_value() * T::epsilon();
        return if up { tiny } else { -tiny };
    }
    // Work through f64 bit patterns for f64, and through f32 ones otherwise.
    if T::SIGNIFICAND_BITS == f64::MANTISSA_DIGITS {
        let x = v.to_f64_lossy();
        let bits = x.to_bits();
        let away = (x > 0.0) == up;
        let next = if away { bits + 1 } else { bits - 1 };
        T::lit(f64::from_bits(next))
    } else {
        let x = <f32 as NumCast>::from(v).expect("f32 scalar");
        let bits = x.to_bits();
        let away = (x > 0.0) == up;
        let next = if away { bits + 1 } else { bits - 1 };
        T::lit(f32::from_bits(next) as f64)
    }
}

/// Number of representable values between `a` and `b` (0 when bit-equal).
pub fn ulps_between<T: Scalar>(a: T, b: T) -> u64 {
    fn ordered(x: f64) -> i64 {
        let bits = x.to_bits() as i64;
        if bits < 0 {
            i64::MIN - bits
        } else {
            bits
        }
    }
    fn ordered32(x: f32) -> i64 {
        let bits = x.to_bits() as i32;
        (if bits < 0 { i32::MIN - bits } else { bits }) as i64
    }
    if a.is_nan() || b.is_nan() {
        return u64::MAX;
    }
    if T::SIGNIFICAND_BITS == f64::MANTISSA_DIGITS {
        ordered(a.to_f64_lossy()).abs_diff(ordered(b.to_f64_lossy()))
    } else {
        let a32 = <f32 as NumCast>::from(a).expect("f32 scalar");
        let b32 = <f32 as NumCast>::from(b).expect("f32 scalar");
        ordered32(a32).abs_diff(ordered32(b32))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ulp_of_fifteen() {
        assert_eq!(ulp(15.0_f64), 2f64.powi(-49));
        assert_eq!(gap_below(15.0_f64), 2f64.powi(-49));
        assert_eq!(ulp(15.0_f32), 2f32.powi(-20));
    }

    #[test]
    fn gap_below_power_of_two_is_half_ulp() {
        assert_eq!(gap_below(16.0_f64), ulp(16.0_f64) / 2.0);
        assert_eq!(gap_below(1.0_f32), ulp(1.0_f32) / 2.0);
    }

    #[test]
    fn neighbours() {
        assert_eq!(next_up(1.0_f64), 1.0 + f64::EPSILON);
        assert_eq!(next_down(-1.0_f64), -1.0 - f64::EPSILON);
        assert_eq!(next_up(-0.0_f64), -next_down(0.0_f64));
        assert_eq!(ulps_between(1.0_f64, next_up(next_up(1.0))), 2);
        assert_eq!(ulps_between(-0.0_f64, 0.0), 0);
        assert_eq!(ulps_between(1.0_f32, next_up(1.0_f32)), 1);
    }
}
