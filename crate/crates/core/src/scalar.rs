//! Floating-point abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar type the library is generic over (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal, saturating to zero for values below the type's range.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Converts a count to the scalar type.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    /// Smallest factor treated as a nonzero Loschmidt amplitude.
    #[inline]
    fn underflow_floor() -> Self {
        Self::lit(1e-300).max(Self::min_positive_value())
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Reduces `x` into `[0, period)`.
#[inline]
pub(crate) fn modulo<T: Real>(x: T, period: T) -> T {
    let r = x % period;
    if r < T::zero() {
        // r + period can round up to period itself
        let shifted = r + period;
        if shifted >= period {
            T::zero()
        } else {
            shifted
        }
    } else {
        // -0 % p is -0
        r + T::zero()
    }
}

/// Wraps a momentum into `(-pi, pi]`.
#[inline]
pub(crate) fn wrap_momentum<T: Real>(k: T) -> T {
    let two_pi = T::TAU();
    let mut r = modulo(k + T::PI(), two_pi) - T::PI();
    if r <= -T::PI() {
        r = T::PI();
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn modulo_is_nonnegative() {
        assert_eq!(modulo(-0.5_f64, 2.0), 1.5);
        assert_eq!(modulo(4.5_f64, 2.0), 0.5);
        assert_eq!(modulo(-1e-18_f64, 2.0 * PI), 0.0);
        assert!(modulo(-2.0 * PI, 2.0 * PI).is_sign_positive());
    }

    #[test]
    fn wrap_maps_minus_pi_to_pi() {
        assert_eq!(wrap_momentum(-PI), PI);
        assert!((wrap_momentum(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn floor_is_positive_for_f32() {
        assert!(f32::underflow_floor() > 0.0);
        assert_eq!(f64::underflow_floor(), 1e-300);
    }
}
