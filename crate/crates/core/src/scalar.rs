//! Scalar abstraction shared by every numerical routine in the crate.
//!
//! Algorithms are written against [`Real`]: the `num-traits` arithmetic
//! traits plus the handful of elementary functions the crate calls, each
//! required to be accurate to the working precision of the type.

use std::cmp::Ordering;
use std::fmt::{Debug, Display};
use std::ops::Neg;

use num_complex::Complex;
use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

use crate::dd::DoubleDouble;

/// Real scalar used throughout the crate (`f32`, `f64`, [`DoubleDouble`]).
pub trait Real:
    NumAssign
    + Copy
    + Neg<Output = Self>
    + PartialOrd
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    fn epsilon() -> Self;
    fn min_positive_value() -> Self;
    fn infinity() -> Self;
    fn pi() -> Self;
    fn abs(self) -> Self;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn sin_cos(self) -> (Self, Self);
    fn round(self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn is_finite(self) -> bool;

    fn max(self, other: Self) -> Self {
        if self >= other || other != other {
            self
        } else {
            other
        }
    }

    fn min(self, other: Self) -> Self {
        if self <= other || other != other {
            self
        } else {
            other
        }
    }
}

macro_rules! real_for_float {
    ($t:ty, $pi:expr) => {
        impl Real for $t {
            fn epsilon() -> Self {
                <$t>::EPSILON
            }
            fn min_positive_value() -> Self {
                <$t>::MIN_POSITIVE
            }
            fn infinity() -> Self {
                <$t>::INFINITY
            }
            fn pi() -> Self {
                $pi
            }
            fn abs(self) -> Self {
                Float::abs(self)
            }
            fn sqrt(self) -> Self {
                Float::sqrt(self)
            }
            fn exp(self) -> Self {
                Float::exp(self)
            }
            fn sin_cos(self) -> (Self, Self) {
                Float::sin_cos(self)
            }
            fn round(self) -> Self {
                Float::round(self)
            }
            fn powi(self, n: i32) -> Self {
                Float::powi(self, n)
            }
            fn is_finite(self) -> bool {
                Float::is_finite(self)
            }
            fn max(self, other: Self) -> Self {
                Float::max(self, other)
            }
            fn min(self, other: Self) -> Self {
                Float::min(self, other)
            }
        }
    };
}

real_for_float!(f32, std::f32::consts::PI);
real_for_float!(f64, std::f64::consts::PI);

impl Real for DoubleDouble {
    fn epsilon() -> Self {
        DoubleDouble::EPSILON
    }
    fn min_positive_value() -> Self {
        // smallest value whose low word is still a normal double
        DoubleDouble::from_f64(f64::MIN_POSITIVE * 2f64.powi(53))
    }
    fn infinity() -> Self {
        DoubleDouble::from_f64(f64::INFINITY)
    }
    fn pi() -> Self {
        DoubleDouble::PI
    }
    fn abs(self) -> Self {
        DoubleDouble::abs(self)
    }
    fn sqrt(self) -> Self {
        DoubleDouble::sqrt(self)
    }
    fn exp(self) -> Self {
        DoubleDouble::exp(self)
    }
    fn sin_cos(self) -> (Self, Self) {
        DoubleDouble::sin_cos(self)
    }
    fn round(self) -> Self {
        DoubleDouble::round(self)
    }
    fn powi(self, n: i32) -> Self {
        DoubleDouble::powi(self, n)
    }
    fn is_finite(self) -> bool {
        DoubleDouble::is_finite(self)
    }
}

/// Converts an `f64` literal into the scalar type.
#[inline]
pub fn lit<S: Real>(x: f64) -> S {
    S::from_f64(x).expect("f64 literal representable in scalar type")
}

/// Converts a count into the scalar type.
#[inline]
pub fn count<S: Real>(n: usize) -> S {
    S::from_usize(n).expect("count representable in scalar type")
}

#[inline]
pub fn to_f64<S: Real>(x: S) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[inline]
pub fn cabs<S: Real>(z: Complex<S>) -> S {
    let (a, b) = (z.re.abs(), z.im.abs());
    let (big, small) = if a >= b { (a, b) } else { (b, a) };
    if big == S::zero() {
        return S::zero();
    }
    let r = small / big;
    big * (S::one() + r * r).sqrt()
}

#[inline]
pub fn cexp<S: Real>(z: Complex<S>) -> Complex<S> {
    let m = z.re.exp();
    let (s, c) = z.im.sin_cos();
    Complex::new(m * c, m * s)
}

#[inline]
pub fn is_finite_c<S: Real>(z: Complex<S>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Principal square root: `Re ≥ 0`, and `Im ≥ 0` whenever `Re = 0`.
///
/// Negative reals (including those carrying a signed zero imaginary part)
/// map onto the positive imaginary axis.
pub fn csqrt<S: Real>(z: Complex<S>) -> Complex<S> {
    let zero = S::zero();
    if z.re == zero && z.im == zero {
        return Complex::new(zero, zero);
    }
    let two = lit::<S>(2.0);
    if z.im == zero {
        return if z.re > zero {
            Complex::new(z.re.sqrt(), zero)
        } else {
            Complex::new(zero, (-z.re).sqrt())
        };
    }
    let r = cabs(z);
    if z.re >= zero {
        let t = ((r + z.re) / two).sqrt();
        Complex::new(t, z.im / (two * t))
    } else {
        let t = ((r - z.re) / two).sqrt();
        let re = z.im.abs() / (two * t);
        let im = if z.im < zero { -t } else { t };
        Complex::new(re, im)
    }
}

/// Lexicographic order on `(Re, Im)`.
pub fn lex_cmp<S: Real>(a: &Complex<S>, b: &Complex<S>) -> Ordering {
    a.re.partial_cmp(&b.re)
        .unwrap_or(Ordering::Equal)
        .then(a.im.partial_cmp(&b.im).unwrap_or(Ordering::Equal))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csqrt_branch_rules() {
        let z = csqrt(Complex::new(-2.0f64 + 1.0, 0.0));
        assert_eq!(z, Complex::new(0.0, 1.0));
        let z = csqrt(Complex::new(-4.0f64, -0.0));
        assert_eq!(z, Complex::new(0.0, 2.0));
        let z = csqrt(Complex::new(3.0f64, -4.0));
        assert!((z - Complex::new(2.0, -1.0)).norm() < 1e-15);
        let z = csqrt(Complex::new(-3.0f64, 4.0));
        assert!((z - Complex::new(1.0, 2.0)).norm() < 1e-15);
        let z = csqrt(Complex::new(-3.0f64, -4.0));
        assert!((z - Complex::new(1.0, -2.0)).norm() < 1e-15);
    }

    #[test]
    fn cexp_in_double_double_matches_f64() {
        let z = Complex::new(DoubleDouble::from_f64(0.3), DoubleDouble::from_f64(-2.1));
        let w = cexp(z);
        let r = Complex::new(0.3f64, -2.1).exp();
        assert!((w.re.to_f64() - r.re).abs() < 1e-15);
        assert!((w.im.to_f64() - r.im).abs() < 1e-15);
    }

    #[test]
    fn max_min_ignore_nan() {
        let nan = DoubleDouble::from_f64(f64::NAN);
        let one = DoubleDouble::from_f64(1.0);
        assert_eq!(Real::max(one, nan), one);
        assert_eq!(Real::min(one, nan), one);
        assert_eq!(Real::max(one, DoubleDouble::from_f64(2.0)).to_f64(), 2.0);
    }

    #[test]
    fn lex_order() {
        let a = Complex::new(1.0, -1.0);
        let b = Complex::new(1.0, 2.0);
        assert_eq!(lex_cmp(&a, &b), Ordering::Less);
        assert_eq!(lex_cmp(&Complex::new(0.5, 9.0), &a), Ordering::Less);
    }
}
