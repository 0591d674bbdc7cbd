//! Double-double arithmetic (about 32 significant digits).
//!
//! A value is the unevaluated sum `hi + lo` with `|lo| ≤ ulp(hi)/2`. The
//! kernels are the usual error-free transformations (`two_sum`, FMA-based
//! `two_prod`) with the accurate ("IEEE") addition and the three-quotient
//! division. Only the operations the crate needs are provided.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, RemAssign, Sub, SubAssign};

use num_traits::{FromPrimitive, Num, One, ToPrimitive, Zero};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DoubleDouble {
    /// 2⁻¹⁰⁴
    pub const EPSILON: Self = Self { hi: 4.930380657631324e-32, lo: 0.0 };
    pub const PI: Self = Self { hi: 3.141592653589793, lo: 1.2246467991473532e-16 };
    pub const FRAC_PI_2: Self = Self { hi: 1.5707963267948966, lo: 6.123233995736766e-17 };
    pub const LN_2: Self = Self { hi: 0.6931471805599453, lo: 2.3190468138462996e-17 };

    pub const fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    pub fn sqrt(self) -> Self {
        if self.hi == 0.0 {
            return Self::zero();
        }
        if self.hi < 0.0 {
            return Self::from_f64(f64::NAN);
        }
        if !self.hi.is_finite() {
            return Self::from_f64(self.hi.sqrt());
        }
        let x = 1.0 / self.hi.sqrt();
        let ax = self.hi * x;
        let ax_dd = Self::from_f64(ax);
        let (s, e) = two_sum(ax, (self - ax_dd * ax_dd).hi * (x * 0.5));
        Self { hi: s, lo: e }
    }

    /// Nearest integer of the leading word (ties away from zero); exact
    /// enough for argument reduction.
    pub fn round(self) -> Self {
        let r = self.hi.round();
        if r == self.hi {
            let (s, e) = quick_two_sum(r, self.lo.round());
            Self { hi: s, lo: e }
        } else {
            Self::from_f64(r)
        }
    }

    pub fn powi(self, n: i32) -> Self {
        let mut base = if n < 0 { Self::one() / self } else { self };
        let mut e = n.unsigned_abs();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    pub fn exp(self) -> Self {
        if !self.is_finite() {
            return Self::from_f64(self.hi.exp());
        }
        if self.hi > 709.0 {
            return Self::from_f64(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Self::zero();
        }
        let n = (self / Self::LN_2).round();
        // |r| ≤ ln2/2, scaled by 2⁻⁹ before the series
        let r = (self - n * Self::LN_2) / Self::from_f64(512.0);
        // s = e^r − 1 keeps full relative precision through the squarings
        let mut term = r;
        let mut s = r;
        for i in 2..40 {
            term = term * r / Self::from_f64(i as f64);
            s += term;
            if term.abs() <= Self::EPSILON * s.abs() {
                break;
            }
        }
        for _ in 0..9 {
            s = s * (Self::from_f64(2.0) + s);
        }
        let y = Self::one() + s;
        let n = n.hi as i32;
        let h1 = n / 2;
        let h2 = n - h1;
        y * Self::from_f64(2f64.powi(h1)) * Self::from_f64(2f64.powi(h2))
    }

    pub fn sin_cos(self) -> (Self, Self) {
        if !self.is_finite() {
            let nan = Self::from_f64(f64::NAN);
            return (nan, nan);
        }
        let q = (self / Self::FRAC_PI_2).round();
        let r = self - q * Self::FRAC_PI_2;
        let r2 = r * r;

        let mut term = r;
        let mut s = r;
        let mut i = 1.0;
        while i < 40.0 {
            term = -term * r2 / Self::from_f64((2.0 * i) * (2.0 * i + 1.0));
            s += term;
            i += 1.0;
            if term.abs() <= Self::EPSILON * s.abs() {
                break;
            }
        }
        let mut term = Self::one();
        let mut c = term;
        let mut i = 1.0;
        while i < 40.0 {
            term = -term * r2 / Self::from_f64((2.0 * i - 1.0) * (2.0 * i));
            c += term;
            i += 1.0;
            if term.abs() <= Self::EPSILON * c.abs() {
                break;
            }
        }
        match (q.hi as i64).rem_euclid(4) {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        Self::from_f64(x)
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi)? {
            Ordering::Equal => self.lo.partial_cmp(&other.lo),
            o => Some(o),
        }
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        Self { hi: -self.hi, lo: -self.lo }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, b: Self) -> Self {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        Self { hi, lo }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, b: Self) -> Self {
        let (p1, p2) = two_prod(self.hi, b.hi);
        let p2 = p2 + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p1, p2);
        Self { hi, lo }
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, b: Self) -> Self {
        let q1 = self.hi / b.hi;
        if !q1.is_finite() {
            return Self::from_f64(q1);
        }
        let r = self - b * Self::from_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b * Self::from_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo } + Self::from_f64(q3)
    }
}

impl Rem for DoubleDouble {
    type Output = Self;
    fn rem(self, b: Self) -> Self {
        let q = self / b;
        let t = Self::from_f64(q.hi.trunc());
        let t = if t.hi == q.hi { t + Self::from_f64(q.lo.trunc()) } else { t };
        self - t * b
    }
}

macro_rules! assign_op {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr for DoubleDouble {
            fn $m(&mut self, rhs: Self) {
                *self = *self $op rhs;
            }
        }
    };
}
assign_op!(AddAssign, add_assign, +);
assign_op!(SubAssign, sub_assign, -);
assign_op!(MulAssign, mul_assign, *);
assign_op!(DivAssign, div_assign, /);
assign_op!(RemAssign, rem_assign, %);

impl Zero for DoubleDouble {
    fn zero() -> Self {
        Self { hi: 0.0, lo: 0.0 }
    }
    fn is_zero(&self) -> bool {
        self.hi == 0.0
    }
}

impl One for DoubleDouble {
    fn one() -> Self {
        Self { hi: 1.0, lo: 0.0 }
    }
}

impl Num for DoubleDouble {
    type FromStrRadixErr = std::num::ParseFloatError;
    fn from_str_radix(s: &str, _radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        s.parse::<f64>().map(Self::from_f64)
    }
}

impl FromPrimitive for DoubleDouble {
    fn from_i64(n: i64) -> Option<Self> {
        let hi = n as f64;
        let lo = (n - hi as i64) as f64;
        Some(Self { hi, lo })
    }
    fn from_u64(n: u64) -> Option<Self> {
        let hi = n as f64;
        let lo = (n as i128 - hi as i128) as f64;
        Some(Self { hi, lo })
    }
    fn from_f64(x: f64) -> Option<Self> {
        Some(Self::from_f64(x))
    }
}

impl ToPrimitive for DoubleDouble {
    fn to_i64(&self) -> Option<i64> {
        (self.hi + self.lo).to_i64()
    }
    fn to_u64(&self) -> Option<u64> {
        (self.hi + self.lo).to_u64()
    }
    fn to_f64(&self) -> Option<f64> {
        Some(self.hi + self.lo)
    }
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lo == 0.0 {
            write!(f, "{:e}", self.hi)
        } else {
            write!(f, "{:e}{:+e}", self.hi, self.lo)
        }
    }
}
