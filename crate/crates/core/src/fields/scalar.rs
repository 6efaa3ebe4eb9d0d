//! Coefficient scalars: complex floats and exact complex rationals.
//!
//! Every coefficient container in this crate ([`Jet2`](super::Jet2),
//! [`RationalS`](super::RationalS), the polynomial probes of the `epd`
//! module) is generic over a [`FieldScalar`]. Two implementations exist:
//! [`C64`] for double-precision work and [`CRat`] for exact identities.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Double-precision complex scalar.
pub type C64 = Complex64;

/// Field operations shared by the exact and floating-point scalar types.
pub trait FieldScalar: Clone + PartialEq + fmt::Debug {
    /// True for scalar types with exact arithmetic (no rounding).
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_integer(n: i64) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    /// `None` when `other` is zero.
    fn div(&self, other: &Self) -> Option<Self>;
    fn neg(&self) -> Self;
    fn is_zero(&self) -> bool;
    /// Lossy conversion used for cross-backend comparisons and scale checks.
    fn to_c64(&self) -> C64;
    fn magnitude(&self) -> f64 {
        self.to_c64().norm()
    }
}

impl FieldScalar for C64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn one() -> Self {
        C64::new(1.0, 0.0)
    }
    fn from_integer(n: i64) -> Self {
        C64::new(n as f64, 0.0)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Option<Self> {
        if other.norm_sqr() == 0.0 {
            None
        } else {
            Some(self / other)
        }
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn to_c64(&self) -> C64 {
        *self
    }
}

/// Exact complex number with rational real and imaginary parts.
#[derive(Clone, PartialEq, Eq)]
pub struct CRat {
    re: BigRational,
    im: BigRational,
}

impl CRat {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        CRat { re, im }
    }

    /// The rational `p/q` as a real scalar. Panics when `q == 0`.
    pub fn from_ratio(p: i64, q: i64) -> Self {
        assert!(q != 0, "zero denominator");
        CRat {
            re: BigRational::new(BigInt::from(p), BigInt::from(q)),
            im: BigRational::zero(),
        }
    }

    /// Exact embedding of an `f64` (every finite float is a dyadic rational).
    /// Returns `None` for NaN or infinities.
    pub fn from_f64(re: f64, im: f64) -> Option<Self> {
        Some(CRat {
            re: BigRational::from_float(re)?,
            im: BigRational::from_float(im)?,
        })
    }

    pub fn re(&self) -> &BigRational {
        &self.re
    }

    pub fn im(&self) -> &BigRational {
        &self.im
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    /// True when the value is a (real) integer.
    pub fn is_integer(&self) -> bool {
        self.im.is_zero() && self.re.is_integer()
    }

    fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Option<Self> {
        let n = self.norm_sqr();
        if n.is_zero() {
            return None;
        }
        Some(CRat {
            re: &self.re / &n,
            im: -&self.im / &n,
        })
    }
}

impl fmt::Debug for CRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else {
            write!(f, "{} + {}i", self.re, self.im)
        }
    }
}

impl fmt::Display for CRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Add for &CRat {
    type Output = CRat;
    fn add(self, rhs: &CRat) -> CRat {
        CRat {
            re: &self.re + &rhs.re,
            im: &self.im + &rhs.im,
        }
    }
}

impl Sub for &CRat {
    type Output = CRat;
    fn sub(self, rhs: &CRat) -> CRat {
        CRat {
            re: &self.re - &rhs.re,
            im: &self.im - &rhs.im,
        }
    }
}

impl Mul for &CRat {
    type Output = CRat;
    fn mul(self, rhs: &CRat) -> CRat {
        CRat {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

impl Div for &CRat {
    type Output = CRat;
    fn div(self, rhs: &CRat) -> CRat {
        self * &rhs.inv().expect("division by zero CRat")
    }
}

impl Neg for &CRat {
    type Output = CRat;
    fn neg(self) -> CRat {
        CRat {
            re: -&self.re,
            im: -&self.im,
        }
    }
}

impl FieldScalar for CRat {
    const EXACT: bool = true;

    fn zero() -> Self {
        CRat {
            re: BigRational::zero(),
            im: BigRational::zero(),
        }
    }
    fn one() -> Self {
        CRat::from_ratio(1, 1)
    }
    fn from_integer(n: i64) -> Self {
        CRat::from_ratio(n, 1)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Option<Self> {
        other.inv().map(|inv| self * &inv)
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn to_c64(&self) -> C64 {
        C64::new(rational_to_f64(&self.re), rational_to_f64(&self.im))
    }
}

fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Fall back to a scaled division when numerator/denominator each
        // overflow f64 on their own.
        let sign = if r.is_negative() { -1.0 } else { 1.0 };
        sign * f64::INFINITY
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crat_field_ops() {
        let a = CRat::from_ratio(1, 2);
        let b = CRat::new(
            BigRational::new(BigInt::from(1), BigInt::from(3)),
            BigRational::new(BigInt::from(-2), BigInt::from(5)),
        );
        let prod = &a * &b;
        let back = &prod / &b;
        assert_eq!(back, a);
        assert!(FieldScalar::is_zero(&(&a - &a)));
    }

    #[test]
    fn crat_from_f64_is_exact() {
        let x = CRat::from_f64(-0.3, 0.0).unwrap();
        assert_eq!(x.to_c64().re, -0.3);
        assert!(!x.is_integer());
        assert!(CRat::from_f64(3.0, 0.0).unwrap().is_integer());
    }

    #[test]
    fn c64_div_by_zero_is_none() {
        let a = C64::new(1.0, 2.0);
        assert!(FieldScalar::div(&a, &C64::new(0.0, 0.0)).is_none());
    }
}
