//! Coefficient-field arithmetic for the operator machinery.
//!
//! Two interchangeable representations of the coefficient functions
//! `a(x,y)`, `b(x,y)`, `c(x,y)` of a hyperbolic operator:
//!
//! * [`RationalS`] — exact rational functions of `s = x - y`, closed under
//!   the arithmetic, log-derivatives, and the partials `∂x`, `∂y`;
//! * [`Jet2`] — truncated two-variable Taylor jets at a base point, for
//!   coefficients that are not functions of `s` alone.
//!
//! Both are generic over the scalar ([`CRat`] exact, [`C64`] float) and
//! implement [`CoeffField`], the interface the `laplace` module needs.

mod jet;
mod rational;
pub mod scalar;

pub use jet::{jet_combine, jet_log, Axis, CombineKind, Jet2};
pub use rational::{PolyS, RationalS};
pub use scalar::{CRat, FieldScalar, C64};

use thiserror::Error;

/// Errors from coefficient-field arithmetic.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("jets have different base points")]
    BaseMismatch,
    #[error("division by a field element vanishing at the base point")]
    DivisionByZero,
    #[error("logarithm of a field element vanishing at the base point")]
    LogOfZero,
    #[error("jet order {order} is too small for {op}")]
    InsufficientOrder { order: usize, op: &'static str },
    #[error("zero denominator polynomial")]
    ZeroDenominator,
}

/// The operations the Laplace-transformation machinery requires of a
/// coefficient field. `partial` lowers a jet's order by one;
/// `mixed_log_partial` consumes two orders.
pub trait CoeffField: Clone + std::fmt::Debug {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn add(&self, other: &Self) -> Result<Self, FieldError>;
    fn sub(&self, other: &Self) -> Result<Self, FieldError>;
    fn mul(&self, other: &Self) -> Result<Self, FieldError>;
    fn div(&self, other: &Self) -> Result<Self, FieldError>;
    fn neg(&self) -> Self;
    fn partial(&self, axis: Axis) -> Result<Self, FieldError>;
    /// `∂ log f` along an axis.
    fn log_partial(&self, axis: Axis) -> Result<Self, FieldError>;
    /// `∂x ∂y log f`.
    fn mixed_log_partial(&self) -> Result<Self, FieldError>;
    /// Vanishing test appropriate to the backend: exact zero for rational
    /// representations, small value at the base point for jets.
    fn is_vanishing(&self) -> bool;
    /// Agreement test: exact equality in exact mode, relative tolerance
    /// otherwise.
    fn agrees_with(&self, other: &Self, tol: f64) -> bool;
    /// Representative value for scale estimates (value at the jet base
    /// point, or at a fixed probe `s` for rational functions).
    fn sample_value(&self) -> C64;
    /// `∂y` of the canonical antiderivative in `x` of `self`: for jets the
    /// antiderivative vanishing on `x = x0`, for functions of `s = x - y`
    /// the `s`-antiderivative (whose `y`-partial is `-self`).
    fn x_antiderivative_partial_y(&self) -> Result<Self, FieldError>;
    /// Remaining truncation order for jets, `None` for exact closed-form
    /// representations.
    fn order_budget(&self) -> Option<usize>;
}

/// Partial derivative dispatcher mirroring the per-representation rules.
pub fn field_partial<F: CoeffField>(f: &F, axis: Axis) -> Result<F, FieldError> {
    f.partial(axis)
}

/// `∂x∂y log f` dispatcher.
pub fn mixed_log_partial<F: CoeffField>(f: &F) -> Result<F, FieldError> {
    f.mixed_log_partial()
}

/// Threshold for declaring a jet-backed invariant "vanishing" at the base
/// point, relative to the jet's coefficient scale.
const JET_VANISH_TOL: f64 = 1e-13;

impl CoeffField for Jet2<C64> {
    fn zero_like(&self) -> Self {
        Jet2::zero(self.base().clone(), self.order())
    }
    fn one_like(&self) -> Self {
        Jet2::constant(self.base().clone(), self.order(), C64::new(1.0, 0.0))
    }
    fn add(&self, other: &Self) -> Result<Self, FieldError> {
        Jet2::add(self, other)
    }
    fn sub(&self, other: &Self) -> Result<Self, FieldError> {
        Jet2::sub(self, other)
    }
    fn mul(&self, other: &Self) -> Result<Self, FieldError> {
        Jet2::mul(self, other)
    }
    fn div(&self, other: &Self) -> Result<Self, FieldError> {
        Jet2::div(self, other)
    }
    fn neg(&self) -> Self {
        Jet2::neg(self)
    }
    fn partial(&self, axis: Axis) -> Result<Self, FieldError> {
        Jet2::partial(self, axis)
    }
    fn log_partial(&self, axis: Axis) -> Result<Self, FieldError> {
        // Differentiate the truncated log series; this is the path the
        // Laplace recurrences exercise.
        self.log()?.partial(axis)
    }
    fn mixed_log_partial(&self) -> Result<Self, FieldError> {
        if self.order() < 2 {
            return Err(FieldError::InsufficientOrder {
                order: self.order(),
                op: "mixed log partial",
            });
        }
        self.log()?.partial(Axis::X)?.partial(Axis::Y)
    }
    fn is_vanishing(&self) -> bool {
        let scale = self.max_coeff_magnitude().max(f64::MIN_POSITIVE);
        self.value().norm() < JET_VANISH_TOL * scale
    }
    fn agrees_with(&self, other: &Self, tol: f64) -> bool {
        self.approx_eq(other, tol)
    }
    fn sample_value(&self) -> C64 {
        self.value()
    }
    fn x_antiderivative_partial_y(&self) -> Result<Self, FieldError> {
        self.antiderivative_x().partial(Axis::Y)
    }
    fn order_budget(&self) -> Option<usize> {
        Some(self.order())
    }
}

impl CoeffField for Jet2<CRat> {
    fn zero_like(&self) -> Self {
        Jet2::zero(self.base().clone(), self.order())
    }
    fn one_like(&self) -> Self {
        Jet2::constant(self.base().clone(), self.order(), CRat::from_ratio(1, 1))
    }
    fn add(&self, other: &Self) -> Result<Self, FieldError> {
        Jet2::add(self, other)
    }
    fn sub(&self, other: &Self) -> Result<Self, FieldError> {
        Jet2::sub(self, other)
    }
    fn mul(&self, other: &Self) -> Result<Self, FieldError> {
        Jet2::mul(self, other)
    }
    fn div(&self, other: &Self) -> Result<Self, FieldError> {
        Jet2::div(self, other)
    }
    fn neg(&self) -> Self {
        Jet2::neg(self)
    }
    fn partial(&self, axis: Axis) -> Result<Self, FieldError> {
        Jet2::partial(self, axis)
    }
    fn log_partial(&self, axis: Axis) -> Result<Self, FieldError> {
        // No transcendental log in exact mode: ∂ log f = (∂f)/f.
        self.partial(axis)?.div(self)
    }
    fn mixed_log_partial(&self) -> Result<Self, FieldError> {
        if self.order() < 2 {
            return Err(FieldError::InsufficientOrder {
                order: self.order(),
                op: "mixed log partial",
            });
        }
        // (f f_xy - f_x f_y) / f^2, exact.
        let fx = self.partial(Axis::X)?;
        let fy = self.partial(Axis::Y)?;
        let fxy = fx.partial(Axis::Y)?;
        let num = Jet2::mul(self, &fxy)?.sub(&Jet2::mul(&fx, &fy)?)?;
        num.div(&Jet2::mul(self, self)?)
    }
    fn is_vanishing(&self) -> bool {
        self.value().is_zero()
    }
    fn agrees_with(&self, other: &Self, _tol: f64) -> bool {
        let order = self.order().min(other.order());
        self.truncated(order) == other.truncated(order)
    }
    fn sample_value(&self) -> C64 {
        self.value().to_c64()
    }
    fn x_antiderivative_partial_y(&self) -> Result<Self, FieldError> {
        self.antiderivative_x().partial(Axis::Y)
    }
    fn order_budget(&self) -> Option<usize> {
        Some(self.order())
    }
}

/// Probe abscissa used for rational-function sample values and scales.
const RATIONAL_SAMPLE_S: f64 = 1.5;

macro_rules! impl_coeff_field_for_rational {
    ($scalar:ty) => {
        impl CoeffField for RationalS<$scalar> {
            fn zero_like(&self) -> Self {
                RationalS::zero()
            }
            fn one_like(&self) -> Self {
                RationalS::constant(<$scalar as FieldScalar>::one())
            }
            fn add(&self, other: &Self) -> Result<Self, FieldError> {
                Ok(RationalS::add(self, other))
            }
            fn sub(&self, other: &Self) -> Result<Self, FieldError> {
                Ok(RationalS::sub(self, other))
            }
            fn mul(&self, other: &Self) -> Result<Self, FieldError> {
                Ok(RationalS::mul(self, other))
            }
            fn div(&self, other: &Self) -> Result<Self, FieldError> {
                RationalS::div(self, other)
            }
            fn neg(&self) -> Self {
                RationalS::neg(self)
            }
            fn partial(&self, axis: Axis) -> Result<Self, FieldError> {
                Ok(RationalS::partial(self, axis))
            }
            fn log_partial(&self, axis: Axis) -> Result<Self, FieldError> {
                RationalS::log_partial(self, axis)
            }
            fn mixed_log_partial(&self) -> Result<Self, FieldError> {
                RationalS::mixed_log_partial(self)
            }
            fn is_vanishing(&self) -> bool {
                self.is_zero()
            }
            fn agrees_with(&self, other: &Self, tol: f64) -> bool {
                if <$scalar as FieldScalar>::EXACT {
                    self.equivalent(other)
                } else {
                    let d = self.sub(other);
                    let scale = self
                        .num()
                        .max_coeff_magnitude()
                        .max(other.num().max_coeff_magnitude())
                        .max(f64::MIN_POSITIVE);
                    d.num().max_coeff_magnitude() <= tol * scale * 10.0
                }
            }
            fn sample_value(&self) -> C64 {
                let num: C64 = self
                    .num()
                    .coeffs()
                    .iter()
                    .rev()
                    .fold(C64::new(0.0, 0.0), |acc, c| {
                        acc * C64::new(RATIONAL_SAMPLE_S, 0.0) + c.to_c64()
                    });
                let den: C64 = self
                    .den()
                    .coeffs()
                    .iter()
                    .rev()
                    .fold(C64::new(0.0, 0.0), |acc, c| {
                        acc * C64::new(RATIONAL_SAMPLE_S, 0.0) + c.to_c64()
                    });
                num / den
            }
            fn x_antiderivative_partial_y(&self) -> Result<Self, FieldError> {
                // For g = g(s): ∂y of the s-antiderivative is -g.
                Ok(RationalS::neg(self))
            }
            fn order_budget(&self) -> Option<usize> {
                None
            }
        }
    };
}

impl_coeff_field_for_rational!(C64);
impl_coeff_field_for_rational!(CRat);

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn jet_log_partial_matches_quotient_route() {
        // ∂x log f computed via the log series equals f_x / f.
        let base = (c(1.7), c(0.4));
        let f = Jet2::from_coeffs(
            base,
            5,
            [
                ((0, 0), c(2.0)),
                ((1, 0), c(-0.3)),
                ((0, 1), c(0.8)),
                ((2, 1), c(0.1)),
            ],
        );
        let via_log = CoeffField::log_partial(&f, Axis::X).unwrap();
        let via_div = f.partial(Axis::X).unwrap().div(&f).unwrap();
        assert!(via_log.approx_eq(&via_div, 1e-13));
    }

    #[test]
    fn jet_mixed_log_partial_of_exp_xy() {
        // f = exp(xy) at (0,0): log f = xy, so dxdy log f = 1.
        let base = (c(0.0), c(0.0));
        let order = 6;
        // coefficients of exp(xy): c[m][m] = 1/m!.
        let mut fact = 1.0;
        let mut entries = Vec::new();
        for m in 0..=order / 2 {
            if m > 0 {
                fact *= m as f64;
            }
            entries.push(((m, m), c(1.0 / fact)));
        }
        let f = Jet2::from_coeffs(base, order, entries);
        let m = CoeffField::mixed_log_partial(&f).unwrap();
        assert!((m.value() - c(1.0)).norm() < 1e-13);
    }

    #[test]
    fn rational_mixed_log_partial_is_exact() {
        let f = RationalS::<CRat>::over_s_power(CRat::from_ratio(3, 7), 2);
        let got = CoeffField::mixed_log_partial(&f).unwrap();
        let want = RationalS::over_s_power(CRat::from_ratio(-2, 1), 2);
        assert!(got.equivalent(&want));
    }

    #[test]
    fn vanishing_detection_per_backend() {
        let z = RationalS::<CRat>::zero();
        assert!(CoeffField::is_vanishing(&z));
        let base = (c(1.0), c(0.0));
        let tiny = Jet2::from_coeffs(base, 2, [((0, 0), c(1e-16)), ((1, 0), c(1.0))]);
        assert!(CoeffField::is_vanishing(&tiny));
    }
}
