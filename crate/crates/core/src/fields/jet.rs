//! Truncated two-variable Taylor jets at a base point.
//!
//! A `Jet2` stores the coefficients `c[p][q] = ∂x^p ∂y^q f(x0,y0) / (p! q!)`
//! for `p + q <= order`. Arithmetic truncates to the smaller order of the
//! operands; each partial derivative lowers the order by exactly one.

use super::scalar::{FieldScalar, C64};
use super::FieldError;

/// Truncated bivariate Taylor expansion of a function at `(x0, y0)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet2<S: FieldScalar> {
    base: (S, S),
    order: usize,
    /// Dense `(order+1) x (order+1)` grid; entries with `p + q > order` are
    /// kept at zero and never read.
    coeffs: Vec<S>,
}

/// Binary operation selector for [`jet_combine`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CombineKind {
    Add,
    Mul,
    Div,
}

impl<S: FieldScalar> Jet2<S> {
    pub fn zero(base: (S, S), order: usize) -> Self {
        let n = order + 1;
        Jet2 {
            base,
            order,
            coeffs: vec![S::zero(); n * n],
        }
    }

    pub fn constant(base: (S, S), order: usize, value: S) -> Self {
        let mut jet = Self::zero(base, order);
        jet.set(0, 0, value);
        jet
    }

    /// The jet of the coordinate function `x`.
    pub fn coordinate_x(base: (S, S), order: usize) -> Self {
        let x0 = base.0.clone();
        let mut jet = Self::zero(base, order);
        jet.set(0, 0, x0);
        if order >= 1 {
            jet.set(1, 0, S::one());
        }
        jet
    }

    /// The jet of the coordinate function `y`.
    pub fn coordinate_y(base: (S, S), order: usize) -> Self {
        let y0 = base.1.clone();
        let mut jet = Self::zero(base, order);
        jet.set(0, 0, y0);
        if order >= 1 {
            jet.set(0, 1, S::one());
        }
        jet
    }

    pub fn from_coeffs(
        base: (S, S),
        order: usize,
        entries: impl IntoIterator<Item = ((usize, usize), S)>,
    ) -> Self {
        let mut jet = Self::zero(base, order);
        for ((p, q), v) in entries {
            assert!(p + q <= order, "coefficient ({p},{q}) beyond order {order}");
            jet.set(p, q, v);
        }
        jet
    }

    pub fn base(&self) -> &(S, S) {
        &self.base
    }

    /// True when every stored coefficient is zero. Such jets represent the
    /// zero function exactly, so arithmetic with them does not truncate the
    /// partner's order and differentiation keeps the order unchanged.
    pub fn is_identically_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeff(&self, p: usize, q: usize) -> S {
        if p + q <= self.order {
            self.coeffs[p * (self.order + 1) + q].clone()
        } else {
            S::zero()
        }
    }

    /// The value of the jet at its base point.
    pub fn value(&self) -> S {
        self.coeff(0, 0)
    }

    fn set(&mut self, p: usize, q: usize, v: S) {
        let n = self.order + 1;
        self.coeffs[p * n + q] = v;
    }

    fn same_base(&self, other: &Self) -> bool {
        self.base == other.base
    }

    /// Drop coefficients above `order` (no-op when already smaller).
    pub fn truncated(&self, order: usize) -> Self {
        if order >= self.order {
            return self.clone();
        }
        let mut out = Self::zero(self.base.clone(), order);
        for p in 0..=order {
            for q in 0..=(order - p) {
                out.set(p, q, self.coeff(p, q));
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self, FieldError> {
        if !self.same_base(other) {
            return Err(FieldError::BaseMismatch);
        }
        if self.is_identically_zero() {
            return Ok(other.clone());
        }
        if other.is_identically_zero() {
            return Ok(self.clone());
        }
        let order = self.order.min(other.order);
        let mut out = Self::zero(self.base.clone(), order);
        for p in 0..=order {
            for q in 0..=(order - p) {
                out.set(p, q, self.coeff(p, q).add(&other.coeff(p, q)));
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, FieldError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let mut out = Self::zero(self.base.clone(), self.order);
        for p in 0..=self.order {
            for q in 0..=(self.order - p) {
                out.set(p, q, self.coeff(p, q).neg());
            }
        }
        out
    }

    pub fn scale(&self, factor: &S) -> Self {
        let mut out = Self::zero(self.base.clone(), self.order);
        for p in 0..=self.order {
            for q in 0..=(self.order - p) {
                out.set(p, q, self.coeff(p, q).mul(factor));
            }
        }
        out
    }

    /// Truncated Cauchy product.
    pub fn mul(&self, other: &Self) -> Result<Self, FieldError> {
        if !self.same_base(other) {
            return Err(FieldError::BaseMismatch);
        }
        if self.is_identically_zero() || other.is_identically_zero() {
            return Ok(Self::zero(
                self.base.clone(),
                self.order.max(other.order),
            ));
        }
        let order = self.order.min(other.order);
        let mut out = Self::zero(self.base.clone(), order);
        for p in 0..=order {
            for q in 0..=(order - p) {
                let mut acc = S::zero();
                for r in 0..=p {
                    for s in 0..=q {
                        let a = self.coeff(r, s);
                        if a.is_zero() {
                            continue;
                        }
                        acc = acc.add(&a.mul(&other.coeff(p - r, q - s)));
                    }
                }
                out.set(p, q, acc);
            }
        }
        Ok(out)
    }

    /// Truncated quotient; requires `other` nonzero at the base point.
    pub fn div(&self, other: &Self) -> Result<Self, FieldError> {
        if !self.same_base(other) {
            return Err(FieldError::BaseMismatch);
        }
        let b0 = other.coeff(0, 0);
        if b0.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        if self.is_identically_zero() {
            return Ok(Self::zero(
                self.base.clone(),
                self.order.max(other.order),
            ));
        }
        let order = self.order.min(other.order);
        let mut out = Self::zero(self.base.clone(), order);
        // Solve q * other = self degree by degree.
        for d in 0..=order {
            for p in (0..=d).rev() {
                let q = d - p;
                let mut acc = self.coeff(p, q);
                for r in 0..=p {
                    for s in 0..=q {
                        if r == 0 && s == 0 {
                            continue;
                        }
                        let b = other.coeff(r, s);
                        if b.is_zero() {
                            continue;
                        }
                        acc = acc.sub(&b.mul(&out.coeff(p - r, q - s)));
                    }
                }
                let v = acc.div(&b0).ok_or(FieldError::DivisionByZero)?;
                out.set(p, q, v);
            }
        }
        Ok(out)
    }

    /// Partial derivative along one axis; order drops by one (except for
    /// identically-zero jets, whose derivative is exactly zero at the same
    /// order).
    pub fn partial(&self, axis: Axis) -> Result<Self, FieldError> {
        if self.is_identically_zero() {
            return Ok(self.clone());
        }
        if self.order == 0 {
            return Err(FieldError::InsufficientOrder {
                order: 0,
                op: "partial derivative",
            });
        }
        let order = self.order - 1;
        let mut out = Self::zero(self.base.clone(), order);
        for p in 0..=order {
            for q in 0..=(order - p) {
                let v = match axis {
                    Axis::X => {
                        let f = S::from_integer((p + 1) as i64);
                        self.coeff(p + 1, q).mul(&f)
                    }
                    Axis::Y => {
                        let f = S::from_integer((q + 1) as i64);
                        self.coeff(p, q + 1).mul(&f)
                    }
                };
                out.set(p, q, v);
            }
        }
        Ok(out)
    }

    /// Antiderivative in `x` vanishing on the line `x = x0`; order rises by one.
    pub fn antiderivative_x(&self) -> Self {
        let order = self.order + 1;
        let mut out = Self::zero(self.base.clone(), order);
        for p in 0..=self.order {
            for q in 0..=(self.order - p) {
                let den = S::from_integer((p + 1) as i64);
                let v = self
                    .coeff(p, q)
                    .div(&den)
                    .expect("nonzero integer denominator");
                out.set(p + 1, q, v);
            }
        }
        out
    }

    /// Largest coefficient magnitude, for relative comparisons.
    pub fn max_coeff_magnitude(&self) -> f64 {
        let mut m: f64 = 0.0;
        for p in 0..=self.order {
            for q in 0..=(self.order - p) {
                m = m.max(self.coeff(p, q).magnitude());
            }
        }
        m
    }

    /// Coefficient-wise agreement up to `tol` relative to the larger jet.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        if !self.same_base(other) {
            return false;
        }
        let order = self.order.min(other.order);
        let scale = self
            .max_coeff_magnitude()
            .max(other.max_coeff_magnitude())
            .max(f64::MIN_POSITIVE);
        for p in 0..=order {
            for q in 0..=(order - p) {
                let a = self.coeff(p, q).to_c64();
                let b = other.coeff(p, q).to_c64();
                if (a - b).norm() > tol * scale {
                    return false;
                }
            }
        }
        true
    }
}

/// Differentiation axis for the two jet variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

impl Jet2<C64> {
    /// Principal-branch logarithm of the jet. The constant term takes the
    /// principal `log` of the base value; all derivative coefficients are
    /// branch-independent.
    pub fn log(&self) -> Result<Self, FieldError> {
        let a0 = self.coeff(0, 0);
        if a0.is_zero() {
            return Err(FieldError::LogOfZero);
        }
        // log a = log a0 + log(1 + g), g = a/a0 - 1.
        let order = self.order;
        let one = Jet2::constant(self.base.clone(), order, C64::new(1.0, 0.0));
        let g = self.scale(&(C64::new(1.0, 0.0) / a0)).sub(&one)?;
        let mut acc = Jet2::constant(self.base.clone(), order, a0.ln());
        let mut power = one;
        for m in 1..=order {
            power = power.mul(&g)?;
            let coeff = if m % 2 == 1 { 1.0 } else { -1.0 } / m as f64;
            acc = acc.add(&power.scale(&C64::new(coeff, 0.0)))?;
        }
        Ok(acc)
    }
}

/// Combine two jets sharing a base point.
pub fn jet_combine<S: FieldScalar>(
    a: &Jet2<S>,
    b: &Jet2<S>,
    kind: CombineKind,
) -> Result<Jet2<S>, FieldError> {
    match kind {
        CombineKind::Add => a.add(b),
        CombineKind::Mul => a.mul(b),
        CombineKind::Div => a.div(b),
    }
}

/// Truncated series of `log a` (principal branch at the base value).
pub fn jet_log(a: &Jet2<C64>) -> Result<Jet2<C64>, FieldError> {
    a.log()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::scalar::CRat;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn base23() -> (C64, C64) {
        (c(2.0), c(3.0))
    }

    #[test]
    fn mul_identity_keeps_operand() {
        let one = Jet2::constant(base23(), 3, c(1.0));
        let b = Jet2::from_coeffs(
            base23(),
            3,
            [((0, 0), c(2.5)), ((1, 0), c(-1.0)), ((1, 1), c(0.75))],
        );
        assert_eq!(jet_combine(&one, &b, CombineKind::Mul).unwrap(), b);
    }

    #[test]
    fn product_rule_for_xy() {
        let x = Jet2::coordinate_x(base23(), 2);
        let y = Jet2::coordinate_y(base23(), 2);
        let xy = x.mul(&y).unwrap();
        assert_eq!(xy.coeff(0, 0), c(6.0));
        assert_eq!(xy.coeff(1, 0), c(3.0));
        assert_eq!(xy.coeff(0, 1), c(2.0));
        assert_eq!(xy.coeff(1, 1), c(1.0));
    }

    #[test]
    fn reciprocal_of_x_minus_y() {
        // 1/(x-y) at (2,1): value 1, dx -1, dy 1, dxdy -2.
        let base = (c(2.0), c(1.0));
        let one = Jet2::constant(base, 2, c(1.0));
        let s = Jet2::coordinate_x(base, 2)
            .sub(&Jet2::coordinate_y(base, 2))
            .unwrap();
        let inv = jet_combine(&one, &s, CombineKind::Div).unwrap();
        assert_eq!(inv.coeff(0, 0), c(1.0));
        assert_eq!(inv.coeff(1, 0), c(-1.0));
        assert_eq!(inv.coeff(0, 1), c(1.0));
        // c[1][1] = mixed second derivative / (1! 1!) = -2.
        assert_eq!(inv.coeff(1, 1), c(-2.0));
    }

    #[test]
    fn div_by_jet_with_zero_value_fails() {
        let base = (c(1.0), c(1.0));
        let one = Jet2::constant(base, 2, c(1.0));
        let s = Jet2::coordinate_x(base, 2)
            .sub(&Jet2::coordinate_y(base, 2))
            .unwrap();
        assert!(matches!(
            jet_combine(&one, &s, CombineKind::Div),
            Err(FieldError::DivisionByZero)
        ));
    }

    #[test]
    fn base_mismatch_rejected() {
        let a = Jet2::constant(base23(), 2, c(1.0));
        let b = Jet2::constant((c(0.0), c(0.0)), 2, c(1.0));
        assert!(matches!(a.add(&b), Err(FieldError::BaseMismatch)));
    }

    #[test]
    fn log_of_constant_e() {
        let e = Jet2::constant(base23(), 3, c(std::f64::consts::E));
        let l = jet_log(&e).unwrap();
        assert!((l.coeff(0, 0) - c(1.0)).norm() < 1e-15);
        assert!(l.coeff(1, 0).norm() < 1e-15);
    }

    #[test]
    fn log_of_square_of_x_minus_y() {
        // log (x-y)^2 at (3,1): dx = 2/s = 1, dy = -1, dxdy coeff = 1/2.
        let base = (c(3.0), c(1.0));
        let s = Jet2::coordinate_x(base, 4)
            .sub(&Jet2::coordinate_y(base, 4))
            .unwrap();
        let s2 = s.mul(&s).unwrap();
        let l = jet_log(&s2).unwrap();
        assert!((l.coeff(1, 0) - c(1.0)).norm() < 1e-14);
        assert!((l.coeff(0, 1) - c(-1.0)).norm() < 1e-14);
        assert!((l.coeff(1, 1) - c(0.5)).norm() < 1e-14);
    }

    #[test]
    fn exact_div_mul_round_trip() {
        // (a/b)*b == a exactly with rational coefficients.
        let base = (CRat::from_ratio(2, 1), CRat::from_ratio(1, 3));
        let mk = |entries: &[((usize, usize), (i64, i64))]| {
            Jet2::from_coeffs(
                base.clone(),
                3,
                entries
                    .iter()
                    .map(|&((p, q), (n, d))| ((p, q), CRat::from_ratio(n, d))),
            )
        };
        let a = mk(&[((0, 0), (3, 7)), ((1, 0), (-2, 5)), ((2, 1), (1, 9))]);
        let b = mk(&[((0, 0), (5, 2)), ((0, 1), (4, 3)), ((1, 1), (-1, 6))]);
        let q = a.div(&b).unwrap();
        assert_eq!(q.mul(&b).unwrap(), a);
    }

    #[test]
    fn partial_drops_order() {
        let x = Jet2::coordinate_x(base23(), 3);
        let dx = x.partial(Axis::X).unwrap();
        assert_eq!(dx.order(), 2);
        assert_eq!(dx.coeff(0, 0), c(1.0));
        let d0 = Jet2::constant(base23(), 0, c(1.0));
        assert!(matches!(
            d0.partial(Axis::X),
            Err(FieldError::InsufficientOrder { .. })
        ));
    }

    #[test]
    fn partial_of_x_squared_y() {
        // d/dx (x^2 y) = 2xy, value 2 at (1,1).
        let base = (c(1.0), c(1.0));
        let x = Jet2::coordinate_x(base, 3);
        let y = Jet2::coordinate_y(base, 3);
        let f = x.mul(&x).unwrap().mul(&y).unwrap();
        let fx = f.partial(Axis::X).unwrap();
        assert!((fx.value() - c(2.0)).norm() < 1e-15);
    }

    #[test]
    fn antiderivative_then_partial_is_identity() {
        let base = (c(0.5), c(-0.25));
        let f = Jet2::from_coeffs(
            base,
            2,
            [((0, 0), c(1.5)), ((1, 0), c(2.0)), ((0, 2), c(-3.0))],
        );
        let g = f.antiderivative_x().partial(Axis::X).unwrap();
        assert!(g.approx_eq(&f, 1e-15));
    }
}
