//! Exact rational functions of the single variable `s = x - y`.
//!
//! This is the second coefficient-field backend: every EPD-family operator
//! coefficient is a rational function of `s`, closed under the arithmetic
//! and the partials `∂x f = f'(s)`, `∂y f = -f'(s)`.

use super::jet::{Axis, Jet2};
use super::scalar::FieldScalar;
use super::FieldError;

/// Dense univariate polynomial in `s`, ascending coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyS<S: FieldScalar> {
    coeffs: Vec<S>,
}

impl<S: FieldScalar> PolyS<S> {
    pub fn new(coeffs: Vec<S>) -> Self {
        let mut p = PolyS { coeffs };
        p.strip();
        p
    }

    pub fn zero() -> Self {
        PolyS { coeffs: Vec::new() }
    }

    pub fn constant(c: S) -> Self {
        Self::new(vec![c])
    }

    pub fn monomial(c: S, degree: usize) -> Self {
        let mut coeffs = vec![S::zero(); degree + 1];
        coeffs[degree] = c;
        Self::new(coeffs)
    }

    fn strip(&mut self) {
        while matches!(self.coeffs.last(), Some(c) if c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.is_zero() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn coeff(&self, k: usize) -> S {
        self.coeffs.get(k).cloned().unwrap_or_else(S::zero)
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn leading(&self) -> Option<&S> {
        self.coeffs.last()
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            out.push(self.coeff(k).add(&other.coeff(k)));
        }
        Self::new(out)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.neg()).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![S::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        Self::new(out)
    }

    pub fn scale(&self, factor: &S) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.mul(factor)).collect())
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero();
        }
        let out = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c.mul(&S::from_integer(k as i64)))
            .collect();
        Self::new(out)
    }

    pub fn eval(&self, s: &S) -> S {
        let mut acc = S::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(s).add(c);
        }
        acc
    }

    /// Euclidean division; meaningful for exact scalars.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        assert!(!divisor.is_zero(), "polynomial division by zero");
        let dlead = divisor.leading().unwrap().clone();
        let ddeg = divisor.degree().unwrap();
        let mut rem = self.clone();
        let mut quot = PolyS::zero();
        while let Some(rdeg) = rem.degree() {
            if rdeg < ddeg {
                break;
            }
            let factor = rem
                .leading()
                .unwrap()
                .div(&dlead)
                .expect("nonzero leading coefficient");
            let shift = rdeg - ddeg;
            let term = PolyS::monomial(factor, shift);
            rem = rem.sub(&term.mul(divisor));
            quot = quot.add(&term);
        }
        (quot, rem)
    }

    /// Monic gcd by the Euclidean algorithm (exact scalars).
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.make_monic();
        a
    }

    fn make_monic(&mut self) {
        if let Some(lead) = self.leading().cloned() {
            if lead != S::one() {
                let inv = S::one().div(&lead).expect("nonzero leading");
                *self = self.scale(&inv);
            }
        }
    }

    pub fn max_coeff_magnitude(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|c| c.magnitude())
            .fold(0.0, f64::max)
    }

    /// Drop coefficients tiny relative to the largest one (float backend).
    fn trim(&mut self, rel_tol: f64) {
        let m = self.max_coeff_magnitude();
        if m == 0.0 {
            return;
        }
        for c in &mut self.coeffs {
            if c.magnitude() < rel_tol * m {
                *c = S::zero();
            }
        }
        self.strip();
    }
}

/// Relative magnitude below which float-mode coefficients are treated as zero.
const FLOAT_TRIM_TOL: f64 = 1e-14;

/// Rational function `num/den` in `s = x - y`.
///
/// Exact scalars keep the representation reduced (constant gcd, monic
/// denominator); the float backend trims tiny coefficients instead of
/// attempting a numerically ill-posed gcd.
#[derive(Clone, Debug)]
pub struct RationalS<S: FieldScalar> {
    num: PolyS<S>,
    den: PolyS<S>,
}

impl<S: FieldScalar> RationalS<S> {
    pub fn new(num: PolyS<S>, den: PolyS<S>) -> Result<Self, FieldError> {
        if den.is_zero() {
            return Err(FieldError::ZeroDenominator);
        }
        let mut f = RationalS { num, den };
        f.normalize();
        Ok(f)
    }

    pub fn zero() -> Self {
        RationalS {
            num: PolyS::zero(),
            den: PolyS::constant(S::one()),
        }
    }

    pub fn constant(c: S) -> Self {
        RationalS {
            num: PolyS::constant(c),
            den: PolyS::constant(S::one()),
        }
    }

    pub fn from_poly(num: PolyS<S>) -> Self {
        RationalS {
            num,
            den: PolyS::constant(S::one()),
        }
    }

    /// The coordinate function `s`.
    pub fn s() -> Self {
        RationalS::from_poly(PolyS::monomial(S::one(), 1))
    }

    /// `c / s^k`.
    pub fn over_s_power(c: S, k: usize) -> Self {
        RationalS {
            num: PolyS::constant(c),
            den: PolyS::monomial(S::one(), k),
        }
    }

    pub fn num(&self) -> &PolyS<S> {
        &self.num
    }

    pub fn den(&self) -> &PolyS<S> {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            self.den = PolyS::constant(S::one());
            return;
        }
        if S::EXACT {
            let g = self.num.gcd(&self.den);
            if g.degree().unwrap_or(0) > 0 {
                self.num = self.num.div_rem(&g).0;
                self.den = self.den.div_rem(&g).0;
            }
        } else {
            self.num.trim(FLOAT_TRIM_TOL);
            self.den.trim(FLOAT_TRIM_TOL);
            if self.num.is_zero() {
                self.den = PolyS::constant(S::one());
                return;
            }
        }
        // Monic denominator.
        let lead = self.den.leading().expect("nonzero denominator").clone();
        if lead != S::one() {
            let inv = S::one().div(&lead).expect("nonzero leading coefficient");
            self.num = self.num.scale(&inv);
            self.den = self.den.scale(&inv);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let num = self
            .num
            .mul(&other.den)
            .add(&other.num.mul(&self.den));
        let den = self.den.mul(&other.den);
        let mut f = RationalS { num, den };
        f.normalize();
        f
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        RationalS {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut f = RationalS {
            num: self.num.mul(&other.num),
            den: self.den.mul(&other.den),
        };
        f.normalize();
        f
    }

    pub fn div(&self, other: &Self) -> Result<Self, FieldError> {
        if other.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        let mut f = RationalS {
            num: self.num.mul(&other.den),
            den: self.den.mul(&other.num),
        };
        f.normalize();
        Ok(f)
    }

    pub fn scale(&self, factor: &S) -> Self {
        let mut f = RationalS {
            num: self.num.scale(factor),
            den: self.den.clone(),
        };
        f.normalize();
        f
    }

    /// Derivative with respect to `s` by the quotient rule.
    pub fn derivative_s(&self) -> Self {
        let num = self
            .num
            .derivative()
            .mul(&self.den)
            .sub(&self.num.mul(&self.den.derivative()));
        let den = self.den.mul(&self.den);
        let mut f = RationalS { num, den };
        f.normalize();
        f
    }

    /// `∂x f = f'(s)`, `∂y f = -f'(s)`.
    pub fn partial(&self, axis: Axis) -> Self {
        let d = self.derivative_s();
        match axis {
            Axis::X => d,
            Axis::Y => d.neg(),
        }
    }

    /// `∂ log f` along an axis, as the rational function `±f'/f`.
    pub fn log_partial(&self, axis: Axis) -> Result<Self, FieldError> {
        if self.is_zero() {
            return Err(FieldError::LogOfZero);
        }
        self.partial(axis).div(self)
    }

    /// `∂x∂y log f = (f'^2 - f f'') / f^2` for a function of `s` alone.
    pub fn mixed_log_partial(&self) -> Result<Self, FieldError> {
        if self.is_zero() {
            return Err(FieldError::LogOfZero);
        }
        let d1 = self.derivative_s();
        let d2 = d1.derivative_s();
        let num = d1.mul(&d1).sub(&self.mul(&d2));
        num.div(&self.mul(self))
    }

    pub fn eval(&self, s: &S) -> Option<S> {
        let d = self.den.eval(s);
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval(s).div(&d).unwrap())
    }

    /// Structural equality via cross-multiplication (independent of the
    /// reduced representation).
    pub fn equivalent(&self, other: &Self) -> bool {
        self.num.mul(&other.den) == other.num.mul(&self.den)
    }

    /// Taylor-expand around the base point `(x0, y0)` into a jet of the
    /// requested order. Exact when the scalars are exact.
    pub fn taylor_jet(&self, base: (S, S), order: usize) -> Result<Jet2<S>, FieldError> {
        let s0 = base.0.sub(&base.1);
        if self.den.eval(&s0).is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        // Shift both polynomials to t = s - s0, then series-divide.
        let num_t = shift_poly(&self.num, &s0, order);
        let den_t = shift_poly(&self.den, &s0, order);
        let mut series = vec![S::zero(); order + 1];
        let d0 = den_t[0].clone();
        for k in 0..=order {
            let mut acc = num_t[k].clone();
            for j in 0..k {
                acc = acc.sub(&den_t[k - j].mul(&series[j]));
            }
            series[k] = acc.div(&d0).expect("nonzero constant term");
        }
        // f(x,y) = sum_m g_m (dx - dy)^m with dx = x-x0, dy = y-y0.
        let mut jet = Jet2::zero(base, order);
        for (m, g) in series.iter().enumerate() {
            if g.is_zero() {
                continue;
            }
            for q in 0..=m {
                let p = m - q;
                let sign = if q % 2 == 0 { 1 } else { -1 };
                let b = S::from_integer(sign * binomial(m, q));
                let term = Jet2::from_coeffs(
                    jet.base().clone(),
                    order,
                    [((p, q), g.mul(&b))],
                );
                jet = jet.add(&term)?;
            }
        }
        Ok(jet)
    }
}

impl<S: FieldScalar> PartialEq for RationalS<S> {
    fn eq(&self, other: &Self) -> bool {
        self.equivalent(other)
    }
}

/// Coefficients of `p(t + s0)` up to degree `max_deg`.
fn shift_poly<S: FieldScalar>(p: &PolyS<S>, s0: &S, max_deg: usize) -> Vec<S> {
    let mut out = vec![S::zero(); max_deg + 1];
    for (k, c) in p.coeffs().iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        // (t + s0)^k contributes binom(k,j) s0^{k-j} t^j.
        let mut power = S::one(); // s0^{k-j} built downward from j=k
        let mut pow_table = vec![S::one(); k + 1];
        for i in 1..=k {
            power = power.mul(s0);
            pow_table[i] = power.clone();
        }
        for (j, slot) in out.iter_mut().enumerate().take(k.min(max_deg) + 1) {
            let b = S::from_integer(binomial(k, j));
            *slot = slot.add(&c.mul(&b).mul(&pow_table[k - j]));
        }
    }
    out
}

fn binomial(n: usize, k: usize) -> i64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: i64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as i64 / (i + 1) as i64;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::scalar::{CRat, C64};

    fn q(p: i64, d: i64) -> CRat {
        CRat::from_ratio(p, d)
    }

    #[test]
    fn reduction_keeps_gcd_constant() {
        // (s^2 - 1) / (s - 1) reduces to s + 1.
        let num = PolyS::new(vec![q(-1, 1), q(0, 1), q(1, 1)]);
        let den = PolyS::new(vec![q(-1, 1), q(1, 1)]);
        let f = RationalS::new(num, den).unwrap();
        assert_eq!(f.num().degree(), Some(1));
        assert_eq!(f.den().degree(), Some(0));
        assert_eq!(f.eval(&q(3, 1)).unwrap(), q(4, 1));
    }

    #[test]
    fn partials_of_one_over_s() {
        let f = RationalS::<CRat>::over_s_power(q(1, 1), 1);
        let fx = f.partial(Axis::X);
        let fy = f.partial(Axis::Y);
        // d/dx 1/s = -1/s^2, d/dy 1/s = +1/s^2.
        assert_eq!(fx, RationalS::over_s_power(q(-1, 1), 2));
        assert_eq!(fy, RationalS::over_s_power(q(1, 1), 2));
        assert!(fx.add(&fy).is_zero());
    }

    #[test]
    fn mixed_log_partial_of_c_over_s2() {
        // f = c/s^2 with c != 0: dxdy log f = -2/s^2.
        let f = RationalS::<CRat>::over_s_power(q(5, 3), 2);
        let m = f.mixed_log_partial().unwrap();
        assert_eq!(m, RationalS::over_s_power(q(-2, 1), 2));
        // Constants have vanishing mixed log partial.
        let c = RationalS::<CRat>::constant(q(7, 2));
        assert!(c.mixed_log_partial().unwrap().is_zero());
    }

    #[test]
    fn float_mode_trims_noise() {
        let one = C64::new(1.0, 0.0);
        let eps = C64::new(1e-16, 0.0);
        let num = PolyS::new(vec![one, eps]);
        let den = PolyS::new(vec![one]);
        let f = RationalS::new(num, den).unwrap();
        assert_eq!(f.num().degree(), Some(0));
    }

    #[test]
    fn taylor_jet_matches_direct_jet_arithmetic() {
        // f = 1/s as a jet at (2,1) via Taylor expansion vs jet division.
        let f = RationalS::<C64>::over_s_power(C64::new(1.0, 0.0), 1);
        let base = (C64::new(2.0, 0.0), C64::new(1.0, 0.0));
        let jet = f.taylor_jet(base, 2).unwrap();
        let one = Jet2::constant(base, 2, C64::new(1.0, 0.0));
        let s = Jet2::coordinate_x(base, 2)
            .sub(&Jet2::coordinate_y(base, 2))
            .unwrap();
        let direct = one.div(&s).unwrap();
        assert!(jet.approx_eq(&direct, 1e-14));
    }

    #[test]
    fn taylor_jet_exact_mode() {
        let f = RationalS::<CRat>::over_s_power(q(1, 1), 1);
        let base = (q(2, 1), q(1, 1));
        let jet = f.taylor_jet(base, 2).unwrap();
        assert_eq!(jet.coeff(0, 0), q(1, 1));
        assert_eq!(jet.coeff(1, 0), q(-1, 1));
        assert_eq!(jet.coeff(0, 1), q(1, 1));
        assert_eq!(jet.coeff(1, 1), q(-2, 1));
    }
}
