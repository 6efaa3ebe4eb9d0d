//! Hyperbolic operators `∂x∂y + a∂x + b∂y + c`, their invariants, gauge
//! conjugation, the Laplace up/down transformations, and normal-form
//! sequences together with the Toda chain they generate.
//!
//! The coefficient fields are generic: exact rational functions of
//! `s = x - y` for the EPD family, jets for arbitrary coefficients.

use crate::fields::{Axis, CoeffField, FieldError, FieldScalar, RationalS};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LaplaceError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("invariant {which} vanishes at step n = {n}")]
    VanishingInvariant { which: char, n: i64 },
    #[error("operator is not in normal form (b does not vanish)")]
    NotNormalForm,
    #[error("jet order {have} cannot support {steps} Laplace steps (need at least {need})")]
    InsufficientJetOrder {
        have: usize,
        steps: usize,
        need: usize,
    },
    #[error("sequence recurrence check failed between n = {n} and n = {next}", next = n + 1)]
    RecurrenceCheck { n: i64 },
    #[error("index range [{n_min}, {n_max}] must contain 0")]
    BadRange { n_min: i64, n_max: i64 },
    #[error("operator coefficients disagree about their representation")]
    MixedRepresentation,
}

/// The hyperbolic operator `∂x∂y + a ∂x + b ∂y + c`.
#[derive(Clone, Debug)]
pub struct HyperbolicOperator<C: CoeffField> {
    pub a: C,
    pub b: C,
    pub c: C,
}

/// The pair `h = a_x + ab - c`, `k = b_y + ab - c`.
#[derive(Clone, Debug)]
pub struct InvariantPair<C: CoeffField> {
    pub h: C,
    pub k: C,
}

/// A gauge `M ↦ f^{-1} M f` represented by the derivatives of `F = log f`.
/// Only `F_x`, `F_y`, `F_xy` enter the conjugation formulas, so gauges whose
/// potential is not itself in the coefficient field (such as `log s`) stay
/// representable.
#[derive(Clone, Debug)]
pub struct Gauge<C: CoeffField> {
    pub fx: C,
    pub fy: C,
    pub fxy: C,
}

impl<C: CoeffField> Gauge<C> {
    /// Gauge from an explicit potential `F` in the coefficient field.
    pub fn from_potential(f: &C) -> Result<Self, LaplaceError> {
        let fx = f.partial(Axis::X)?;
        let fy = f.partial(Axis::Y)?;
        let fxy = fx.partial(Axis::Y)?;
        Ok(Gauge { fx, fy, fxy })
    }

    /// Gauge with potential `F = log f` for an invertible field element `f`.
    pub fn log_of(f: &C) -> Result<Self, LaplaceError> {
        let fx = f.log_partial(Axis::X)?;
        let fy = f.log_partial(Axis::Y)?;
        let fxy = fx.partial(Axis::Y)?;
        Ok(Gauge { fx, fy, fxy })
    }

    pub fn identity_like(f: &C) -> Self {
        Gauge {
            fx: f.zero_like(),
            fy: f.zero_like(),
            fxy: f.zero_like(),
        }
    }
}

impl<C: CoeffField> HyperbolicOperator<C> {
    pub fn new(a: C, b: C, c: C) -> Self {
        HyperbolicOperator { a, b, c }
    }

    /// `∂x∂y` with coefficients shaped like `template`.
    pub fn bare(template: &C) -> Self {
        HyperbolicOperator {
            a: template.zero_like(),
            b: template.zero_like(),
            c: template.zero_like(),
        }
    }

    pub fn is_normal_form(&self) -> bool {
        self.b.is_vanishing()
    }

    /// The invariants `h = a_x + ab - c`, `k = b_y + ab - c`.
    pub fn invariants(&self) -> Result<InvariantPair<C>, LaplaceError> {
        let ab = self.a.mul(&self.b)?;
        let h = self.a.partial(Axis::X)?.add(&ab)?.sub(&self.c)?;
        let k = self.b.partial(Axis::Y)?.add(&ab)?.sub(&self.c)?;
        Ok(InvariantPair { h, k })
    }

    /// Conjugation `f^{-1} M f`: `a' = a + F_y`, `b' = b + F_x`,
    /// `c' = c + aF_x + bF_y + F_xy + F_x F_y`. Invariants are preserved.
    pub fn gauge_conjugate(&self, gauge: &Gauge<C>) -> Result<Self, LaplaceError> {
        let a = self.a.add(&gauge.fy)?;
        let b = self.b.add(&gauge.fx)?;
        let c = self
            .c
            .add(&self.a.mul(&gauge.fx)?)?
            .add(&self.b.mul(&gauge.fy)?)?
            .add(&gauge.fxy)?
            .add(&gauge.fx.mul(&gauge.fy)?)?;
        Ok(HyperbolicOperator { a, b, c })
    }

    /// Laplace up-transformation (requires `h != 0`):
    /// `a_+ = a - ∂y log h`, `b_+ = b`, `c_+ = c - a_x + b_y - b ∂y log h`.
    pub fn laplace_up(&self) -> Result<Self, LaplaceError> {
        let inv = self.invariants()?;
        if inv.h.is_vanishing() {
            return Err(LaplaceError::VanishingInvariant { which: 'h', n: 0 });
        }
        let dylogh = inv.h.log_partial(Axis::Y)?;
        let a = self.a.sub(&dylogh)?;
        let b = self.b.clone();
        let c = self
            .c
            .sub(&self.a.partial(Axis::X)?)?
            .add(&self.b.partial(Axis::Y)?)?
            .sub(&self.b.mul(&dylogh)?)?;
        Ok(HyperbolicOperator { a, b, c })
    }

    /// Laplace down-transformation (requires `k != 0`):
    /// `a_- = a`, `b_- = b - ∂x log k`, `c_- = c + a_x - b_y - a ∂x log k`.
    pub fn laplace_down(&self) -> Result<Self, LaplaceError> {
        let inv = self.invariants()?;
        if inv.k.is_vanishing() {
            return Err(LaplaceError::VanishingInvariant { which: 'k', n: 0 });
        }
        let dxlogk = inv.k.log_partial(Axis::X)?;
        let a = self.a.clone();
        let b = self.b.sub(&dxlogk)?;
        let c = self
            .c
            .add(&self.a.partial(Axis::X)?)?
            .sub(&self.b.partial(Axis::Y)?)?
            .sub(&self.a.mul(&dxlogk)?)?;
        Ok(HyperbolicOperator { a, b, c })
    }

    /// Eliminate the `b ∂y` term by conjugating with `f = exp F`,
    /// `F_x = -b` (canonical antiderivative). The result satisfies
    /// `b' = 0`, `a'_x = h - k`, `c' = -k`.
    pub fn to_normal_form(&self) -> Result<(Self, Gauge<C>), LaplaceError> {
        if self.is_normal_form() {
            return Ok((self.clone(), Gauge::identity_like(&self.a)));
        }
        let fx = self.b.neg();
        let fy = self.b.neg().x_antiderivative_partial_y()?;
        let fxy = fx.partial(Axis::Y)?;
        let gauge = Gauge { fx, fy, fxy };
        let normal = self.gauge_conjugate(&gauge)?;
        Ok((normal, gauge))
    }

    /// Coefficient-wise agreement at the backend's notion of tolerance.
    pub fn agrees_with(&self, other: &Self, tol: f64) -> bool {
        self.a.agrees_with(&other.a, tol)
            && self.b.agrees_with(&other.b, tol)
            && self.c.agrees_with(&other.c, tol)
    }
}

/// The Euler-Poisson-Darboux operator
/// `∂x∂y + β/(x-y) ∂x + α/(y-x) ∂y`.
pub fn epd_seed_operator<S: FieldScalar>(
    alpha: &S,
    beta: &S,
) -> HyperbolicOperator<RationalS<S>>
where
    RationalS<S>: CoeffField,
{
    HyperbolicOperator {
        a: RationalS::over_s_power(beta.clone(), 1),
        b: RationalS::over_s_power(alpha.neg(), 1),
        c: RationalS::zero(),
    }
}

/// How an entry of an [`OperatorSequence`] was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Origin,
    UpStep,
    DownStep,
    Gauge,
}

/// A contiguous family `n ↦ M_n` of normal-form operators obeying the
/// Laplace recurrences `a_{n+1} = a_n - ∂y log h_n`, `c_{n+1} = c_n - ∂x a_n`.
#[derive(Clone, Debug)]
pub struct OperatorSequence<C: CoeffField> {
    n_min: i64,
    entries: Vec<(HyperbolicOperator<C>, Provenance)>,
}

/// Relative tolerance for the construction-time recurrence checks on the
/// jet backend (exact backends compare exactly).
const SEQUENCE_CHECK_TOL: f64 = 1e-9;

impl<C: CoeffField> OperatorSequence<C> {
    pub fn n_min(&self) -> i64 {
        self.n_min
    }

    pub fn n_max(&self) -> i64 {
        self.n_min + self.entries.len() as i64 - 1
    }

    pub fn get(&self, n: i64) -> Option<&HyperbolicOperator<C>> {
        let idx = n.checked_sub(self.n_min)?;
        if idx < 0 {
            return None;
        }
        self.entries.get(idx as usize).map(|(op, _)| op)
    }

    pub fn provenance(&self, n: i64) -> Option<Provenance> {
        let idx = n.checked_sub(self.n_min)?;
        self.entries.get(idx as usize).map(|(_, p)| *p)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &HyperbolicOperator<C>)> {
        self.entries
            .iter()
            .enumerate()
            .map(move |(i, (op, _))| (self.n_min + i as i64, op))
    }

    /// The chain `(s_{n+1}, r_n) = (a_n, c_n)` read off a normal sequence,
    /// verifying `∂x s_{n+1} = r_n - r_{n+1}` and `∂y log r_n = s_n - s_{n+1}`
    /// on every consecutive pair.
    pub fn toda_pairs(&self) -> Result<Vec<(i64, C, C)>, LaplaceError> {
        let mut out = Vec::new();
        for (n, op) in self.iter() {
            if !op.is_normal_form() {
                return Err(LaplaceError::NotNormalForm);
            }
            out.push((n, op.a.clone(), op.c.clone()));
        }
        for w in out.windows(2) {
            let (n, ref s_np1, ref r_n) = w[0];
            let (_, ref s_np2, ref r_np1) = w[1];
            // ∂x s_{n+1} = r_n - r_{n+1}
            let lhs = s_np1.partial(Axis::X)?;
            let rhs = r_n.sub(r_np1)?;
            if !lhs.agrees_with(&rhs, SEQUENCE_CHECK_TOL) {
                return Err(LaplaceError::RecurrenceCheck { n });
            }
            // ∂y log r_n ... uses the *next* pair's s: s_{n+1} vs s_{n+2}
            if !r_np1.is_vanishing() {
                let lhs = r_np1.log_partial(Axis::Y)?;
                let rhs = s_np1.sub(s_np2)?;
                if !lhs.agrees_with(&rhs, SEQUENCE_CHECK_TOL) {
                    return Err(LaplaceError::RecurrenceCheck { n });
                }
            }
        }
        Ok(out)
    }

    /// Residuals `∂x∂y log r_n - (r_{n+1} - 2 r_n + r_{n-1})` for interior `n`.
    pub fn two_dte_residuals(&self) -> Result<Vec<(i64, C)>, LaplaceError> {
        let pairs = self.toda_pairs()?;
        let mut out = Vec::new();
        for w in pairs.windows(3) {
            let (_, _, ref r_prev) = w[0];
            let (n, _, ref r) = w[1];
            let (_, _, ref r_next) = w[2];
            let lhs = r.mixed_log_partial()?;
            let two = r.add(r)?;
            let rhs = r_next.sub(&two)?.add(r_prev)?;
            out.push((n, lhs.sub(&rhs)?));
        }
        Ok(out)
    }
}

/// Build the bi-directional normal-form Laplace sequence from a normal-form
/// `M_0` over `n_min..=n_max`.
///
/// Up-steps use the recurrence `a_{n+1} = a_n - ∂y log h_n`,
/// `c_{n+1} = c_n - ∂x a_n`. Down-steps apply the down transformation and
/// re-normalize with the gauge `F = log k_n` (this exact integration
/// constant is what makes the up-recurrence reproduce `M_n` from
/// `M_{n-1}`); the reproduction is checked for every down-step.
pub fn normal_sequence<C: CoeffField>(
    m0: &HyperbolicOperator<C>,
    n_min: i64,
    n_max: i64,
) -> Result<OperatorSequence<C>, LaplaceError> {
    if n_min > 0 || n_max < 0 || n_min > n_max {
        return Err(LaplaceError::BadRange { n_min, n_max });
    }
    if !m0.is_normal_form() {
        return Err(LaplaceError::NotNormalForm);
    }
    if let Some(order) = m0.a.order_budget() {
        let steps = (n_max - n_min) as usize;
        let need = 2 * steps + 2;
        if order < need {
            return Err(LaplaceError::InsufficientJetOrder {
                have: order,
                steps,
                need,
            });
        }
    }

    let mut ups: Vec<(HyperbolicOperator<C>, Provenance)> =
        vec![(m0.clone(), Provenance::Origin)];
    for n in 0..n_max {
        let cur = &ups.last().unwrap().0;
        let inv = cur.invariants()?;
        if inv.h.is_vanishing() {
            return Err(LaplaceError::VanishingInvariant { which: 'h', n });
        }
        let a = cur.a.sub(&inv.h.log_partial(Axis::Y)?)?;
        let c = cur.c.sub(&cur.a.partial(Axis::X)?)?;
        let b = cur.b.zero_like();
        ups.push((HyperbolicOperator { a, b, c }, Provenance::UpStep));
    }

    let mut downs: Vec<(HyperbolicOperator<C>, Provenance)> = Vec::new();
    {
        let mut cur = m0.clone();
        for step in 0..(-n_min) {
            let n = -step; // index of the operator being stepped down from
            let inv = cur.invariants()?;
            if inv.k.is_vanishing() {
                return Err(LaplaceError::VanishingInvariant { which: 'k', n });
            }
            let lowered = cur.laplace_down()?;
            let gauge = Gauge::log_of(&inv.k)?;
            let normal = lowered.gauge_conjugate(&gauge)?;
            debug_assert!(normal.is_normal_form());
            // Round-trip: the up-recurrence applied to M_{n-1} must return M_n.
            let prev_inv = normal.invariants()?;
            let a_back = normal.a.sub(&prev_inv.h.log_partial(Axis::Y)?)?;
            let c_back = normal.c.sub(&normal.a.partial(Axis::X)?)?;
            let back = HyperbolicOperator {
                a: a_back,
                b: normal.b.zero_like(),
                c: c_back,
            };
            if !back.agrees_with(&cur, SEQUENCE_CHECK_TOL) {
                return Err(LaplaceError::RecurrenceCheck { n: n - 1 });
            }
            downs.push((normal.clone(), Provenance::DownStep));
            cur = normal;
        }
    }

    let mut entries = Vec::with_capacity(ups.len() + downs.len());
    entries.extend(downs.into_iter().rev());
    entries.extend(ups);
    Ok(OperatorSequence { n_min, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{CRat, Jet2, PolyS, C64};

    fn q(p: i64, d: i64) -> CRat {
        CRat::from_ratio(p, d)
    }

    fn rat_c(c: CRat) -> RationalS<CRat> {
        RationalS::constant(c)
    }

    /// Closed forms of the EPD normal-form sequence entries.
    fn epd_normal_closed(alpha: &CRat, beta: &CRat, n: i64) -> HyperbolicOperator<RationalS<CRat>> {
        let nn = CRat::from_integer(n);
        let two_n = nn.add(&nn);
        let a_num = beta.sub(alpha).sub(&two_n);
        let c_num = alpha.add(&nn).mul(&beta.sub(&nn).add(&CRat::from_integer(1)));
        HyperbolicOperator {
            a: RationalS::over_s_power(a_num, 1),
            b: RationalS::zero(),
            c: RationalS::over_s_power(c_num, 2),
        }
    }

    fn epd_invariant_closed(alpha: &CRat, beta: &CRat, n: i64) -> RationalS<CRat> {
        let nn = CRat::from_integer(n);
        let h_num = alpha
            .add(&nn)
            .add(&CRat::from_integer(1))
            .mul(&beta.sub(&nn))
            .neg();
        RationalS::over_s_power(h_num, 2)
    }

    #[test]
    fn bare_operator_has_zero_invariants() {
        let m = HyperbolicOperator::bare(&RationalS::<CRat>::zero());
        let inv = m.invariants().unwrap();
        assert!(inv.h.is_zero() && inv.k.is_zero());
    }

    #[test]
    fn epd_seed_invariants_match_closed_form() {
        let alpha = q(1, 2);
        let beta = q(1, 3);
        let m0 = epd_seed_operator(&alpha, &beta);
        let inv = m0.invariants().unwrap();
        // h0 = -(alpha+1) beta / s^2, k0 = -alpha (beta+1) / s^2
        let h_want = RationalS::over_s_power(
            alpha.add(&q(1, 1)).mul(&beta).neg(),
            2,
        );
        let k_want = RationalS::over_s_power(
            alpha.mul(&beta.add(&q(1, 1))).neg(),
            2,
        );
        assert!(inv.h.equivalent(&h_want));
        assert!(inv.k.equivalent(&k_want));
        // Substitution check from the closed form: h0 at s = 2 is -1/8.
        assert_eq!(inv.h.eval(&q(2, 1)).unwrap(), q(-1, 8));
    }

    #[test]
    fn epd_normal_form_matches_paper_reduction() {
        // Gauge F = alpha log s brings the seed to
        // dxdy + (beta-alpha)/s dx + alpha(beta+1)/s^2.
        let alpha = q(1, 2);
        let beta = q(1, 3);
        let m0 = epd_seed_operator(&alpha, &beta);
        let (normal, _) = m0.to_normal_form().unwrap();
        let want = HyperbolicOperator {
            a: RationalS::over_s_power(beta.sub(&alpha), 1),
            b: RationalS::zero(),
            c: RationalS::over_s_power(alpha.mul(&beta.add(&q(1, 1))), 2),
        };
        assert!(normal.agrees_with(&want, 0.0));
        // Invariants unchanged by the normalization.
        let inv0 = m0.invariants().unwrap();
        let inv1 = normal.invariants().unwrap();
        assert!(inv0.h.equivalent(&inv1.h) && inv0.k.equivalent(&inv1.k));
    }

    #[test]
    fn gauge_conjugation_preserves_invariants_exactly() {
        // Random-ish rational operator and polynomial gauge potential.
        let a = RationalS::new(
            PolyS::new(vec![q(1, 3), q(2, 1)]),
            PolyS::new(vec![q(0, 1), q(1, 1)]),
        )
        .unwrap();
        let b = RationalS::over_s_power(q(-3, 4), 2);
        let c = RationalS::new(
            PolyS::new(vec![q(5, 7)]),
            PolyS::new(vec![q(0, 1), q(0, 1), q(1, 1)]),
        )
        .unwrap();
        let m = HyperbolicOperator::new(a, b, c);
        let f = RationalS::from_poly(PolyS::new(vec![q(1, 1), q(2, 5), q(-1, 6)]));
        let gauge = Gauge::from_potential(&f).unwrap();
        let m2 = m.gauge_conjugate(&gauge).unwrap();
        let i1 = m.invariants().unwrap();
        let i2 = m2.invariants().unwrap();
        assert!(i1.h.equivalent(&i2.h));
        assert!(i1.k.equivalent(&i2.k));
    }

    #[test]
    fn zero_gauge_keeps_operator() {
        let m = epd_seed_operator(&q(1, 2), &q(1, 3));
        let gauge = Gauge::identity_like(&m.a);
        let m2 = m.gauge_conjugate(&gauge).unwrap();
        assert!(m.agrees_with(&m2, 0.0));
    }

    #[test]
    fn laplace_up_rejects_zero_invariant() {
        let m = HyperbolicOperator::bare(&RationalS::<CRat>::zero());
        assert!(matches!(
            m.laplace_up(),
            Err(LaplaceError::VanishingInvariant { which: 'h', .. })
        ));
        assert!(matches!(
            m.laplace_down(),
            Err(LaplaceError::VanishingInvariant { which: 'k', .. })
        ));
    }

    #[test]
    fn laplace_up_from_epd_normal_form() {
        let alpha = q(1, 2);
        let beta = q(1, 3);
        let (m0, _) = epd_seed_operator(&alpha, &beta).to_normal_form().unwrap();
        let m1 = m0.laplace_up().unwrap();
        // a_1 = (beta - alpha - 2)/s = (-13/6)/s, c_1 = (alpha+1) beta / s^2 = (1/2)/s^2.
        assert!(m1.a.equivalent(&RationalS::over_s_power(q(-13, 6), 1)));
        assert!(m1.c.equivalent(&RationalS::over_s_power(q(1, 2), 2)));
    }

    #[test]
    fn up_invariant_recurrence_is_exact() {
        // h_+ = 2h - k - dxdy log h as a rational identity.
        for (pa, pb) in [(1i64, 2i64), (2, 7), (-2, 5)] {
            let alpha = q(pa, 3);
            let beta = q(pb, 11);
            let (m0, _) = epd_seed_operator(&alpha, &beta).to_normal_form().unwrap();
            let inv0 = m0.invariants().unwrap();
            let m1 = m0.laplace_up().unwrap();
            let inv1 = m1.invariants().unwrap();
            let two_h = inv0.h.add(&inv0.h);
            let want_h = two_h
                .sub(&inv0.k)
                .sub(&inv0.h.mixed_log_partial().unwrap());
            assert!(inv1.h.equivalent(&want_h));
            assert!(inv1.k.equivalent(&inv0.h));
        }
    }

    #[test]
    fn down_then_up_preserves_invariants() {
        let (m0, _) = epd_seed_operator(&q(1, 2), &q(1, 3)).to_normal_form().unwrap();
        let down = m0.laplace_down().unwrap();
        let up = down.laplace_up().unwrap();
        let i0 = m0.invariants().unwrap();
        let i2 = up.invariants().unwrap();
        assert!(i0.h.equivalent(&i2.h));
        assert!(i0.k.equivalent(&i2.k));
    }

    #[test]
    fn down_step_b_coefficient_for_epd() {
        // From the normal form, b_- = -dx log k_0 = 2/s independent of (alpha, beta).
        let (m0, _) = epd_seed_operator(&q(1, 2), &q(1, 3)).to_normal_form().unwrap();
        let down = m0.laplace_down().unwrap();
        assert!(down.b.equivalent(&RationalS::over_s_power(q(2, 1), 1)));
    }

    #[test]
    fn normal_sequence_epd_closed_forms_exact() {
        let alpha = q(1, 2);
        let beta = q(1, 3);
        let (m0, _) = epd_seed_operator(&alpha, &beta).to_normal_form().unwrap();
        let seq = normal_sequence(&m0, -3, 3).unwrap();
        for n in -3..=3 {
            let got = seq.get(n).unwrap();
            let want = epd_normal_closed(&alpha, &beta, n);
            assert!(got.agrees_with(&want, 0.0), "entry n = {n}");
            let inv = got.invariants().unwrap();
            assert!(inv.h.equivalent(&epd_invariant_closed(&alpha, &beta, n)));
            assert!(inv.k.equivalent(&epd_invariant_closed(&alpha, &beta, n - 1)));
        }
        assert_eq!(seq.provenance(2), Some(Provenance::UpStep));
        assert_eq!(seq.provenance(-1), Some(Provenance::DownStep));
        assert_eq!(seq.provenance(0), Some(Provenance::Origin));
    }

    #[test]
    fn integer_alpha_terminates_with_step_report() {
        // alpha = -1: (alpha + n + 1)(beta - n) vanishes at n = 0, so the
        // first up-step must fail with the offending index.
        let alpha = q(-1, 1);
        let beta = q(1, 3);
        let (m0, _) = epd_seed_operator(&alpha, &beta).to_normal_form().unwrap();
        match normal_sequence(&m0, 0, 2) {
            Err(LaplaceError::VanishingInvariant { which: 'h', n: 0 }) => {}
            other => panic!("expected vanishing h at n = 0, got {other:?}"),
        }
    }

    #[test]
    fn toda_pairs_satisfy_chain_relations() {
        let alpha = q(2, 5);
        let beta = q(-3, 7);
        let (m0, _) = epd_seed_operator(&alpha, &beta).to_normal_form().unwrap();
        let seq = normal_sequence(&m0, -4, 4).unwrap();
        let pairs = seq.toda_pairs().unwrap();
        assert_eq!(pairs.len(), 9);
        // r_n = (alpha+n)(beta-n+1)/s^2
        for (n, _, r) in &pairs {
            let nn = CRat::from_integer(*n);
            let want = RationalS::over_s_power(
                alpha.add(&nn).mul(&beta.sub(&nn).add(&q(1, 1))),
                2,
            );
            assert!(r.equivalent(&want));
        }
        for (_, res) in seq.two_dte_residuals().unwrap() {
            assert!(res.is_zero());
        }
    }

    #[test]
    fn constant_coefficient_chain_is_consistent() {
        // a, c constant: s and r constant, both sides of the chain relations zero.
        let m0 = HyperbolicOperator {
            a: rat_c(q(3, 2)),
            b: RationalS::zero(),
            c: rat_c(q(-2, 9)),
        };
        let seq = normal_sequence(&m0, -1, 1).unwrap();
        let pairs = seq.toda_pairs().unwrap();
        for (_, s, r) in &pairs {
            assert!(s.partial(Axis::X).is_zero());
            assert!(r.partial(Axis::X).is_zero());
        }
    }

    #[test]
    fn jet_backend_reproduces_exact_sequence() {
        let alpha = q(1, 2);
        let beta = q(1, 3);
        let (m0, _) = epd_seed_operator(&alpha, &beta).to_normal_form().unwrap();
        let base = (C64::new(0.8, 0.0), C64::new(0.3, 0.0));
        let order = 2 * 4 + 2;
        let to_jet = |f: &RationalS<CRat>| -> Jet2<C64> {
            let cf: Vec<C64> = f.num().coeffs().iter().map(|c| c.to_c64()).collect();
            let cd: Vec<C64> = f.den().coeffs().iter().map(|c| c.to_c64()).collect();
            RationalS::<C64>::new(PolyS::new(cf), PolyS::new(cd))
                .unwrap()
                .taylor_jet(base, order)
                .unwrap()
        };
        let m0j = HyperbolicOperator {
            a: to_jet(&m0.a),
            b: Jet2::zero(base, order),
            c: to_jet(&m0.c),
        };
        let seqj = normal_sequence(&m0j, -2, 2).unwrap();
        let seq = normal_sequence(&m0, -2, 2).unwrap();
        for n in -2..=2 {
            let exact = seq.get(n).unwrap();
            let jet = seqj.get(n).unwrap();
            let budget = jet.a.order().min(jet.c.order());
            let ea = to_jet(&exact.a).truncated(budget);
            let ec = to_jet(&exact.c).truncated(budget);
            assert!(jet.a.truncated(budget).approx_eq(&ea, 1e-10), "a at n={n}");
            assert!(jet.c.truncated(budget).approx_eq(&ec, 1e-10), "c at n={n}");
        }
    }

    #[test]
    fn jet_order_budget_is_enforced() {
        let base = (C64::new(0.8, 0.0), C64::new(0.3, 0.0));
        let m0 = HyperbolicOperator {
            a: Jet2::constant(base, 4, C64::new(1.0, 0.0)),
            b: Jet2::zero(base, 4),
            c: Jet2::constant(base, 4, C64::new(2.0, 0.0)),
        };
        assert!(matches!(
            normal_sequence(&m0, -2, 2),
            Err(LaplaceError::InsufficientJetOrder { .. })
        ));
    }

    #[test]
    fn factorization_composition_identity_on_solution_jets() {
        // (L_- ∘ L_+) u = h u at the base point for a solution jet of M u = 0,
        // with L_+ = ∂y + a, L_- = ∂x + b.
        let base = (C64::new(1.3, 0.0), C64::new(0.4, 0.0));
        let order = 6;
        let alpha = q(1, 2);
        let beta = q(1, 3);
        let seed = epd_seed_operator(&alpha, &beta);
        let to_jet = |f: &RationalS<CRat>| -> Jet2<C64> {
            let cf: Vec<C64> = f.num().coeffs().iter().map(|c| c.to_c64()).collect();
            let cd: Vec<C64> = f.den().coeffs().iter().map(|c| c.to_c64()).collect();
            RationalS::<C64>::new(PolyS::new(cf), PolyS::new(cd))
                .unwrap()
                .taylor_jet(base, order)
                .unwrap()
        };
        let m = HyperbolicOperator {
            a: to_jet(&seed.a),
            b: to_jet(&seed.b),
            c: to_jet(&seed.c),
        };
        // Build a solution jet from random characteristic data u[p][0], u[0][q].
        let mut u = Jet2::zero(base, order);
        let data = [0.7, -0.4, 0.9, 0.2, -0.6, 0.3, 0.1];
        for p in 0..=order {
            u = u
                .add(&Jet2::from_coeffs(
                    base,
                    order,
                    [((p, 0), C64::new(data[p], 0.0))],
                ))
                .unwrap();
            if p >= 1 {
                u = u
                    .add(&Jet2::from_coeffs(
                        base,
                        order,
                        [((0, p), C64::new(data[p] * 0.5 - 0.1, 0.0))],
                    ))
                    .unwrap();
            }
        }
        // Fill u[p][q] for p,q >= 1 from the PDE u_xy = -(a u_x + b u_y + c u).
        for d in 2..=order {
            for p in 1..d {
                let qdeg = d - p;
                if qdeg < 1 {
                    continue;
                }
                let rhs = m
                    .a
                    .mul(&u.partial(Axis::X).unwrap())
                    .unwrap()
                    .add(&m.b.mul(&u.partial(Axis::Y).unwrap()).unwrap())
                    .unwrap()
                    .add(&m.c.mul(&u).unwrap())
                    .unwrap()
                    .neg();
                // u_xy coefficient (p-1, q-1) equals p*q*u[p][q].
                let val = rhs.coeff(p - 1, qdeg - 1) / C64::new((p * qdeg) as f64, 0.0);
                u = u
                    .add(&Jet2::from_coeffs(base, order, [((p, qdeg), val)]))
                    .unwrap();
            }
        }
        let lp = u.partial(Axis::Y).unwrap().add(&m.a.mul(&u).unwrap()).unwrap();
        let lm = lp
            .partial(Axis::X)
            .unwrap()
            .add(&m.b.mul(&lp).unwrap())
            .unwrap();
        let h = m.invariants().unwrap().h;
        let want = h.mul(&u).unwrap();
        assert!((lm.value() - want.value()).norm() < 1e-10 * want.value().norm().max(1.0));
    }
}
