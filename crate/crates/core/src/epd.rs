//! EPD operators `M_{p,q}(α)` and contiguity operators `L_{p,q}(α)` as
//! first-class objects acting on polynomial test functions in exact
//! rational arithmetic, plus the residual of the EPD system on `Φ` itself.
//!
//! `M_{p,q}(α) = ∂_p∂_q + α_q/(x_p-x_q) ∂_p + α_p/(x_q-x_p) ∂_q`,
//! `L_{p,q}(α) = (x_p-x_q) ∂_q + α_q`.
//!
//! Every operator identity in this module is exact: a nonzero residual at
//! a rational probe point is a bug, not a tolerance issue.

use crate::contour::{ContourPath, QuadSettings};
use crate::fields::{CRat, FieldScalar};
use crate::hgf::{phi_partials_on, AlphaWeights, HgfError, PointConfig};
use num_complex::Complex64 as C64;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EpdError {
    #[error("operator indices must be distinct")]
    IndicesNotDistinct,
    #[error("evaluation point has coincident coordinates (denominator vanishes)")]
    CoincidentPoint,
    #[error(transparent)]
    Hgf(#[from] HgfError),
}

/// Multivariate polynomial over exact complex rationals, the probe space
/// for the operator identities.
#[derive(Clone, Debug, PartialEq)]
pub struct TestFunction {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, CRat>,
}

impl TestFunction {
    pub fn zero(nvars: usize) -> Self {
        TestFunction {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: CRat) -> Self {
        let mut f = Self::zero(nvars);
        if !c.is_zero() {
            f.terms.insert(vec![0; nvars], c);
        }
        f
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, CRat::one())
    }

    /// The coordinate `x_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars);
        let mut exps = vec![0; nvars];
        exps[i] = 1;
        Self::monomial(nvars, exps, CRat::one())
    }

    pub fn monomial(nvars: usize, exps: Vec<u32>, coeff: CRat) -> Self {
        assert_eq!(exps.len(), nvars);
        let mut f = Self::zero(nvars);
        if !coeff.is_zero() {
            f.terms.insert(exps, coeff);
        }
        f
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    fn insert(&mut self, exps: Vec<u32>, c: CRat) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get().add(&c);
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.insert(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            out.terms.insert(e.clone(), c.neg());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = Self::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let exps: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.insert(exps, ca.mul(cb));
            }
        }
        out
    }

    pub fn scale(&self, factor: &CRat) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let v = c.mul(factor);
            if !v.is_zero() {
                out.terms.insert(e.clone(), v);
            }
        }
        out
    }

    pub fn partial(&self, i: usize) -> Self {
        assert!(i < self.nvars);
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut exps = e.clone();
            exps[i] -= 1;
            out.insert(exps, c.mul(&CRat::from_integer(e[i] as i64)));
        }
        out
    }

    pub fn eval(&self, point: &[CRat]) -> CRat {
        assert_eq!(point.len(), self.nvars);
        let mut acc = CRat::zero();
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (i, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    term = term.mul(&point[i]);
                }
            }
            acc = acc.add(&term);
        }
        acc
    }
}

/// Quotient of two test functions; denominators stay products of
/// coordinate differences in this module.
#[derive(Clone, Debug)]
pub struct RatFunc {
    num: TestFunction,
    den: TestFunction,
}

impl RatFunc {
    pub fn from_poly(p: TestFunction) -> Self {
        let nvars = p.nvars();
        RatFunc {
            num: p,
            den: TestFunction::one(nvars),
        }
    }

    pub fn zero(nvars: usize) -> Self {
        Self::from_poly(TestFunction::zero(nvars))
    }

    pub fn new(num: TestFunction, den: TestFunction) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        RatFunc { num, den }
    }

    pub fn nvars(&self) -> usize {
        self.num.nvars()
    }

    pub fn add(&self, other: &Self) -> Self {
        RatFunc {
            num: self.num.mul(&other.den).add(&other.num.mul(&self.den)),
            den: self.den.mul(&other.den),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        RatFunc {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        RatFunc {
            num: self.num.mul(&other.num),
            den: self.den.mul(&other.den),
        }
    }

    pub fn mul_poly(&self, p: &TestFunction) -> Self {
        RatFunc {
            num: self.num.mul(p),
            den: self.den.clone(),
        }
    }

    pub fn scale(&self, c: &CRat) -> Self {
        RatFunc {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    /// Quotient rule.
    pub fn partial(&self, i: usize) -> Self {
        let num = self
            .num
            .partial(i)
            .mul(&self.den)
            .sub(&self.num.mul(&self.den.partial(i)));
        RatFunc {
            num,
            den: self.den.mul(&self.den),
        }
    }

    pub fn eval(&self, point: &[CRat]) -> Result<CRat, EpdError> {
        let d = self.den.eval(point);
        if d.is_zero() {
            return Err(EpdError::CoincidentPoint);
        }
        Ok(self.num.eval(point).div(&d).unwrap())
    }
}

/// `x_p - x_q` as a polynomial.
fn diff_poly(nvars: usize, p: usize, q: usize) -> TestFunction {
    TestFunction::var(nvars, p).sub(&TestFunction::var(nvars, q))
}

/// The EPD operator `M_{p,q}(α)`; symmetric under swapping `(p, q)`.
#[derive(Clone, Debug)]
pub struct EpdOperator {
    pub p: usize,
    pub q: usize,
    pub alpha: Vec<CRat>,
}

impl EpdOperator {
    pub fn new(p: usize, q: usize, alpha: Vec<CRat>) -> Result<Self, EpdError> {
        if p == q {
            return Err(EpdError::IndicesNotDistinct);
        }
        Ok(EpdOperator { p, q, alpha })
    }

    /// `M_{p,q}(α) f = ∂_p∂_q f + α_q/(x_p-x_q) ∂_p f - α_p/(x_p-x_q) ∂_q f`.
    pub fn apply(&self, f: &RatFunc) -> RatFunc {
        let nvars = f.nvars();
        let d = diff_poly(nvars, self.p, self.q);
        let fp = f.partial(self.p);
        let fq = f.partial(self.q);
        let fpq = fp.partial(self.q);
        let term1 = RatFunc::new(fp.num.scale(&self.alpha[self.q]), fp.den.mul(&d));
        let term2 = RatFunc::new(fq.num.scale(&self.alpha[self.p]), fq.den.mul(&d));
        fpq.add(&term1).sub(&term2)
    }
}

/// The contiguity operator `L_{p,q}(α) = (x_p - x_q) ∂_q + α_q`.
#[derive(Clone, Debug)]
pub struct ContiguityOperator {
    pub p: usize,
    pub q: usize,
    pub alpha: Vec<CRat>,
}

impl ContiguityOperator {
    pub fn new(p: usize, q: usize, alpha: Vec<CRat>) -> Result<Self, EpdError> {
        if p == q {
            return Err(EpdError::IndicesNotDistinct);
        }
        Ok(ContiguityOperator { p, q, alpha })
    }

    pub fn apply(&self, f: &RatFunc) -> RatFunc {
        let nvars = f.nvars();
        let d = diff_poly(nvars, self.p, self.q);
        f.partial(self.q)
            .mul_poly(&d)
            .add(&f.scale(&self.alpha[self.q]))
    }
}

/// `α + n (e_i - e_j)` on an exact parameter vector.
pub fn alpha_shift(alpha: &[CRat], i: usize, j: usize, n: i64) -> Vec<CRat> {
    let mut out = alpha.to_vec();
    let nn = CRat::from_integer(n);
    out[i] = out[i].add(&nn);
    out[j] = out[j].sub(&nn);
    out
}

/// All monomials of total degree at most `max_deg` in `nvars` variables.
pub fn monomial_basis(nvars: usize, max_deg: u32) -> Vec<TestFunction> {
    let mut out = Vec::new();
    let mut exps = vec![0u32; nvars];
    fn rec(
        nvars: usize,
        pos: usize,
        remaining: u32,
        exps: &mut Vec<u32>,
        out: &mut Vec<TestFunction>,
    ) {
        if pos == nvars {
            out.push(TestFunction::monomial(nvars, exps.clone(), CRat::one()));
            return;
        }
        for d in 0..=remaining {
            exps[pos] = d;
            rec(nvars, pos + 1, remaining - d, exps, out);
        }
        exps[pos] = 0;
    }
    rec(nvars, 0, max_deg, &mut exps, &mut out);
    out
}

/// S-pair identity (the syzygy of two EPD operators):
/// `∂_k M_{i,j} - ∂_i M_{j,k}
///   = -α_j (x_k-x_i)/((x_i-x_j)(x_j-x_k)) M_{i,k}
///     - α_k/(x_j-x_k) M_{i,j} - α_i/(x_i-x_j) M_{j,k}`
/// applied to `f` and evaluated at `point`; exact zero.
pub fn spair_identity_residual(
    i: usize,
    j: usize,
    k: usize,
    alpha: &[CRat],
    f: &TestFunction,
    point: &[CRat],
) -> Result<CRat, EpdError> {
    if i == j || j == k || i == k {
        return Err(EpdError::IndicesNotDistinct);
    }
    let nvars = f.nvars();
    let fr = RatFunc::from_poly(f.clone());
    let m_ij = EpdOperator::new(i, j, alpha.to_vec())?.apply(&fr);
    let m_jk = EpdOperator::new(j, k, alpha.to_vec())?.apply(&fr);
    let m_ik = EpdOperator::new(i, k, alpha.to_vec())?.apply(&fr);

    let lhs = m_ij.partial(k).sub(&m_jk.partial(i));

    let d_ij = diff_poly(nvars, i, j);
    let d_jk = diff_poly(nvars, j, k);
    let d_ki = diff_poly(nvars, k, i);
    // -α_j (x_k - x_i) / ((x_i-x_j)(x_j-x_k)) M_{i,k}
    let t1 = RatFunc::new(
        m_ik.num.mul(&d_ki).scale(&alpha[j].neg()),
        m_ik.den.mul(&d_ij).mul(&d_jk),
    );
    // -α_k/(x_j-x_k) M_{i,j}
    let t2 = RatFunc::new(m_ij.num.scale(&alpha[k].neg()), m_ij.den.mul(&d_jk));
    // -α_i/(x_i-x_j) M_{j,k}
    let t3 = RatFunc::new(m_jk.num.scale(&alpha[i].neg()), m_jk.den.mul(&d_ij));
    let rhs = t1.add(&t2).add(&t3);

    lhs.sub(&rhs).eval(point)
}

/// The generator corollary: with `(i,j,k) = (a,b,c)` the S-pair identity
/// solves for `α_b M_{a,c}`:
/// `α_b M_{a,c} f = (x_a-x_b)(x_b-x_c)/(x_a-x_c) [ S(M_{a,b},M_{b,c}) f
///   + α_c/(x_b-x_c) M_{a,b} f + α_a/(x_a-x_b) M_{b,c} f ]`.
pub fn generator_corollary_residual(
    a: usize,
    b: usize,
    c: usize,
    alpha: &[CRat],
    f: &TestFunction,
    point: &[CRat],
) -> Result<CRat, EpdError> {
    if a == b || b == c || a == c {
        return Err(EpdError::IndicesNotDistinct);
    }
    let nvars = f.nvars();
    let fr = RatFunc::from_poly(f.clone());
    let m_ab = EpdOperator::new(a, b, alpha.to_vec())?.apply(&fr);
    let m_bc = EpdOperator::new(b, c, alpha.to_vec())?.apply(&fr);
    let m_ac = EpdOperator::new(a, c, alpha.to_vec())?.apply(&fr);
    let spair = m_ab.partial(c).sub(&m_bc.partial(a));

    let d_ab = diff_poly(nvars, a, b);
    let d_bc = diff_poly(nvars, b, c);
    let d_ac = diff_poly(nvars, a, c);
    let inner = spair
        .add(&RatFunc::new(
            m_ab.num.scale(&alpha[c]),
            m_ab.den.mul(&d_bc),
        ))
        .add(&RatFunc::new(
            m_bc.num.scale(&alpha[a]),
            m_bc.den.mul(&d_ab),
        ));
    let rhs = RatFunc::new(inner.num.mul(&d_ab).mul(&d_bc), inner.den.mul(&d_ac));
    let lhs = m_ac.scale(&alpha[b]);
    lhs.sub(&rhs).eval(point)
}

/// Which of the two intertwining identities to verify.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntertwineKind {
    /// `L_{q,p}(α+e_p-e_q) L_{p,q}(α) + (x_p-x_q)^2 M_{p,q}(α) = (α_p+1) α_q`.
    Factorization,
    /// `(x_p-x_q)^2 M_{p,q}(α+e_p-e_q) L_{p,q}(α) = L_{p,q}(α) (x_p-x_q)^2 M_{p,q}(α)`.
    Commutation,
}

/// Exact residual of the chosen intertwining identity on `f` at `point`.
pub fn intertwine_identity_residual(
    p: usize,
    q: usize,
    alpha: &[CRat],
    f: &TestFunction,
    point: &[CRat],
    kind: IntertwineKind,
) -> Result<CRat, EpdError> {
    if p == q {
        return Err(EpdError::IndicesNotDistinct);
    }
    let nvars = f.nvars();
    let fr = RatFunc::from_poly(f.clone());
    let shifted = alpha_shift(alpha, p, q, 1);
    let d2 = diff_poly(nvars, p, q).mul(&diff_poly(nvars, p, q));
    match kind {
        IntertwineKind::Factorization => {
            let l_pq = ContiguityOperator::new(p, q, alpha.to_vec())?.apply(&fr);
            let l_qp = ContiguityOperator::new(q, p, shifted)?.apply(&l_pq);
            let m = EpdOperator::new(p, q, alpha.to_vec())?.apply(&fr);
            let c = alpha[p].add(&CRat::one()).mul(&alpha[q]);
            let lhs = l_qp.add(&m.mul_poly(&d2));
            lhs.sub(&fr.scale(&c)).eval(point)
        }
        IntertwineKind::Commutation => {
            let l = ContiguityOperator::new(p, q, alpha.to_vec())?;
            let lf = l.apply(&fr);
            let lhs = EpdOperator::new(p, q, shifted)?.apply(&lf).mul_poly(&d2);
            let mf = EpdOperator::new(p, q, alpha.to_vec())?.apply(&fr).mul_poly(&d2);
            let rhs = l.apply(&mf);
            lhs.sub(&rhs).eval(point)
        }
    }
}

/// `[M_{p,q}(α), L_{i,j}(α)] f`, exact zero when `{i,j}` and `{p,q}` are
/// disjoint.
pub fn disjoint_commutation_residual(
    p: usize,
    q: usize,
    i: usize,
    j: usize,
    alpha: &[CRat],
    f: &TestFunction,
    point: &[CRat],
) -> Result<CRat, EpdError> {
    let m = EpdOperator::new(p, q, alpha.to_vec())?;
    let l = ContiguityOperator::new(i, j, alpha.to_vec())?;
    let fr = RatFunc::from_poly(f.clone());
    let ml = m.apply(&l.apply(&fr));
    let lm = l.apply(&m.apply(&fr));
    ml.sub(&lm).eval(point)
}

/// Variant selector for the modulo-ideal contiguity compositions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LadderCompositionKind {
    /// `L_{p,q}(α+e_q) L_{q,r}(α) = (α_q+1) L_{p,r}(α) + W M_{q,r}(α)`.
    Up,
    /// `L_{q,r}(α) L_{p,q}(α) = α_q L_{p,r}(α) + W M_{q,r}(α)`.
    Down,
}

/// The frozen cofactor `W = (x_p-x_q)(x_q-x_r)` of the modulo-ideal
/// identities (derived once on the monomial basis; the same multiplication
/// operator works for both variants).
pub fn ladder_composition_cofactor(nvars: usize, p: usize, q: usize, r: usize) -> TestFunction {
    diff_poly(nvars, p, q).mul(&diff_poly(nvars, q, r))
}

/// Exact residual of the modulo-ideal composition identity on `f`.
pub fn modulo_ideal_identity_residual(
    p: usize,
    q: usize,
    r: usize,
    alpha: &[CRat],
    f: &TestFunction,
    point: &[CRat],
    kind: LadderCompositionKind,
) -> Result<CRat, EpdError> {
    if p == q || q == r || p == r {
        return Err(EpdError::IndicesNotDistinct);
    }
    let nvars = f.nvars();
    let fr = RatFunc::from_poly(f.clone());
    let w = ladder_composition_cofactor(nvars, p, q, r);
    let m_qr = EpdOperator::new(q, r, alpha.to_vec())?.apply(&fr);
    let l_pr = ContiguityOperator::new(p, r, alpha.to_vec())?.apply(&fr);
    let lhs = match kind {
        LadderCompositionKind::Up => {
            let inner = ContiguityOperator::new(q, r, alpha.to_vec())?.apply(&fr);
            let mut shifted = alpha.to_vec();
            shifted[q] = shifted[q].add(&CRat::one());
            ContiguityOperator::new(p, q, shifted)?.apply(&inner)
        }
        LadderCompositionKind::Down => {
            let inner = ContiguityOperator::new(p, q, alpha.to_vec())?.apply(&fr);
            ContiguityOperator::new(q, r, alpha.to_vec())?.apply(&inner)
        }
    };
    let scalar = match kind {
        LadderCompositionKind::Up => alpha[q].add(&CRat::one()),
        LadderCompositionKind::Down => alpha[q].clone(),
    };
    let rhs = l_pr.scale(&scalar).add(&m_qr.mul_poly(&w));
    lhs.sub(&rhs).eval(point)
}

/// Residual of the EPD equation on the hypergeometric function:
/// `|M_{p,q}(α) Φ| / scale` with the derivatives taken analytically under
/// the integral sign. The identity holds at the integrand level, so any
/// fixed path (open or closed) works.
pub fn epd_residual_phi(
    x: &PointConfig,
    alpha: &AlphaWeights,
    p: usize,
    q: usize,
    path: &ContourPath,
    settings: &QuadSettings,
) -> Result<f64, EpdError> {
    if p == q {
        return Err(EpdError::IndicesNotDistinct);
    }
    let (d_pq, _) = phi_partials_on(path, x, alpha, &[p, q], settings)?;
    let (d_p, _) = phi_partials_on(path, x, alpha, &[p], settings)?;
    let (d_q, _) = phi_partials_on(path, x, alpha, &[q], settings)?;
    let dx = x.get(p) - x.get(q);
    let t1 = alpha.get(q) / dx * d_p;
    let t2 = alpha.get(p) / dx * d_q;
    let val = d_pq + t1 - t2;
    let scale = d_pq
        .norm()
        .max(t1.norm())
        .max(t2.norm())
        .max(1e-300);
    Ok(val.norm() / scale)
}

/// Same residual with the exponent `α_p` deliberately perturbed inside the
/// operator only; a negative control that must fail loudly.
pub fn epd_residual_phi_broken(
    x: &PointConfig,
    alpha: &AlphaWeights,
    p: usize,
    q: usize,
    bump: f64,
    path: &ContourPath,
    settings: &QuadSettings,
) -> Result<f64, EpdError> {
    if p == q {
        return Err(EpdError::IndicesNotDistinct);
    }
    let (d_pq, _) = phi_partials_on(path, x, alpha, &[p, q], settings)?;
    let (d_p, _) = phi_partials_on(path, x, alpha, &[p], settings)?;
    let (d_q, _) = phi_partials_on(path, x, alpha, &[q], settings)?;
    let dx = x.get(p) - x.get(q);
    let t1 = alpha.get(q) / dx * d_p;
    let t2 = (alpha.get(p) + C64::new(bump, 0.0)) / dx * d_q;
    let val = d_pq + t1 - t2;
    let scale = d_pq.norm().max(t1.norm()).max(t2.norm()).max(1e-300);
    Ok(val.norm() / scale)
}
