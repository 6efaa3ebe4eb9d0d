//! Evaluation of the Gelfand hypergeometric function on GM(2,N), its
//! restriction `Φ(x;α)`, analytic derivatives under the integral sign, and
//! residual checks of the characterizing differential system, the
//! contiguity relations, the torus/GL(2) covariance, and the Moebius
//! pullback.
//!
//! `F(z;α) = ∫_C Π_j (z_{1,j} + z_{2,j} u)^{α_j} du` over a Pochhammer
//! cycle; `Φ(x;α) = F` on the stratum with second row 1, where the factors
//! read `(u + x_k)^{α_k}`.

use crate::contour::{
    build_pochhammer, integrate_multivalued, ContourError, ContourPath, LinFactor,
    MultivaluedIntegrand, PochhammerCycle, QuadSettings,
};
use num_complex::Complex64 as C64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HgfError {
    #[error(transparent)]
    Contour(#[from] ContourError),
    #[error("alpha weights invalid: {0}")]
    BadAlpha(&'static str),
    #[error("point configuration invalid: {0}")]
    BadConfig(&'static str),
    #[error("z matrix invalid: {0}")]
    BadZ(&'static str),
    #[error("cycle pair indices must be distinct and within 0..{n}")]
    BadPair { n: usize },
    #[error("cycle pairing is degenerate: |value| = {value:e} below 10x error {error:e}")]
    DegenerateCycle { value: f64, error: f64 },
    #[error("Moebius transform sends x_{0} to infinity (c x + d = 0)")]
    MoebiusPole(usize),
    #[error("matrix must be invertible (SL(2) checks require det = 1)")]
    SingularMatrix,
}

/// Tolerance on `|Σ α_j + 2|`.
const ALPHA_SUM_TOL: f64 = 1e-12;
/// Minimum distance of each weight from the integers.
const ALPHA_INT_TOL: f64 = 1e-8;
/// Relative minimum separation of configuration points.
const MIN_SEPARATION_REL: f64 = 1e-9;

/// The parameter vector `α ∈ C^N` with `Σ α_j = -2` and non-integer
/// entries.
#[derive(Clone, Debug, PartialEq)]
pub struct AlphaWeights {
    alpha: Vec<C64>,
}

impl AlphaWeights {
    pub fn new(alpha: Vec<C64>) -> Result<Self, HgfError> {
        if alpha.len() < 3 {
            return Err(HgfError::BadAlpha("need at least 3 weights"));
        }
        let sum: C64 = alpha.iter().sum();
        if (sum + C64::new(2.0, 0.0)).norm() > ALPHA_SUM_TOL {
            return Err(HgfError::BadAlpha("weights must sum to -2"));
        }
        for a in &alpha {
            if (a.re - a.re.round()).hypot(a.im) <= ALPHA_INT_TOL {
                return Err(HgfError::BadAlpha("weights must stay away from integers"));
            }
        }
        Ok(AlphaWeights { alpha })
    }

    pub fn from_re(re: &[f64]) -> Result<Self, HgfError> {
        Self::new(re.iter().map(|&r| C64::new(r, 0.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn get(&self, j: usize) -> C64 {
        self.alpha[j]
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.alpha
    }

    /// `α + n (e_i - e_j)`; the sum is untouched, the integer-distance
    /// invariant is re-checked.
    pub fn shifted(&self, i: usize, j: usize, n: i64) -> Result<Self, HgfError> {
        let mut alpha = self.alpha.clone();
        alpha[i] += C64::new(n as f64, 0.0);
        alpha[j] -= C64::new(n as f64, 0.0);
        Self::new(alpha)
    }
}

/// The configuration `x ∈ C^N` with pairwise distinct entries.
#[derive(Clone, Debug, PartialEq)]
pub struct PointConfig {
    x: Vec<C64>,
}

impl PointConfig {
    pub fn new(x: Vec<C64>) -> Result<Self, HgfError> {
        if x.len() < 3 {
            return Err(HgfError::BadConfig("need at least 3 points"));
        }
        let mut scale: f64 = 0.0;
        for i in 0..x.len() {
            for j in (i + 1)..x.len() {
                scale = scale.max((x[i] - x[j]).norm());
            }
        }
        let scale = scale.max(1.0);
        for i in 0..x.len() {
            for j in (i + 1)..x.len() {
                if (x[i] - x[j]).norm() <= MIN_SEPARATION_REL * scale {
                    return Err(HgfError::BadConfig("points too close together"));
                }
            }
        }
        Ok(PointConfig { x })
    }

    pub fn from_re(re: &[f64]) -> Result<Self, HgfError> {
        Self::new(re.iter().map(|&r| C64::new(r, 0.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn get(&self, k: usize) -> C64 {
        self.x[k]
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.x
    }

    /// Integrand branch point `-x_k`.
    pub fn branch_point(&self, k: usize) -> C64 {
        -self.x[k]
    }
}

/// A 2xN matrix on the generic stratum: `det(z_i, z_j) != 0` for `i != j`.
#[derive(Clone, Debug, PartialEq)]
pub struct ZMatrix {
    row1: Vec<C64>,
    row2: Vec<C64>,
}

impl ZMatrix {
    pub fn new(row1: Vec<C64>, row2: Vec<C64>) -> Result<Self, HgfError> {
        if row1.len() != row2.len() {
            return Err(HgfError::BadZ("rows of different length"));
        }
        if row1.len() < 3 {
            return Err(HgfError::BadZ("need at least 3 columns"));
        }
        let n = row1.len();
        let mut scale: f64 = 0.0;
        for j in 0..n {
            scale = scale.max(row1[j].norm().hypot(row2[j].norm()));
        }
        let scale = scale.max(1.0);
        for i in 0..n {
            for j in (i + 1)..n {
                let det = row1[i] * row2[j] - row2[i] * row1[j];
                if det.norm() <= 1e-9 * scale * scale {
                    return Err(HgfError::BadZ("column pair is (numerically) dependent"));
                }
            }
        }
        Ok(ZMatrix { row1, row2 })
    }

    /// The stratum matrix with first row `x` and second row ones.
    pub fn from_points(x: &PointConfig) -> Self {
        ZMatrix {
            row1: x.as_slice().to_vec(),
            row2: vec![C64::new(1.0, 0.0); x.len()],
        }
    }

    pub fn len(&self) -> usize {
        self.row1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.row1.is_empty()
    }

    pub fn column(&self, j: usize) -> (C64, C64) {
        (self.row1[j], self.row2[j])
    }

    /// Branch point of column `j` in the affine chart, `-z_{1,j}/z_{2,j}`.
    pub fn branch_point(&self, j: usize) -> Result<C64, HgfError> {
        if self.row2[j].norm() == 0.0 {
            return Err(HgfError::BadZ("column has z_{2,j} = 0 (branch point at infinity)"));
        }
        Ok(-self.row1[j] / self.row2[j])
    }

    /// Column scaling `z h` by a diagonal torus element.
    pub fn scaled_columns(&self, h: &[C64]) -> Result<Self, HgfError> {
        if h.len() != self.len() {
            return Err(HgfError::BadZ("torus element has wrong length"));
        }
        let row1 = self.row1.iter().zip(h).map(|(z, hh)| z * hh).collect();
        let row2 = self.row2.iter().zip(h).map(|(z, hh)| z * hh).collect();
        ZMatrix::new(row1, row2)
    }

    /// Left action `g z` of a 2x2 matrix.
    pub fn left_mul(&self, g: &[[C64; 2]; 2]) -> Result<Self, HgfError> {
        let n = self.len();
        let mut row1 = Vec::with_capacity(n);
        let mut row2 = Vec::with_capacity(n);
        for j in 0..n {
            row1.push(g[0][0] * self.row1[j] + g[0][1] * self.row2[j]);
            row2.push(g[1][0] * self.row1[j] + g[1][1] * self.row2[j]);
        }
        ZMatrix::new(row1, row2)
    }
}

/// An evaluated hypergeometric integral.
#[derive(Clone, Debug)]
pub struct HgfValue {
    pub value: C64,
    pub error: f64,
    /// `(i, j, rho)` of the cycle used.
    pub cycle: (usize, usize, f64),
    /// Set when `|value| < 10 * error`: the pairing of the cycle with the
    /// integrand is numerically degenerate.
    pub degenerate: bool,
}

fn check_pair(n: usize, pair: (usize, usize)) -> Result<(), HgfError> {
    if pair.0 == pair.1 || pair.0 >= n || pair.1 >= n {
        return Err(HgfError::BadPair { n });
    }
    Ok(())
}

/// The canonical Pochhammer cycle around `(-x_i, -x_j)`.
pub fn phi_cycle(
    x: &PointConfig,
    pair: (usize, usize),
    rho: f64,
) -> Result<PochhammerCycle, HgfError> {
    check_pair(x.len(), pair)?;
    let others: Vec<C64> = (0..x.len())
        .filter(|&k| k != pair.0 && k != pair.1)
        .map(|k| x.branch_point(k))
        .collect();
    Ok(build_pochhammer(
        x.branch_point(pair.0),
        x.branch_point(pair.1),
        &others,
        rho,
    )?)
}

/// The canonical Pochhammer cycle around the branch points of two columns.
pub fn z_cycle(
    z: &ZMatrix,
    pair: (usize, usize),
    rho: f64,
) -> Result<PochhammerCycle, HgfError> {
    check_pair(z.len(), pair)?;
    let others: Vec<C64> = (0..z.len())
        .filter(|&k| k != pair.0 && k != pair.1)
        .map(|k| z.branch_point(k))
        .collect::<Result<_, _>>()?;
    Ok(build_pochhammer(
        z.branch_point(pair.0)?,
        z.branch_point(pair.1)?,
        &others,
        rho,
    )?)
}

fn phi_integrand(x: &PointConfig, alpha: &AlphaWeights) -> Result<MultivaluedIntegrand, HgfError> {
    let one = C64::new(1.0, 0.0);
    let factors = x
        .as_slice()
        .iter()
        .zip(alpha.as_slice())
        .map(|(&xk, &ak)| LinFactor {
            a0: xk,
            a1: one,
            exponent: ak,
        })
        .collect();
    Ok(MultivaluedIntegrand::new(factors)?)
}

fn z_integrand(z: &ZMatrix, alpha: &AlphaWeights) -> Result<MultivaluedIntegrand, HgfError> {
    let factors = (0..z.len())
        .map(|j| {
            let (a0, a1) = z.column(j);
            LinFactor {
                a0,
                a1,
                exponent: alpha.get(j),
            }
        })
        .collect();
    Ok(MultivaluedIntegrand::new(factors)?)
}

fn run_integral(
    f: &MultivaluedIntegrand,
    path: &ContourPath,
    settings: &QuadSettings,
    cycle_tag: (usize, usize, f64),
) -> Result<HgfValue, HgfError> {
    let r = integrate_multivalued(f, path, settings)?;
    let degenerate = r.value.norm() < 10.0 * r.error;
    Ok(HgfValue {
        value: r.value,
        error: r.error,
        cycle: cycle_tag,
        degenerate,
    })
}

/// `Φ(x;α)` over the canonical cycle around `(-x_i, -x_j)`.
pub fn eval_phi(
    x: &PointConfig,
    alpha: &AlphaWeights,
    pair: (usize, usize),
    settings: &QuadSettings,
    rho: f64,
) -> Result<HgfValue, HgfError> {
    if alpha.len() != x.len() {
        return Err(HgfError::BadAlpha("alpha and x have different lengths"));
    }
    let cycle = phi_cycle(x, pair, rho)?;
    eval_phi_on(&cycle.path, x, alpha, settings, (pair.0, pair.1, rho))
}

/// `Φ(x;α)` over an arbitrary fixed path (open paths allowed; used by
/// integrand-level identity checks and negative controls).
pub fn eval_phi_on(
    path: &ContourPath,
    x: &PointConfig,
    alpha: &AlphaWeights,
    settings: &QuadSettings,
    cycle_tag: (usize, usize, f64),
) -> Result<HgfValue, HgfError> {
    let f = phi_integrand(x, alpha)?;
    run_integral(&f, path, settings, cycle_tag)
}

/// `F(z;α)` over the canonical cycle for a column pair.
pub fn eval_f(
    z: &ZMatrix,
    alpha: &AlphaWeights,
    pair: (usize, usize),
    settings: &QuadSettings,
    rho: f64,
) -> Result<HgfValue, HgfError> {
    if alpha.len() != z.len() {
        return Err(HgfError::BadAlpha("alpha and z have different lengths"));
    }
    let cycle = z_cycle(z, pair, rho)?;
    eval_f_on(&cycle.path, z, alpha, settings, (pair.0, pair.1, rho))
}

/// `F(z;α)` over an arbitrary fixed path.
pub fn eval_f_on(
    path: &ContourPath,
    z: &ZMatrix,
    alpha: &AlphaWeights,
    settings: &QuadSettings,
    cycle_tag: (usize, usize, f64),
) -> Result<HgfValue, HgfError> {
    let f = z_integrand(z, alpha)?;
    run_integral(&f, path, settings, cycle_tag)
}

/// Derivative of `Φ` under the integral sign: each requested coordinate
/// index multiplies the integrand by `α_p (u + x_p)^{-1}` with the
/// exponent current at the time of differentiation, so `∂_p^2` produces
/// `α_p (α_p - 1)`. At most two derivatives.
pub fn phi_partials_on(
    path: &ContourPath,
    x: &PointConfig,
    alpha: &AlphaWeights,
    derivs: &[usize],
    settings: &QuadSettings,
) -> Result<(C64, f64), HgfError> {
    assert!(derivs.len() <= 2, "at most second derivatives are analytic");
    let mut f = phi_integrand(x, alpha)?;
    let mut prefactor = C64::new(1.0, 0.0);
    let mut current: Vec<C64> = alpha.as_slice().to_vec();
    for &p in derivs {
        prefactor *= current[p];
        current[p] -= C64::new(1.0, 0.0);
        f.shift_exponent(p, -1);
    }
    let r = integrate_multivalued(&f, path, settings)?;
    Ok((prefactor * r.value, prefactor.norm() * r.error))
}

/// Convenience wrapper building the canonical cycle.
pub fn phi_partials(
    x: &PointConfig,
    alpha: &AlphaWeights,
    pair: (usize, usize),
    derivs: &[usize],
    settings: &QuadSettings,
    rho: f64,
) -> Result<(C64, f64), HgfError> {
    let cycle = phi_cycle(x, pair, rho)?;
    phi_partials_on(&cycle.path, x, alpha, derivs, settings)
}

/// Analytic `z`-derivative of `F`: differentiation with respect to
/// `z_{row,p}` multiplies the integrand by `α_p u^{row-1} / (z_{1,p} + z_{2,p} u)`.
/// `derivs` lists `(row, p)` with `row` in `{1, 2}`.
pub fn f_partials_on(
    path: &ContourPath,
    z: &ZMatrix,
    alpha: &AlphaWeights,
    derivs: &[(usize, usize)],
    settings: &QuadSettings,
) -> Result<(C64, f64), HgfError> {
    assert!(derivs.len() <= 2);
    let mut f = z_integrand(z, alpha)?;
    let mut prefactor = C64::new(1.0, 0.0);
    let mut current: Vec<C64> = alpha.as_slice().to_vec();
    for &(row, p) in derivs {
        assert!(row == 1 || row == 2);
        prefactor *= current[p];
        current[p] -= C64::new(1.0, 0.0);
        f.shift_exponent(p, -1);
        if row == 2 {
            f.weight_mul_u();
        }
    }
    let r = integrate_multivalued(&f, path, settings)?;
    Ok((prefactor * r.value, prefactor.norm() * r.error))
}

/// Residual report for the characterizing system of `F(z;α)`.
#[derive(Clone, Debug)]
pub struct HgsReport {
    /// `(p, q, residual)` for `□_{p,q} F = 0`, `p < q`.
    pub box_residuals: Vec<(usize, usize, f64)>,
    /// `(p, residual)` for `L_p F = α_p F`.
    pub euler_residuals: Vec<(usize, f64)>,
    /// Residuals for the four matrix units of gl(2) in row-major order
    /// (E11, E12, E21, E22); these hold only on closed cycles.
    pub gl2_residuals: [f64; 4],
}

impl HgsReport {
    pub fn max_box(&self) -> f64 {
        self.box_residuals
            .iter()
            .map(|&(_, _, r)| r)
            .fold(0.0, f64::max)
    }
    pub fn max_euler(&self) -> f64 {
        self.euler_residuals
            .iter()
            .map(|&(_, r)| r)
            .fold(0.0, f64::max)
    }
    pub fn max_gl2(&self) -> f64 {
        self.gl2_residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// Evaluate every residual of the hypergeometric system over a fixed path.
/// The `□` and Euler identities hold at the integrand level (any path);
/// the gl(2) identities integrate an exact differential and therefore
/// require a closed cycle.
pub fn hgs_residual(
    z: &ZMatrix,
    alpha: &AlphaWeights,
    path: &ContourPath,
    settings: &QuadSettings,
) -> Result<HgsReport, HgfError> {
    let n = z.len();
    let f_val = eval_f_on(path, z, alpha, settings, (0, 0, 0.0))?.value;

    // First derivatives d[row-1][p].
    let mut d = [vec![C64::new(0.0, 0.0); n], vec![C64::new(0.0, 0.0); n]];
    for row in [1usize, 2] {
        for p in 0..n {
            let (v, _) = f_partials_on(path, z, alpha, &[(row, p)], settings)?;
            d[row - 1][p] = v;
        }
    }

    let tiny = 1e-300;
    let mut box_residuals = Vec::new();
    for p in 0..n {
        for q in (p + 1)..n {
            let (s1, _) = f_partials_on(path, z, alpha, &[(1, p), (2, q)], settings)?;
            let (s2, _) = f_partials_on(path, z, alpha, &[(2, p), (1, q)], settings)?;
            let scale = s1.norm().max(s2.norm()).max(tiny);
            box_residuals.push((p, q, (s1 - s2).norm() / scale));
        }
    }

    let mut euler_residuals = Vec::new();
    for p in 0..n {
        let (z1p, z2p) = z.column(p);
        let lhs = z1p * d[0][p] + z2p * d[1][p];
        let rhs = alpha.get(p) * f_val;
        let scale = lhs.norm().max(rhs.norm()).max(tiny);
        euler_residuals.push((p, (lhs - rhs).norm() / scale));
    }

    // gl(2) matrix units: sum_p (Yz)_{1,p} d1p + (Yz)_{2,p} d2p + Tr(Y) F.
    let units = [
        ([[1.0, 0.0], [0.0, 0.0]], 1.0),
        ([[0.0, 1.0], [0.0, 0.0]], 0.0),
        ([[0.0, 0.0], [1.0, 0.0]], 0.0),
        ([[0.0, 0.0], [0.0, 1.0]], 1.0),
    ];
    let mut gl2_residuals = [0.0; 4];
    for (idx, (y, trace)) in units.iter().enumerate() {
        let mut val = C64::new(*trace, 0.0) * f_val;
        let mut scale = val.norm();
        for p in 0..n {
            let (z1p, z2p) = z.column(p);
            let yz1 = C64::new(y[0][0], 0.0) * z1p + C64::new(y[0][1], 0.0) * z2p;
            let yz2 = C64::new(y[1][0], 0.0) * z1p + C64::new(y[1][1], 0.0) * z2p;
            let term = yz1 * d[0][p] + yz2 * d[1][p];
            val += term;
            scale = scale.max(term.norm());
        }
        gl2_residuals[idx] = val.norm() / scale.max(tiny);
    }

    Ok(HgsReport {
        box_residuals,
        euler_residuals,
        gl2_residuals,
    })
}

/// Scale used for contiguity-style residuals: the larger of the two
/// compared values, floored away from zero.
fn pair_scale(a: C64, b: C64) -> f64 {
    a.norm().max(b.norm()).max(1e-300)
}

/// Residual of the contiguity relation
/// `(x_p - x_q) ∂_q Φ(α) + α_q Φ(α) = α_q Φ(α + e_p - e_q)`,
/// both sides over the same path.
pub fn contiguity_residual_on(
    path: &ContourPath,
    x: &PointConfig,
    alpha: &AlphaWeights,
    p: usize,
    q: usize,
    settings: &QuadSettings,
) -> Result<f64, HgfError> {
    if p == q {
        return Err(HgfError::BadPair { n: x.len() });
    }
    let phi = eval_phi_on(path, x, alpha, settings, (0, 0, 0.0))?.value;
    let (dq, _) = phi_partials_on(path, x, alpha, &[q], settings)?;
    let shifted = alpha.shifted(p, q, 1)?;
    let phi_shift = eval_phi_on(path, x, &shifted, settings, (0, 0, 0.0))?.value;
    let aq = alpha.get(q);
    let lhs = (x.get(p) - x.get(q)) * dq + aq * phi;
    let rhs = aq * phi_shift;
    Ok((lhs - rhs).norm() / pair_scale(phi, phi_shift))
}

/// Contiguity residual over the canonical cycle for `cycle_pair`.
pub fn contiguity_residual(
    x: &PointConfig,
    alpha: &AlphaWeights,
    p: usize,
    q: usize,
    cycle_pair: (usize, usize),
    settings: &QuadSettings,
    rho: f64,
) -> Result<f64, HgfError> {
    let cycle = phi_cycle(x, cycle_pair, rho)?;
    contiguity_residual_on(&cycle.path, x, alpha, p, q, settings)
}

/// Residual of `L_{p,q} F(z;α) = α_q F(z;α + e_p - e_q)` with
/// `L_{p,q} = z_{1,p} ∂_{1,q} + z_{2,p} ∂_{2,q}`, same-path comparison.
pub fn contiguity_residual_z_on(
    path: &ContourPath,
    z: &ZMatrix,
    alpha: &AlphaWeights,
    p: usize,
    q: usize,
    settings: &QuadSettings,
) -> Result<f64, HgfError> {
    if p == q {
        return Err(HgfError::BadPair { n: z.len() });
    }
    let (d1q, _) = f_partials_on(path, z, alpha, &[(1, q)], settings)?;
    let (d2q, _) = f_partials_on(path, z, alpha, &[(2, q)], settings)?;
    let shifted = alpha.shifted(p, q, 1)?;
    let f_shift = eval_f_on(path, z, &shifted, settings, (0, 0, 0.0))?.value;
    let f_val = eval_f_on(path, z, alpha, settings, (0, 0, 0.0))?.value;
    let (z1p, z2p) = z.column(p);
    let lhs = z1p * d1q + z2p * d2q;
    let rhs = alpha.get(q) * f_shift;
    Ok((lhs - rhs).norm() / pair_scale(f_val, f_shift))
}

/// Residual of the torus covariance `F(zh;α) = χ(h;α) F(z;α)` with
/// `χ(h;α) = Π h_j^{α_j}` (principal powers). Column scaling does not move
/// the branch points, so both sides share one cycle; keep the `h_j` in the
/// right half-plane to stay on the principal sheet.
pub fn covariance_h_residual(
    z: &ZMatrix,
    alpha: &AlphaWeights,
    h: &[C64],
    pair: (usize, usize),
    settings: &QuadSettings,
    rho: f64,
) -> Result<f64, HgfError> {
    let cycle = z_cycle(z, pair, rho)?;
    let zh = z.scaled_columns(h)?;
    let f_zh = eval_f_on(&cycle.path, &zh, alpha, settings, (pair.0, pair.1, rho))?.value;
    let f_z = eval_f_on(&cycle.path, z, alpha, settings, (pair.0, pair.1, rho))?.value;
    let mut chi = C64::new(1.0, 0.0);
    for (j, hj) in h.iter().enumerate() {
        chi *= (alpha.get(j) * hj.ln()).exp();
    }
    let rhs = chi * f_z;
    Ok((f_zh - rhs).norm() / pair_scale(f_zh, rhs))
}

/// Outcome of a covariance or pullback comparison whose two sides may
/// differ by a locally constant branch factor.
#[derive(Clone, Debug)]
pub struct RatioComparison {
    /// `|lhs - rhs| / scale`; meaningful for branch-safe transformations.
    pub residual: f64,
    /// `lhs / rhs`; constant across configurations for a fixed transform.
    pub ratio: C64,
}

/// `F(gz;α)` against `(det g)^{-1} F(z;α)`, the cycle rebuilt around the
/// transformed branch points.
pub fn covariance_gl2(
    z: &ZMatrix,
    alpha: &AlphaWeights,
    g: &[[C64; 2]; 2],
    pair: (usize, usize),
    settings: &QuadSettings,
    rho: f64,
) -> Result<RatioComparison, HgfError> {
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    if det.norm() < 1e-14 {
        return Err(HgfError::SingularMatrix);
    }
    let gz = z.left_mul(g)?;
    let f_gz = eval_f(&gz, alpha, pair, settings, rho)?.value;
    let f_z = eval_f(z, alpha, pair, settings, rho)?.value;
    let rhs = f_z / det;
    Ok(RatioComparison {
        residual: (f_gz - rhs).norm() / pair_scale(f_gz, rhs),
        ratio: f_gz / rhs,
    })
}

/// Moebius pullback identity
/// `Φ(x;α) = Π_k (c x_k + d)^{α_k} Φ(x';α)`, `x'_k = (a x_k + b)/(c x_k + d)`,
/// for `g` in SL(2). For transformations that cross branch cuts the ratio
/// (not the residual) is the meaningful output.
pub fn sl2_pullback(
    x: &PointConfig,
    alpha: &AlphaWeights,
    g: &[[C64; 2]; 2],
    pair: (usize, usize),
    settings: &QuadSettings,
    rho: f64,
) -> Result<RatioComparison, HgfError> {
    let (xp, prefactor) = moebius_data(x, alpha, g)?;
    let lhs = eval_phi(x, alpha, pair, settings, rho)?.value;
    let rhs = prefactor * eval_phi(&xp, alpha, pair, settings, rho)?.value;
    Ok(RatioComparison {
        residual: (lhs - rhs).norm() / pair_scale(lhs, rhs),
        ratio: lhs / rhs,
    })
}

fn moebius_data(
    x: &PointConfig,
    alpha: &AlphaWeights,
    g: &[[C64; 2]; 2],
) -> Result<(PointConfig, C64), HgfError> {
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    if (det - C64::new(1.0, 0.0)).norm() > 1e-12 {
        return Err(HgfError::SingularMatrix);
    }
    let (a, b, c, d) = (g[0][0], g[0][1], g[1][0], g[1][1]);
    let mut xp = Vec::with_capacity(x.len());
    let mut prefactor = C64::new(1.0, 0.0);
    for k in 0..x.len() {
        let denom = c * x.get(k) + d;
        if denom.norm() < 1e-12 {
            return Err(HgfError::MoebiusPole(k));
        }
        xp.push((a * x.get(k) + b) / denom);
        prefactor *= (alpha.get(k) * denom.ln()).exp();
    }
    Ok((PointConfig::new(xp)?, prefactor))
}

/// Value, first derivatives and mixed second derivative of the pulled-back
/// solution `ũ(x) = Π_k (c x_k + d)^{α_k} Φ(x';α)` at `x`, by the chain
/// rule through `phi_partials` at `x'`. Feeds the check that `ũ` still
/// solves the EPD pair equations.
pub fn sl2_transformed_second_order_data(
    x: &PointConfig,
    alpha: &AlphaWeights,
    g: &[[C64; 2]; 2],
    p: usize,
    q: usize,
    pair: (usize, usize),
    settings: &QuadSettings,
    rho: f64,
) -> Result<(C64, C64, C64, C64), HgfError> {
    assert!(p != q);
    let (xp_cfg, prefactor) = moebius_data(x, alpha, g)?;
    let (_, _, c, d) = (g[0][0], g[0][1], g[1][0], g[1][1]);
    let cycle = phi_cycle(&xp_cfg, pair, rho)?;
    let tag = (pair.0, pair.1, rho);
    let phi = eval_phi_on(&cycle.path, &xp_cfg, alpha, settings, tag)?.value;
    let (phi_p, _) = phi_partials_on(&cycle.path, &xp_cfg, alpha, &[p], settings)?;
    let (phi_q, _) = phi_partials_on(&cycle.path, &xp_cfg, alpha, &[q], settings)?;
    let (phi_pq, _) = phi_partials_on(&cycle.path, &xp_cfg, alpha, &[p, q], settings)?;

    // Jacobian dx'_p/dx_p = det g / (c x_p + d)^2 = 1/(c x_p + d)^2.
    let den_p = c * x.get(p) + d;
    let den_q = c * x.get(q) + d;
    let lp = alpha.get(p) * c / den_p;
    let lq = alpha.get(q) * c / den_q;
    let jp = C64::new(1.0, 0.0) / (den_p * den_p);
    let jq = C64::new(1.0, 0.0) / (den_q * den_q);

    let u = prefactor * phi;
    let up = lp * u + prefactor * phi_p * jp;
    let uq = lq * u + prefactor * phi_q * jq;
    let upq = lp * uq + lq * prefactor * phi_p * jp + prefactor * phi_pq * jp * jq;
    Ok((u, up, uq, upq))
}
