//! Complex path quadrature for multivalued integrands with continuous
//! branch tracking, and Pochhammer double-loop cycles.
//!
//! An integrand is a product of complex powers of linear factors
//! `(a0 + a1 u)^α` times a polynomial weight. Along a path the argument of
//! each factor is continued continuously (never re-principalized), which
//! makes integrals over the commutator cycles well defined for non-integer
//! exponents.

mod quad;

pub use quad::{integrate_multivalued, winding_number, QuadResult};

use num_complex::Complex64 as C64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ContourError {
    #[error("path segments are not endpoint-continuous at junction {0}")]
    Discontinuous(usize),
    #[error("branch points must be pairwise distinct")]
    CoincidentBranchPoints,
    #[error("loop radius fraction rho = {0} outside (0, 1/2)")]
    BadRadiusFraction(f64),
    #[error("branch point {0} obstructs the connector corridor (crowded configuration)")]
    Crowded(usize),
    #[error("path passes within {dist:e} of branch point {index} (minimum {min:e})")]
    PathTooClose { index: usize, dist: f64, min: f64 },
    #[error("quadrature did not converge within {0} subdivisions")]
    NonConvergence(usize),
    #[error("invalid quadrature settings: {0}")]
    BadSettings(&'static str),
    #[error("linear factor has a1 = 0 and a0 = 0 (identically zero)")]
    ZeroFactor,
    #[error("empty path")]
    EmptyPath,
}

/// One linear factor `(a0 + a1 u)^exponent` of a multivalued integrand.
#[derive(Clone, Copy, Debug)]
pub struct LinFactor {
    pub a0: C64,
    pub a1: C64,
    pub exponent: C64,
}

impl LinFactor {
    /// Factor `(u - b)^alpha` with branch point `b`.
    pub fn from_branch_point(b: C64, alpha: C64) -> Self {
        LinFactor {
            a0: -b,
            a1: C64::new(1.0, 0.0),
            exponent: alpha,
        }
    }

    /// The zero of the linear form, if any.
    pub fn root(&self) -> Option<C64> {
        if self.a1.norm() == 0.0 {
            None
        } else {
            Some(-self.a0 / self.a1)
        }
    }

    pub fn value_at(&self, u: C64) -> C64 {
        self.a0 + self.a1 * u
    }
}

/// Product of complex-power linear factors and a polynomial weight.
///
/// Integer exponent shifts (the simple poles appearing in derivative
/// integrands) are folded into the factor exponents; the branch structure
/// only depends on the fractional parts.
#[derive(Clone, Debug)]
pub struct MultivaluedIntegrand {
    factors: Vec<LinFactor>,
    /// Ascending coefficients of the polynomial weight; empty means 1.
    weight: Vec<C64>,
}

impl MultivaluedIntegrand {
    pub fn new(factors: Vec<LinFactor>) -> Result<Self, ContourError> {
        let mut roots: Vec<C64> = Vec::new();
        for f in &factors {
            if f.a1.norm() == 0.0 {
                if f.a0.norm() == 0.0 {
                    return Err(ContourError::ZeroFactor);
                }
                continue;
            }
            roots.push(f.root().unwrap());
        }
        for i in 0..roots.len() {
            for j in (i + 1)..roots.len() {
                if (roots[i] - roots[j]).norm() == 0.0 {
                    return Err(ContourError::CoincidentBranchPoints);
                }
            }
        }
        Ok(MultivaluedIntegrand {
            factors,
            weight: Vec::new(),
        })
    }

    /// Integrand `prod_k (u - b_k)^{alpha_k}`.
    pub fn from_branch_points(points: &[(C64, C64)]) -> Result<Self, ContourError> {
        Self::new(
            points
                .iter()
                .map(|&(b, a)| LinFactor::from_branch_point(b, a))
                .collect(),
        )
    }

    pub fn factors(&self) -> &[LinFactor] {
        &self.factors
    }

    /// Shift the exponent of factor `k` by an integer (a pole or zero at
    /// that branch point).
    pub fn shift_exponent(&mut self, k: usize, by: i32) {
        self.factors[k].exponent += C64::new(by as f64, 0.0);
    }

    /// Multiply the polynomial weight by `u`.
    pub fn weight_mul_u(&mut self) {
        if self.weight.is_empty() {
            self.weight = vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
        } else {
            self.weight.insert(0, C64::new(0.0, 0.0));
        }
    }

    /// Replace the polynomial weight (ascending coefficients).
    pub fn set_weight(&mut self, coeffs: Vec<C64>) {
        self.weight = coeffs;
    }

    pub(crate) fn weight_at(&self, u: C64) -> C64 {
        if self.weight.is_empty() {
            return C64::new(1.0, 0.0);
        }
        let mut acc = C64::new(0.0, 0.0);
        for c in self.weight.iter().rev() {
            acc = acc * u + c;
        }
        acc
    }

    /// Geometric scale of the branch-point configuration.
    pub(crate) fn scale(&self) -> f64 {
        let mut m: f64 = 0.0;
        for f in &self.factors {
            if let Some(r) = f.root() {
                m = m.max(r.norm());
            }
        }
        m.max(1.0)
    }
}

/// Tolerances and step control for the adaptive path quadrature.
#[derive(Clone, Copy, Debug)]
pub struct QuadSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Maximum argument turn of any factor across one branch-tracking step.
    pub theta_max: f64,
}

impl Default for QuadSettings {
    fn default() -> Self {
        QuadSettings {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
            theta_max: std::f64::consts::FRAC_PI_3,
        }
    }
}

impl QuadSettings {
    pub fn validate(&self) -> Result<(), ContourError> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(ContourError::BadSettings("tolerances must be positive"));
        }
        if self.theta_max <= 0.0 || self.theta_max > std::f64::consts::FRAC_PI_2 {
            return Err(ContourError::BadSettings("theta_max must lie in (0, pi/2]"));
        }
        if self.max_subdivisions == 0 {
            return Err(ContourError::BadSettings("max_subdivisions must be positive"));
        }
        Ok(())
    }
}

/// Default loop-radius fraction for Pochhammer cycles.
pub const DEFAULT_RHO: f64 = 0.2;

/// A line segment or circular arc in the complex plane.
#[derive(Clone, Copy, Debug)]
pub enum Segment {
    Line {
        start: C64,
        end: C64,
    },
    /// Arc around `center`; runs from angle `theta0` to `theta1` (radians,
    /// counterclockwise when `theta1 > theta0`).
    Arc {
        center: C64,
        radius: f64,
        theta0: f64,
        theta1: f64,
    },
}

impl Segment {
    pub fn start(&self) -> C64 {
        match *self {
            Segment::Line { start, .. } => start,
            Segment::Arc {
                center,
                radius,
                theta0,
                ..
            } => center + C64::from_polar(radius, theta0),
        }
    }

    pub fn end(&self) -> C64 {
        match *self {
            Segment::Line { end, .. } => end,
            Segment::Arc {
                center,
                radius,
                theta1,
                ..
            } => center + C64::from_polar(radius, theta1),
        }
    }

    /// Point at parameter `t` in [0, 1].
    pub fn point(&self, t: f64) -> C64 {
        match *self {
            Segment::Line { start, end } => start + (end - start) * t,
            Segment::Arc {
                center,
                radius,
                theta0,
                theta1,
            } => center + C64::from_polar(radius, theta0 + (theta1 - theta0) * t),
        }
    }

    /// du/dt at parameter `t`.
    pub fn velocity(&self, t: f64) -> C64 {
        match *self {
            Segment::Line { start, end } => end - start,
            Segment::Arc {
                center: _,
                radius,
                theta0,
                theta1,
            } => {
                let sweep = theta1 - theta0;
                let theta = theta0 + sweep * t;
                C64::from_polar(radius, theta) * C64::new(0.0, sweep)
            }
        }
    }

    pub fn length(&self) -> f64 {
        match *self {
            Segment::Line { start, end } => (end - start).norm(),
            Segment::Arc {
                radius,
                theta0,
                theta1,
                ..
            } => radius * (theta1 - theta0).abs(),
        }
    }

    pub fn reversed(&self) -> Segment {
        match *self {
            Segment::Line { start, end } => Segment::Line {
                start: end,
                end: start,
            },
            Segment::Arc {
                center,
                radius,
                theta0,
                theta1,
            } => Segment::Arc {
                center,
                radius,
                theta0: theta1,
                theta1: theta0,
            },
        }
    }
}

/// Piecewise path with endpoint-continuous segments.
#[derive(Clone, Debug)]
pub struct ContourPath {
    segments: Vec<Segment>,
    closed: bool,
}

/// Relative junction tolerance when validating continuity.
const JUNCTION_TOL: f64 = 1e-9;

impl ContourPath {
    pub fn new(segments: Vec<Segment>) -> Result<Self, ContourError> {
        if segments.is_empty() {
            return Err(ContourError::EmptyPath);
        }
        let scale = segments
            .iter()
            .map(|s| s.start().norm().max(s.end().norm()))
            .fold(1.0_f64, f64::max);
        for (i, pair) in segments.windows(2).enumerate() {
            if (pair[0].end() - pair[1].start()).norm() > JUNCTION_TOL * scale {
                return Err(ContourError::Discontinuous(i + 1));
            }
        }
        let first = segments.first().unwrap().start();
        let last = segments.last().unwrap().end();
        let closed = (last - first).norm() <= JUNCTION_TOL * scale;
        Ok(ContourPath { segments, closed })
    }

    pub fn line(start: C64, end: C64) -> Self {
        ContourPath {
            segments: vec![Segment::Line { start, end }],
            closed: false,
        }
    }

    /// Counterclockwise circle starting (and ending) at angle 0.
    pub fn circle(center: C64, radius: f64) -> Self {
        ContourPath {
            segments: vec![Segment::Arc {
                center,
                radius,
                theta0: 0.0,
                theta1: 2.0 * std::f64::consts::PI,
            }],
            closed: true,
        }
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn start(&self) -> C64 {
        self.segments.first().unwrap().start()
    }

    pub fn end(&self) -> C64 {
        self.segments.last().unwrap().end()
    }

    pub fn length(&self) -> f64 {
        self.segments.iter().map(Segment::length).sum()
    }

    pub fn reversed(&self) -> Self {
        ContourPath {
            segments: self.segments.iter().rev().map(Segment::reversed).collect(),
            closed: self.closed,
        }
    }

    /// Concatenate, validating the junction.
    pub fn join(mut self, other: ContourPath) -> Result<Self, ContourError> {
        self.segments.extend(other.segments);
        ContourPath::new(self.segments)
    }

    /// The path with its final segment removed (used to build deliberately
    /// broken cycles in negative controls).
    pub fn without_last_segment(&self) -> Result<Self, ContourError> {
        let mut segs = self.segments.clone();
        segs.pop();
        ContourPath::new(segs)
    }
}

/// The commutator double loop around a pair of branch points.
///
/// Loop order: positively around `b_j`, positively around `b_i`, then
/// negatively around each in the same order. With branch arguments anchored
/// at the principal value at the base point, the integral over the cycle of
/// `(u-b_i)^{α_i} (u-b_j)^{α_j} g(u)` equals
/// `(1 - e^{2πiα_i})(1 - e^{2πiα_j})` times the branch-continued integral
/// over the open segment from `b_i` to `b_j`.
#[derive(Clone, Debug)]
pub struct PochhammerCycle {
    pub b_i: C64,
    pub b_j: C64,
    pub rho: f64,
    pub radius: f64,
    pub base_point: C64,
    pub path: ContourPath,
}

/// Build the canonical Pochhammer cycle around `(b_i, b_j)` clearing the
/// `others` branch points. `rho` is the loop-radius fraction of the
/// smallest relevant distance.
pub fn build_pochhammer(
    b_i: C64,
    b_j: C64,
    others: &[C64],
    rho: f64,
) -> Result<PochhammerCycle, ContourError> {
    if !(rho > 0.0 && rho < 0.5) {
        return Err(ContourError::BadRadiusFraction(rho));
    }
    let sep = (b_j - b_i).norm();
    if sep == 0.0 {
        return Err(ContourError::CoincidentBranchPoints);
    }
    let mut d_min = sep;
    for &o in others {
        d_min = d_min.min((o - b_i).norm()).min((o - b_j).norm());
        if d_min == 0.0 {
            return Err(ContourError::CoincidentBranchPoints);
        }
    }
    let radius = rho * d_min;
    let e = (b_j - b_i) / sep;
    // Corridor check: the connectors run parallel to the axis at offset
    // radius/2; any other branch point near that strip blocks construction.
    for (idx, &o) in others.iter().enumerate() {
        let w = (o - b_i) / e; // axis coordinates: Re along, Im across
        let t = w.re / sep;
        let margin = 2.0 * radius / sep;
        if t > -margin && t < 1.0 + margin && w.im.abs() < 2.0 * radius {
            return Err(ContourError::Crowded(idx));
        }
    }

    let offset = C64::new(0.0, 1.0) * e * (radius / 2.0);
    let base = (b_i + b_j) / 2.0 + offset;
    // Entry points where the offset connector line meets each loop circle.
    let along = (3.0_f64).sqrt() / 2.0 * radius;
    let entry_i = b_i + e * along + offset;
    let entry_j = b_j - e * along + offset;

    let loop_around = |center: C64, entry: C64, ccw: bool| -> Vec<Segment> {
        let theta0 = (entry - center).arg();
        let sweep = if ccw {
            2.0 * std::f64::consts::PI
        } else {
            -2.0 * std::f64::consts::PI
        };
        vec![
            Segment::Line {
                start: base,
                end: entry,
            },
            Segment::Arc {
                center,
                radius,
                theta0,
                theta1: theta0 + sweep,
            },
            Segment::Line {
                start: entry,
                end: base,
            },
        ]
    };

    let mut segments = Vec::new();
    segments.extend(loop_around(b_j, entry_j, true));
    segments.extend(loop_around(b_i, entry_i, true));
    segments.extend(loop_around(b_j, entry_j, false));
    segments.extend(loop_around(b_i, entry_i, false));
    let path = ContourPath::new(segments)?;
    debug_assert!(path.is_closed());
    Ok(PochhammerCycle {
        b_i,
        b_j,
        rho,
        radius,
        base_point: base,
        path,
    })
}

/// The Pochhammer-to-segment regularization factor
/// `(1 - e^{2πi α_i})(1 - e^{2πi α_j})`.
pub fn segment_regularization_factor(alpha_i: C64, alpha_j: C64) -> C64 {
    let one = C64::new(1.0, 0.0);
    let tau = C64::new(0.0, 2.0 * std::f64::consts::PI);
    (one - (tau * alpha_i).exp()) * (one - (tau * alpha_j).exp())
}

/// Exponents this close to an integer make the cycle pairing degenerate.
pub fn exponent_near_integer(alpha: C64) -> bool {
    let d = (alpha.re - alpha.re.round()).hypot(alpha.im);
    d < 1e-8
}

/// Principal argument with `-0.0` imaginary parts normalized to `+0.0`, so
/// values on the negative real axis consistently get `+pi`.
pub(crate) fn principal_arg(z: C64) -> f64 {
    let im = if z.im == 0.0 { 0.0 } else { z.im };
    im.atan2(z.re)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn path_continuity_is_enforced() {
        let bad = vec![
            Segment::Line {
                start: c(0.0, 0.0),
                end: c(1.0, 0.0),
            },
            Segment::Line {
                start: c(2.0, 0.0),
                end: c(3.0, 0.0),
            },
        ];
        assert!(matches!(
            ContourPath::new(bad),
            Err(ContourError::Discontinuous(1))
        ));
    }

    #[test]
    fn circle_is_closed_and_reversible() {
        let p = ContourPath::circle(c(0.0, 0.0), 1.0);
        assert!(p.is_closed());
        let r = p.reversed();
        assert!(r.is_closed());
        assert!((r.start() - p.end()).norm() < 1e-14);
    }

    #[test]
    fn pochhammer_geometry_basics() {
        let cyc = build_pochhammer(c(0.0, 0.0), c(1.0, 0.0), &[], 0.2).unwrap();
        assert!(cyc.path.is_closed());
        assert!((cyc.radius - 0.2).abs() < 1e-15);
        // Base point sits above the axis, offset by radius/2.
        assert!((cyc.base_point - c(0.5, 0.1)).norm() < 1e-14);
        // All twelve segments clear both branch points by ~radius.
        for seg in cyc.path.segments() {
            for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
                let u = seg.point(t);
                assert!((u - cyc.b_i).norm() > 0.9 * cyc.radius);
                assert!((u - cyc.b_j).norm() > 0.9 * cyc.radius);
            }
        }
    }

    #[test]
    fn pochhammer_blocked_midpoint_is_crowded() {
        let res = build_pochhammer(c(0.0, 0.0), c(1.0, 0.0), &[c(0.5, 0.0)], 0.2);
        assert!(matches!(res, Err(ContourError::Crowded(0))));
    }

    #[test]
    fn rho_bounds_are_checked() {
        assert!(matches!(
            build_pochhammer(c(0.0, 0.0), c(1.0, 0.0), &[], 0.6),
            Err(ContourError::BadRadiusFraction(_))
        ));
    }

    #[test]
    fn regularization_factor_values() {
        let half = c(-0.5, 0.0);
        let f = segment_regularization_factor(half, half);
        assert!((f - c(4.0, 0.0)).norm() < 1e-14);
        let int = c(2.0, 0.0);
        assert!(segment_regularization_factor(int, half).norm() < 1e-12);
        assert!(exponent_near_integer(int));
        assert!(!exponent_near_integer(half));
    }
}
