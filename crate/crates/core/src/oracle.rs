//! Independent reference implementations used only by tests and pre-build
//! derivations: the Gauss series, tanh-sinh segment quadrature with
//! endpoint singularities, and central finite differences.
//!
//! Nothing in the production evaluation path calls into this module; the
//! two quadrature routes (tanh-sinh here, Gauss-Kronrod in `contour`) stay
//! independent so they can check each other.

use crate::contour::{principal_arg, MultivaluedIntegrand};
use num_complex::Complex64 as C64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("series did not converge within {0} terms")]
    SeriesNonConvergence(usize),
    #[error("series parameter c is (numerically) a non-positive integer")]
    CPole,
    #[error("series requires |x| < 1, got |x| = {0}")]
    OutsideDisk(f64),
    #[error("endpoint exponent has real part {0} <= -1 (divergent)")]
    EndpointTooSingular(f64),
    #[error("principal branch of factor {0} is discontinuous on the segment")]
    BranchCutCrossed(usize),
    #[error("tanh-sinh quadrature did not reach the requested tolerance")]
    QuadNonConvergence,
    #[error("evaluator failed at a stencil point")]
    StencilFailure,
}

/// Convergence controls for the Gauss series.
#[derive(Clone, Copy, Debug)]
pub struct SeriesSettings {
    pub max_terms: usize,
    pub tail_tol: f64,
}

impl Default for SeriesSettings {
    fn default() -> Self {
        SeriesSettings {
            max_terms: 4000,
            tail_tol: 1e-15,
        }
    }
}

/// Gauss hypergeometric series `sum_k (a)_k (b)_k / ((c)_k k!) x^k`,
/// `|x| < 1` only.
pub fn gauss_2f1(
    a: C64,
    b: C64,
    c: C64,
    x: C64,
    settings: &SeriesSettings,
) -> Result<C64, OracleError> {
    if x.norm() >= 1.0 {
        return Err(OracleError::OutsideDisk(x.norm()));
    }
    // c must stay away from 0, -1, -2, ... for the term recurrence.
    if c.im == 0.0 && c.re <= 0.0 && (c.re - c.re.round()).abs() < 1e-12 {
        return Err(OracleError::CPole);
    }
    let mut term = C64::new(1.0, 0.0);
    let mut sum = term;
    let mut small_streak = 0;
    for k in 0..settings.max_terms {
        let kf = k as f64;
        term = term * (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * x;
        sum += term;
        if term.norm() <= settings.tail_tol * sum.norm().max(1.0) {
            small_streak += 1;
            if small_streak >= 3 {
                return Ok(sum);
            }
        } else {
            small_streak = 0;
        }
    }
    Err(OracleError::SeriesNonConvergence(settings.max_terms))
}

/// How a factor sits relative to the integration segment.
enum FactorKind {
    EndpointP,
    EndpointQ,
    Generic,
    Constant,
}

/// Tanh-sinh (double-exponential) quadrature of a multivalued integrand
/// over the open segment from `p` to `q`, with every factor on its
/// pointwise principal branch.
///
/// Preconditions: exponents at the endpoints have real part > -1, and no
/// factor's principal cut crosses the open segment (factors lying exactly
/// on their cut with constant argument are fine).
pub fn segment_tanh_sinh(
    f: &MultivaluedIntegrand,
    p: C64,
    q: C64,
    tol: f64,
) -> Result<(C64, f64), OracleError> {
    let dir = q - p;
    let seg_len = dir.norm();
    let mut kinds = Vec::new();
    for (idx, fac) in f.factors().iter().enumerate() {
        let kind = match fac.root() {
            None => FactorKind::Constant,
            Some(r) => {
                if (r - p).norm() <= 1e-12 * seg_len {
                    if fac.exponent.re <= -1.0 {
                        return Err(OracleError::EndpointTooSingular(fac.exponent.re));
                    }
                    FactorKind::EndpointP
                } else if (r - q).norm() <= 1e-12 * seg_len {
                    if fac.exponent.re <= -1.0 {
                        return Err(OracleError::EndpointTooSingular(fac.exponent.re));
                    }
                    FactorKind::EndpointQ
                } else {
                    // Principal continuity: v(t) runs on a straight segment
                    // from v(p) to v(q); reject if it crosses the negative
                    // real axis transversally.
                    let v0 = fac.value_at(p);
                    let v1 = fac.value_at(q);
                    if (v0.im > 0.0) != (v1.im > 0.0) && v0.im != v1.im {
                        let t_star = v0.im / (v0.im - v1.im);
                        let re_star = v0.re + t_star * (v1.re - v0.re);
                        if re_star < 0.0 && v0.im != 0.0 && v1.im != 0.0 {
                            return Err(OracleError::BranchCutCrossed(idx));
                        }
                    }
                    FactorKind::Generic
                }
            }
        };
        kinds.push(kind);
    }

    // Integrand in the t-parametrization, evaluated from (t, 1-t) so the
    // endpoint factors stay accurate at double-exponential nodes.
    let eval = |t: f64, omt: f64| -> C64 {
        let u = p + dir * t;
        let mut exponent_sum = C64::new(0.0, 0.0);
        for (fac, kind) in f.factors().iter().zip(&kinds) {
            let log_v = match kind {
                FactorKind::Constant => {
                    let v = fac.a0;
                    C64::new(v.norm().ln(), principal_arg(v))
                }
                FactorKind::EndpointP => {
                    let d = fac.a1 * dir;
                    C64::new(d.norm().ln() + t.ln(), principal_arg(d))
                }
                FactorKind::EndpointQ => {
                    let d = -(fac.a1 * dir);
                    C64::new(d.norm().ln() + omt.ln(), principal_arg(d))
                }
                FactorKind::Generic => {
                    let v = fac.value_at(u);
                    C64::new(v.norm().ln(), principal_arg(v))
                }
            };
            exponent_sum += fac.exponent * log_v;
        }
        exponent_sum.exp() * f.weight_at(u)
    };

    // t = 1/(1 + e^{-2s}), s = (pi/2) sinh w; dt/dw = (pi/2) cosh w / (2 cosh^2 s).
    let node = |w: f64| -> (f64, f64, f64) {
        let s = std::f64::consts::FRAC_PI_2 * w.sinh();
        let t = 1.0 / (1.0 + (-2.0 * s).exp());
        let omt = 1.0 / (1.0 + (2.0 * s).exp());
        let ch = s.cosh();
        let weight = std::f64::consts::FRAC_PI_2 * w.cosh() / (2.0 * ch * ch);
        (t, omt, weight)
    };

    let max_level = 12;
    let w_max = 4.5_f64;
    let mut h = 1.0_f64;
    let mut total = {
        // Level 0: trapezoid over nodes k*h.
        let (t, omt, w) = node(0.0);
        let mut acc = eval(t, omt) * w;
        let mut k = 1;
        while (k as f64) * h <= w_max {
            let wk = k as f64 * h;
            for sign in [1.0, -1.0] {
                let (t, omt, w) = node(sign * wk);
                if w > 1e-320 && t > 0.0 && omt > 0.0 {
                    acc += eval(t, omt) * w;
                }
            }
            k += 1;
        }
        acc * h
    };
    let mut prev;
    let mut err = f64::INFINITY;
    for _level in 1..=max_level {
        prev = total;
        h *= 0.5;
        // Add the odd multiples of the new h.
        let mut acc = C64::new(0.0, 0.0);
        let mut k = 1;
        while (k as f64) * h <= w_max {
            let wk = k as f64 * h;
            for sign in [1.0, -1.0] {
                let (t, omt, w) = node(sign * wk);
                if w > 1e-320 && t > 0.0 && omt > 0.0 {
                    acc += eval(t, omt) * w;
                }
            }
            k += 2;
        }
        total = prev * 0.5 + acc * h;
        err = (total - prev).norm();
        if err <= tol * total.norm().max(1.0) && _level >= 4 {
            return Ok((total * dir, err * seg_len));
        }
    }
    if err <= 1e3 * tol * total.norm().max(1.0) {
        Ok((total * dir, err * seg_len))
    } else {
        Err(OracleError::QuadNonConvergence)
    }
}

/// Central finite difference of first order: `(f(x+h e_i) - f(x-h e_i)) / 2h`.
pub fn fd_partial<F>(
    evaluator: F,
    point: &[C64],
    coord: usize,
    step: f64,
) -> Result<C64, OracleError>
where
    F: Fn(&[C64]) -> Option<C64>,
{
    let mut plus = point.to_vec();
    plus[coord] += C64::new(step, 0.0);
    let mut minus = point.to_vec();
    minus[coord] -= C64::new(step, 0.0);
    let fp = evaluator(&plus).ok_or(OracleError::StencilFailure)?;
    let fm = evaluator(&minus).ok_or(OracleError::StencilFailure)?;
    Ok((fp - fm) / C64::new(2.0 * step, 0.0))
}

/// Central finite difference for second derivatives: mixed `(p != q)` by the
/// four-point stencil, repeated `(p == q)` by the three-point stencil.
pub fn fd_mixed<F>(
    evaluator: F,
    point: &[C64],
    p: usize,
    q: usize,
    step: f64,
) -> Result<C64, OracleError>
where
    F: Fn(&[C64]) -> Option<C64>,
{
    let h = C64::new(step, 0.0);
    if p == q {
        let f0 = evaluator(point).ok_or(OracleError::StencilFailure)?;
        let mut plus = point.to_vec();
        plus[p] += h;
        let mut minus = point.to_vec();
        minus[p] -= h;
        let fp = evaluator(&plus).ok_or(OracleError::StencilFailure)?;
        let fm = evaluator(&minus).ok_or(OracleError::StencilFailure)?;
        Ok((fp - f0 * 2.0 + fm) / C64::new(step * step, 0.0))
    } else {
        let mut pp = point.to_vec();
        pp[p] += h;
        pp[q] += h;
        let mut pm = point.to_vec();
        pm[p] += h;
        pm[q] -= h;
        let mut mp = point.to_vec();
        mp[p] -= h;
        mp[q] += h;
        let mut mm = point.to_vec();
        mm[p] -= h;
        mm[q] -= h;
        let fpp = evaluator(&pp).ok_or(OracleError::StencilFailure)?;
        let fpm = evaluator(&pm).ok_or(OracleError::StencilFailure)?;
        let fmp = evaluator(&mp).ok_or(OracleError::StencilFailure)?;
        let fmm = evaluator(&mm).ok_or(OracleError::StencilFailure)?;
        Ok((fpp - fpm - fmp + fmm) / C64::new(4.0 * step * step, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn real(x: f64) -> C64 {
        c(x, 0.0)
    }

    #[test]
    fn gauss_series_degenerate_cases() {
        let s = SeriesSettings::default();
        assert_eq!(
            gauss_2f1(real(0.7), real(1.3), real(2.1), real(0.0), &s).unwrap(),
            real(1.0)
        );
        assert_eq!(
            gauss_2f1(real(0.0), real(1.3), real(2.1), real(0.4), &s).unwrap(),
            real(1.0)
        );
        assert!(matches!(
            gauss_2f1(real(0.7), real(1.3), real(-2.0), real(0.4), &s),
            Err(OracleError::CPole)
        ));
        assert!(matches!(
            gauss_2f1(real(0.7), real(1.3), real(2.1), real(1.2), &s),
            Err(OracleError::OutsideDisk(_))
        ));
    }

    #[test]
    fn gauss_series_log_identity() {
        // 2F1(1,1;2;x) = -log(1-x)/x.
        let s = SeriesSettings::default();
        let x = 0.3;
        let got = gauss_2f1(real(1.0), real(1.0), real(2.0), real(x), &s).unwrap();
        let want = -(1.0 - x).ln() / x;
        assert!((got - real(want)).norm() < 1e-12);
    }

    #[test]
    fn tanh_sinh_plain_interval() {
        let f = MultivaluedIntegrand::from_branch_points(&[]).unwrap();
        let (v, _) = segment_tanh_sinh(&f, real(0.0), real(1.0), 1e-13).unwrap();
        assert!((v - real(1.0)).norm() < 1e-13);
    }

    #[test]
    fn tanh_sinh_beta_half_half_principal() {
        // Principal branches make (u-1)^(-1/2) = -i (1-u)^(-1/2) on (0,1),
        // so the principal-branch Beta(1/2,1/2) integral is -i pi.
        let f = MultivaluedIntegrand::from_branch_points(&[
            (real(0.0), real(-0.5)),
            (real(1.0), real(-0.5)),
        ])
        .unwrap();
        let (v, err) = segment_tanh_sinh(&f, real(0.0), real(1.0), 1e-13).unwrap();
        assert!((v - c(0.0, -PI)).norm() < 1e-12, "got {v}");
        assert!((v.norm() - PI).abs() < 1e-12);
        assert!(err < 1e-10);
    }

    #[test]
    fn tanh_sinh_rejects_divergent_endpoint() {
        let f = MultivaluedIntegrand::from_branch_points(&[(real(0.0), real(-1.2))]).unwrap();
        assert!(matches!(
            segment_tanh_sinh(&f, real(0.0), real(1.0), 1e-12),
            Err(OracleError::EndpointTooSingular(_))
        ));
    }

    #[test]
    fn euler_integral_matches_gauss_series() {
        // Integral_0^1 u^{a-1}(1-u)^{c-a-1}(1-x u)^{-b} du
        //   = B(a, c-a) 2F1(a, b; c; x).
        // Both sides are produced by oracles only: the Beta factor is the
        // tanh-sinh value of the two-endpoint integrand, and the phases of
        // the principal branches cancel in the ratio.
        let (a, b, cc, x) = (0.4, 0.7, 1.9, 0.25);
        let euler = MultivaluedIntegrand::from_branch_points(&[
            (real(0.0), real(a - 1.0)),
            (real(1.0), real(cc - a - 1.0)),
            (real(1.0 / x), real(-b)),
        ])
        .unwrap();
        let (v_euler, _) = segment_tanh_sinh(&euler, real(0.0), real(1.0), 1e-13).unwrap();
        let beta = MultivaluedIntegrand::from_branch_points(&[
            (real(0.0), real(a - 1.0)),
            (real(1.0), real(cc - a - 1.0)),
        ])
        .unwrap();
        let (v_beta, _) = segment_tanh_sinh(&beta, real(0.0), real(1.0), 1e-13).unwrap();
        let f21 = gauss_2f1(real(a), real(b), real(cc), real(x), &SeriesSettings::default())
            .unwrap();
        // (u - 1/x)^{-b} = e^{-i pi b} x^b (1 - x u)^{-b} on the segment.
        let phase = (c(0.0, -PI) * b).exp() * real(x.powf(b));
        let want = v_beta * phase * f21;
        assert!(
            (v_euler - want).norm() < 1e-10 * want.norm(),
            "euler {v_euler} vs {want}"
        );
    }

    #[test]
    fn fd_first_and_mixed() {
        let exp_eval = |pt: &[C64]| Some(pt[0].exp());
        let d = fd_partial(exp_eval, &[real(0.0)], 0, 1e-5).unwrap();
        assert!((d - real(1.0)).norm() < 1e-9);

        // xy is bilinear, so the stencil is exact up to cancellation noise;
        // a larger step keeps that noise below 1e-9.
        let xy = |pt: &[C64]| Some(pt[0] * pt[1]);
        let m = fd_mixed(xy, &[real(0.3), real(-0.7)], 0, 1, 1e-3).unwrap();
        assert!((m - real(1.0)).norm() < 1e-9);
    }
}
