//! Adaptive Gauss-Kronrod quadrature along piecewise paths with continuous
//! per-factor branch tracking.
//!
//! Each segment is cut into steps short enough that no factor's argument
//! can turn by more than `theta_max` across the step (chord length bounded
//! by the distance to the nearest branch point). Within a step the branch
//! state is anchored at the step start, so argument continuation is
//! unambiguous at every quadrature node regardless of bisection depth.

use super::{principal_arg, ContourError, ContourPath, MultivaluedIntegrand, QuadSettings, Segment};
use num_complex::Complex64 as C64;

/// 15-point Gauss-Kronrod abscissae (positive half) and weights, QUADPACK.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Kronrod value and embedded Gauss value of `f` over `[a, b]`.
fn gk15<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64) -> (C64, C64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, &x) in XGK.iter().enumerate().take(7) {
        let dx = half * x;
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kron += (f1 + f2) * WGK[j];
        if j % 2 == 1 {
            gauss += (f1 + f2) * WG[j / 2];
        }
    }
    (kron * half, gauss * half)
}

/// Result of a path integral: value, accumulated error estimate, and the
/// net argument change of each factor along the path (zero on a closed
/// commutator cycle).
#[derive(Clone, Debug)]
pub struct QuadResult {
    pub value: C64,
    pub error: f64,
    pub arg_drift: Vec<f64>,
}

/// Minimum admissible fraction of a segment for one branch-tracking step.
const MIN_STEP: f64 = 1e-7;
/// Clearance between the path and any branch point, relative to scale.
const CLEARANCE_REL: f64 = 1e-9;

/// Integrate a multivalued integrand along a path, continuing every
/// factor's argument continuously from its principal value at the path
/// start.
pub fn integrate_multivalued(
    f: &MultivaluedIntegrand,
    path: &ContourPath,
    settings: &QuadSettings,
) -> Result<QuadResult, ContourError> {
    settings.validate()?;
    let factors = f.factors();
    let scale = f.scale().max(path.length());
    let clearance = CLEARANCE_REL * scale;
    let total_len = path.length().max(f64::MIN_POSITIVE);

    let start = path.start();
    let mut args: Vec<f64> = factors
        .iter()
        .map(|fac| principal_arg(fac.value_at(start)))
        .collect();
    let init_args = args.clone();

    // Effective chord bound uses a slightly damped sin(theta_max) so nodes
    // inside a step keep positive distance from every branch point.
    let chord_factor = settings.theta_max.sin().min(0.9);

    let mut total = C64::new(0.0, 0.0);
    let mut err_total = 0.0_f64;
    let mut subdivisions = 0usize;

    for seg in path.segments() {
        let sweep = match seg {
            Segment::Arc { theta0, theta1, .. } => (theta1 - theta0).abs(),
            _ => 0.0,
        };
        let mut t0 = 0.0_f64;
        while t0 < 1.0 {
            let u0 = seg.point(t0);
            let mut d_min = f64::INFINITY;
            for (k, fac) in factors.iter().enumerate() {
                if let Some(root) = fac.root() {
                    let d = (u0 - root).norm();
                    if d < clearance {
                        return Err(ContourError::PathTooClose {
                            index: k,
                            dist: d,
                            min: clearance,
                        });
                    }
                    d_min = d_min.min(d);
                }
            }

            let mut h = 1.0 - t0;
            if sweep > 0.0 {
                h = h.min(settings.theta_max / sweep);
            }
            loop {
                let u1 = seg.point(t0 + h);
                let chord = (u1 - u0).norm();
                if chord <= chord_factor * d_min || h <= MIN_STEP {
                    break;
                }
                h *= 0.5;
            }
            if h <= MIN_STEP {
                // The step bottomed out: some branch point pins the walk.
                let mut index = 0;
                let mut dist = f64::INFINITY;
                for (k, fac) in factors.iter().enumerate() {
                    if let Some(root) = fac.root() {
                        let d = (u0 - root).norm();
                        if d < dist {
                            dist = d;
                            index = k;
                        }
                    }
                }
                return Err(ContourError::PathTooClose {
                    index,
                    dist,
                    min: clearance,
                });
            }

            let anchor_vals: Vec<C64> = factors.iter().map(|fac| fac.value_at(u0)).collect();
            let anchor_args = args.clone();
            let eval = |t: f64| -> C64 {
                let u = seg.point(t);
                let mut exponent_sum = C64::new(0.0, 0.0);
                for (k, fac) in factors.iter().enumerate() {
                    let v = fac.value_at(u);
                    let theta = anchor_args[k] + (v / anchor_vals[k]).arg();
                    let log_v = C64::new(0.5 * v.norm_sqr().ln(), theta);
                    exponent_sum += fac.exponent * log_v;
                }
                exponent_sum.exp() * f.weight_at(u) * seg.velocity(t)
            };

            let step_len = seg.length() * h;
            let local_abs = settings.abs_tol * (step_len / total_len).max(1e-3);
            let (val, err) = adaptive(
                &eval,
                t0,
                t0 + h,
                local_abs,
                settings,
                &mut subdivisions,
            )?;
            total += val;
            err_total += err;

            let u1 = seg.point(t0 + h);
            for (k, fac) in factors.iter().enumerate() {
                let v1 = fac.value_at(u1);
                args[k] += (v1 / anchor_vals[k]).arg();
            }
            t0 += h;
        }
    }

    let arg_drift = args
        .iter()
        .zip(&init_args)
        .map(|(a, b)| a - b)
        .collect();
    Ok(QuadResult {
        value: total,
        error: err_total,
        arg_drift,
    })
}

/// Stack-based adaptive bisection with the (K15, G7) error estimate.
fn adaptive<F: Fn(f64) -> C64>(
    f: &F,
    a: f64,
    b: f64,
    abs_tol: f64,
    settings: &QuadSettings,
    subdivisions: &mut usize,
) -> Result<(C64, f64), ContourError> {
    let mut stack = vec![(a, b, abs_tol)];
    let mut total = C64::new(0.0, 0.0);
    let mut err_total = 0.0;
    while let Some((lo, hi, tol)) = stack.pop() {
        let (kron, gauss) = gk15(f, lo, hi);
        let err = (kron - gauss).norm();
        let width = hi - lo;
        if err <= tol.max(settings.rel_tol * kron.norm()) || width < 1e-12 {
            total += kron;
            err_total += err;
            continue;
        }
        *subdivisions += 1;
        if *subdivisions > settings.max_subdivisions {
            return Err(ContourError::NonConvergence(*subdivisions));
        }
        let mid = 0.5 * (lo + hi);
        stack.push((lo, mid, 0.5 * tol));
        stack.push((mid, hi, 0.5 * tol));
    }
    Ok((total, err_total))
}

/// Winding number of a path around `point`, by the argument principle.
pub fn winding_number(
    path: &ContourPath,
    point: C64,
    settings: &QuadSettings,
) -> Result<f64, ContourError> {
    let f = MultivaluedIntegrand::from_branch_points(&[(point, C64::new(-1.0, 0.0))])?;
    let r = integrate_multivalued(&f, path, settings)?;
    Ok((r.value / C64::new(0.0, 2.0 * std::f64::consts::PI)).re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour::{build_pochhammer, segment_regularization_factor, LinFactor};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn settings() -> QuadSettings {
        QuadSettings::default()
    }

    #[test]
    fn gk15_is_exact_on_high_degree_polynomials() {
        // Kronrod 15 integrates degree <= 22 exactly; Gauss 7 degree <= 13.
        for deg in [13usize, 20, 22] {
            let f = |t: f64| c(t.powi(deg as i32), 0.0);
            let (kron, gauss) = gk15(&f, -1.0, 1.0);
            let exact = if deg % 2 == 0 {
                2.0 / (deg as f64 + 1.0)
            } else {
                0.0
            };
            assert!(
                (kron.re - exact).abs() < 1e-14,
                "Kronrod inexact at degree {deg}"
            );
            if deg <= 13 {
                assert!((gauss.re - exact).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn residue_of_one_over_u() {
        let f = MultivaluedIntegrand::from_branch_points(&[(c(0.0, 0.0), c(-1.0, 0.0))]).unwrap();
        let path = ContourPath::circle(c(0.0, 0.0), 1.0);
        let r = integrate_multivalued(&f, &path, &settings()).unwrap();
        assert!((r.value - c(0.0, 2.0 * PI)).norm() < 1e-12);
        assert!(r.error < 1e-12);
    }

    #[test]
    fn entire_integrand_over_closed_path_vanishes() {
        // (u - 0)^2 (u - 1)^1 with an extra polynomial weight: entire, so
        // any closed contour integral is zero.
        let mut f = MultivaluedIntegrand::from_branch_points(&[
            (c(0.0, 0.0), c(2.0, 0.0)),
            (c(1.0, 0.0), c(1.0, 0.0)),
        ])
        .unwrap();
        f.set_weight(vec![c(0.3, 0.1), c(0.0, 0.0), c(1.0, 0.0)]);
        let path = ContourPath::circle(c(0.4, 0.2), 2.5);
        let r = integrate_multivalued(&f, &path, &settings()).unwrap();
        assert!(r.value.norm() < 1e-11);
    }

    #[test]
    fn orientation_reversal_negates_value() {
        let f = MultivaluedIntegrand::from_branch_points(&[(c(0.2, -0.1), c(-1.0, 0.0))]).unwrap();
        let path = ContourPath::circle(c(0.0, 0.0), 1.0);
        let fwd = integrate_multivalued(&f, &path, &settings()).unwrap();
        let bwd = integrate_multivalued(&f, &path.reversed(), &settings()).unwrap();
        assert!((fwd.value + bwd.value).norm() < 1e-12);
    }

    #[test]
    fn path_through_branch_point_rejected() {
        let f = MultivaluedIntegrand::from_branch_points(&[(c(0.5, 0.0), c(-0.5, 0.0))]).unwrap();
        let path = ContourPath::line(c(0.0, 0.0), c(1.0, 0.0));
        assert!(matches!(
            integrate_multivalued(&f, &path, &settings()),
            Err(ContourError::PathTooClose { .. })
        ));
    }

    #[test]
    fn pochhammer_beta_half_half() {
        // (u)^(-1/2) (u-1)^(-1/2) around (0,1). With principal anchoring at
        // the base point the continued segment integral is -i pi, and the
        // cycle value is the regularization factor 4 times that.
        let ai = c(-0.5, 0.0);
        let aj = c(-0.5, 0.0);
        let f = MultivaluedIntegrand::from_branch_points(&[(c(0.0, 0.0), ai), (c(1.0, 0.0), aj)])
            .unwrap();
        let cyc = build_pochhammer(c(0.0, 0.0), c(1.0, 0.0), &[], 0.2).unwrap();
        let r = integrate_multivalued(&f, &cyc.path, &settings()).unwrap();
        let expect = segment_regularization_factor(ai, aj) * c(0.0, -PI);
        assert!(
            (r.value - expect).norm() < 1e-9 * expect.norm(),
            "got {:?}, want {:?}",
            r.value,
            expect
        );
        // Branch state returns to its starting sheet on the commutator.
        for d in &r.arg_drift {
            assert!(d.abs() < 1e-10);
        }
    }

    #[test]
    fn pochhammer_net_winding_is_zero() {
        let cyc = build_pochhammer(c(0.0, 0.0), c(1.0, 0.0), &[], 0.2).unwrap();
        for p in [c(0.0, 0.0), c(1.0, 0.0)] {
            let w = winding_number(&cyc.path, p, &settings()).unwrap();
            assert!(w.abs() < 1e-10, "net winding {w} around {p}");
        }
    }

    #[test]
    fn pochhammer_radius_deformation_invariance() {
        let ai = c(-0.37, 0.05);
        let aj = c(-0.61, -0.02);
        let f = MultivaluedIntegrand::from_branch_points(&[(c(0.0, 0.0), ai), (c(1.0, 0.0), aj)])
            .unwrap();
        let base = build_pochhammer(c(0.0, 0.0), c(1.0, 0.0), &[], 0.2).unwrap();
        let v0 = integrate_multivalued(&f, &base.path, &settings()).unwrap();
        for rho in [0.16, 0.24] {
            let cyc = build_pochhammer(c(0.0, 0.0), c(1.0, 0.0), &[], rho).unwrap();
            let v = integrate_multivalued(&f, &cyc.path, &settings()).unwrap();
            assert!(
                (v.value - v0.value).norm() < 1e-9 * v0.value.norm().max(1.0),
                "rho = {rho}"
            );
        }
    }

    #[test]
    fn single_valued_function_over_commutator_vanishes() {
        let cyc = build_pochhammer(c(0.0, 0.0), c(1.0, 0.0), &[c(3.0, 0.0)], 0.2).unwrap();
        let f = MultivaluedIntegrand::new(vec![LinFactor {
            a0: c(3.0, 0.0),
            a1: c(-1.0, 0.0),
            exponent: c(-1.0, 0.0),
        }])
        .unwrap();
        let r = integrate_multivalued(&f, &cyc.path, &settings()).unwrap();
        assert!(r.value.norm() < 1e-11);
    }
}
