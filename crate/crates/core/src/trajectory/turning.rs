//! Location and classification of turning points along a traced trajectory.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::coords::{PhysicalParams, ProlatePoint};

use super::{curve::MeridianCurve, Trajectory, TurningKind, TurningPoint};

/// Largest `eta` of a destructive hyperboloid `ka eta = (2n - 1) pi` below one.
fn last_destructive(ka: f64) -> Option<f64> {
    if ka <= PI {
        return None;
    }
    let n = libm::floor((ka / PI + 1.0) / 2.0);
    let mut e = (2.0 * n - 1.0) * PI / ka;
    if e >= 1.0 {
        e -= 2.0 * PI / ka;
    }
    (e > 0.0).then_some(e)
}

fn near_reinforcement(eta: f64, ka: f64) -> bool {
    let m = libm::round(eta * ka / (2.0 * PI));
    (eta - 2.0 * PI * m / ka).abs() <= PI / (4.0 * ka)
}

/// Refines an extremum of `sign * xi` on the curve through three consecutive samples.
fn refine(curve: &MeridianCurve, m: [(f64, f64); 3], sign: f64, a: f64) -> Option<(f64, f64)> {
    let at = |t: f64| {
        let (p, q, u) = if t < 0.5 {
            (m[0], m[1], 2.0 * t)
        } else {
            (m[1], m[2], 2.0 * t - 1.0)
        };
        let g = (p.0 + u * (q.0 - p.0), p.1 + u * (q.1 - p.1));
        let h = libm::hypot(q.0 - p.0, q.1 - p.1);
        curve.project(g, h.max(1e-300), 1e-13, 60)
    };
    let score = |t: f64| at(t).map(|p| sign * ProlatePoint::from_meridian(p.0, p.1, a).xi);
    let r = 0.5 * (libm::sqrt(5.0) - 1.0);
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let mut f1 = score(x1)?;
    let mut f2 = score(x2)?;
    for _ in 0..60 {
        if f1 > f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = score(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = score(x2)?;
        }
    }
    at(0.5 * (lo + hi))
}

/// Turning points in sample order.
///
/// Extrema of `xi` are refined on the curve; axis touches and passages
/// through infinity are taken at their exact samples.
pub fn find_turning_points(t: &Trajectory, params: &PhysicalParams) -> Vec<TurningPoint> {
    let mut out = Vec::new();
    if t.constant.is_axial() || t.samples.len() < 3 {
        return out;
    }
    let Ok(curve) = MeridianCurve::new(&t.constant, params) else {
        return out;
    };
    let a = params.separation();
    let ka = params.ka();
    let irregular_from = last_destructive(ka).map_or(0.0, |e| e + PI / (4.0 * ka));
    let m = t.meridian(a);
    let s = &t.samples;
    let n = s.len();
    let crosses = |i: usize| t.passages.contains(&i);
    for i in 1..n - 1 {
        if crosses(i - 1) || crosses(i) {
            if crosses(i) {
                out.push(TurningPoint {
                    kind: TurningKind::RegularDestructive,
                    point: s[i].point,
                    sample_index: i,
                    at_infinity: true,
                });
            }
            continue;
        }
        let (x0, x1, x2) = (s[i - 1].point.xi, s[i].point.xi, s[i + 1].point.xi);
        let (e0, e1, e2) = (s[i - 1].point.eta, s[i].point.eta, s[i + 1].point.eta);
        let on_axis = |x: f64| x - 1.0 < 1e-12;
        if on_axis(x1) {
            let line = 2.0 * PI * libm::round(e1 * ka / (2.0 * PI)) / ka;
            let kind = if e1.abs() < 1e-12 {
                // an inflexion through the origin changes sheet and is not a turn
                (s[i - 1].point.sigma == s[i + 1].point.sigma).then_some(TurningKind::Fold)
            } else if line != 0.0 && (e1 - line).abs() < 1e-9 && e1.abs() < 1.0 {
                Some(TurningKind::ReinforcementFocus)
            } else {
                None
            };
            if let Some(kind) = kind {
                out.push(TurningPoint {
                    kind,
                    point: s[i].point,
                    sample_index: i,
                    at_infinity: false,
                });
            }
            continue;
        }
        if on_axis(x0) || on_axis(x2) {
            continue;
        }
        let is_max = x1 > x0 && x1 >= x2;
        let is_min = x1 < x0 && x1 <= x2;
        if is_max || is_min {
            let sign = if is_max { 1.0 } else { -1.0 };
            let at = refine(&curve, [m[i - 1], m[i], m[i + 1]], sign, a).unwrap_or(m[i]);
            let point = ProlatePoint::from_meridian(at.0, at.1, a);
            let kind = if is_max {
                if point.eta.abs() > irregular_from {
                    TurningKind::Irregular
                } else {
                    TurningKind::RegularDestructive
                }
            } else if near_reinforcement(point.eta, ka) {
                TurningKind::Reinforcement
            } else {
                TurningKind::Fold
            };
            out.push(TurningPoint {
                kind,
                point,
                sample_index: i,
                at_infinity: false,
            });
            continue;
        }
        let eta_max = e1 > e0 && e1 >= e2;
        let eta_min = e1 < e0 && e1 <= e2;
        if eta_max || eta_min {
            out.push(TurningPoint {
                kind: TurningKind::Fold,
                point: s[i].point,
                sample_index: i,
                at_infinity: false,
            });
        }
    }
    out
}
