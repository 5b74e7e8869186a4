use std::f64::consts::PI;

use dispherical_core::coords::PhysicalParams;
use dispherical_core::kinematics::{
    arcsin_family, time_along_trajectory, trace_time_locus, transit_time, transit_time_eta,
};
use dispherical_core::trajectory::{
    trace_trajectory, Classification, MotionConstant, TraceControls, Trajectory, TurningPoint,
};
use dispherical_core::wavefield::Source;
use proptest::prelude::*;

fn params() -> PhysicalParams {
    PhysicalParams::default()
}

fn c(x: f64) -> MotionConstant {
    MotionConstant::new(x).unwrap()
}

fn trace(s: Source, x: f64) -> Trajectory {
    trace_trajectory(s, &c(x), &params(), &TraceControls::default()).unwrap()
}

fn confined_5() -> f64 {
    -(PI / 18.0).sin()
}

/// Nonzero constants from both sides.
const CONSTANTS: [f64; 8] = [-0.7, -0.4, -0.173648, -0.05, 0.02, 0.0980171, 0.3, 0.9];

fn oracle_eta_form(xi: f64, eta: f64, ea: f64, p: &PhysicalParams) -> f64 {
    let (x2, e2) = (xi * xi, eta * eta);
    let d = x2 + e2 + (x2 - e2) * (p.ka() * eta).cos();
    (1.0 - 2.0 / d) * p.mass() * xi * eta * p.separation() / (p.hbar() * p.wavenumber() * ea)
}

#[test]
fn primary_form_matches_direct_evaluation() {
    let p = params();
    let ea = confined_5();
    let t = transit_time_eta(1.2, 0.5, &c(ea), &p).unwrap().t;
    assert!((t - oracle_eta_form(1.2, 0.5, ea, &p)).abs() <= 1e-15);
    assert!((t - 1.25e-3).abs() < 1e-5);
}

#[test]
fn zero_time_set_on_the_axis() {
    let p = params();
    let ka = p.ka();
    let mut zeros = vec![-1.0, 0.0, 1.0];
    let mut n = 1.0;
    while 2.0 * PI * n / ka < 1.0 {
        zeros.extend([2.0 * PI * n / ka, -2.0 * PI * n / ka]);
        n += 1.0;
    }
    for &x in &CONSTANTS {
        for &e in &zeros {
            let t = transit_time_eta(1.0, e, &c(x), &p).unwrap().t;
            assert!(t.abs() <= 1e-15, "{x} eta={e}: {t:e}");
        }
        for j in 1..2000 {
            let e = -1.0 + j as f64 / 1000.0;
            let gap = zeros
                .iter()
                .map(|z| (e - z).abs())
                .fold(f64::INFINITY, f64::min);
            if gap > 1e-6 {
                assert!(
                    transit_time_eta(1.0, e, &c(x), &p).unwrap().t != 0.0,
                    "{x} eta={e}"
                );
            }
        }
    }
}

#[test]
fn confined_traces_arrive_with_nil_transit() {
    let p = params();
    for s in [Source::Upper, Source::Lower] {
        for &x in &CONSTANTS {
            let t = trace(s, x);
            if t.classification != Classification::Confined {
                continue;
            }
            let end = t.samples.last().unwrap().point;
            assert!(end.is_focus() && end.eta == -s.eta());
            let te = transit_time(&end, &t.constant, &p).unwrap().t;
            assert!(te.abs() <= 1e-6, "{s:?} {x}: {te:e}");
        }
    }
}

#[test]
fn confined_example_times_by_hemisphere() {
    let p = params();
    let t = trace(Source::Upper, confined_5());
    let times = time_along_trajectory(&t, &p).unwrap();
    let foci = [1.0, 0.82674, 0.41337, 0.0, -0.41337, -0.82674, -1.0];
    for f in foci {
        let hit = t
            .samples
            .iter()
            .zip(&times)
            .filter(|(q, _)| q.point.xi == 1.0 && (q.point.eta - f).abs() < 1e-5)
            .collect::<Vec<_>>();
        assert!(!hit.is_empty(), "focus {f} not visited");
        for (_, ts) in hit {
            assert!(ts.time.t.abs() <= 1e-6, "focus {f}: {:e}", ts.time.t);
        }
    }
    // same hemisphere as the source never negative, opposite never positive
    for (q, ts) in t.samples.iter().zip(&times) {
        if q.point.eta > 0.0 {
            assert!(ts.time.t >= 0.0, "{:?}: {:e}", q.point, ts.time.t);
        } else if q.point.eta < 0.0 {
            assert!(ts.time.t <= 0.0, "{:?}: {:e}", q.point, ts.time.t);
        }
    }
}

#[test]
fn free_traces_run_forward_in_time() {
    let p = params();
    for s in [Source::Upper, Source::Lower] {
        for &x in &CONSTANTS {
            let t = trace(s, x);
            if t.classification != Classification::Free {
                continue;
            }
            let times = time_along_trajectory(&t, &p).unwrap();
            for ts in &times[1..] {
                assert!(
                    ts.time.t > 0.0,
                    "{s:?} {x}: sample {} t={:e}",
                    ts.index,
                    ts.time.t
                );
            }
        }
    }
}

/// Arclength between a direction flip and a turning point; a passage through infinity
/// spans the sample pair on both sides of the jump.
fn flip_distance(t: &Trajectory, flip: usize, turn: &TurningPoint) -> f64 {
    let i = turn.sample_index;
    if turn.at_infinity && (flip == i || flip == i + 1) {
        return 0.0;
    }
    (t.samples[flip].arclength - t.samples[i].arclength).abs()
}

#[test]
fn direction_flips_pair_with_turning_points() {
    let p = params();
    // at an irregular point the time extremum sits where the trace leaves the axis, not at the xi-maximum
    let tol = 0.15;
    for s in [Source::Upper, Source::Lower] {
        for &x in &CONSTANTS {
            let t = trace(s, x);
            let times = time_along_trajectory(&t, &p).unwrap();
            let flips: Vec<usize> = times
                .windows(2)
                .filter(|w| w[0].direction != w[1].direction)
                .map(|w| w[1].index)
                .collect();
            let turns = &t.turning_points;
            let mut used: Option<usize> = None;
            for &f in &flips {
                let (j, d) = turns
                    .iter()
                    .enumerate()
                    .map(|(j, q)| (j, flip_distance(&t, f, q)))
                    .min_by(|u, v| u.1.total_cmp(&v.1))
                    .unwrap_or_else(|| panic!("{s:?} {x}: flip {f} without turning points"));
                assert!(
                    d <= tol,
                    "{s:?} {x}: flip {f} is {d} from the nearest turning point"
                );
                assert!(
                    used.map_or(true, |u| j > u),
                    "{s:?} {x}: two flips share turning point {j}"
                );
                used = Some(j);
            }
            if t.classification == Classification::Confined {
                assert_eq!(flips.len(), turns.len(), "{s:?} {x}");
            } else {
                assert!(flips.len() <= turns.len(), "{s:?} {x}");
            }
        }
    }
}

#[test]
fn zero_time_locus_is_the_focal_set() {
    let p = params();
    let family = arcsin_family(37).unwrap();
    let locus = trace_time_locus(0.0, &family, &p, &TraceControls::default()).unwrap();
    let allowed = [-1.0, -0.82674, -0.41337, 0.0, 0.41337, 0.82674, 1.0];
    assert!(!locus.points.is_empty());
    for q in &locus.points {
        let d = allowed
            .iter()
            .map(|z| (q.point.eta - z).abs())
            .fold(f64::INFINITY, f64::min);
        assert!(d <= 1e-5, "{:?}", q.point);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn primary_form_is_odd_in_eta(
        xi in 1.0f64..60.0,
        eta in -1.0f64..1.0,
        ea in prop_oneof![-0.999f64..-1e-6, 1e-6f64..0.999],
    ) {
        let p = params();
        let k = c(ea);
        let up = transit_time_eta(xi, eta, &k, &p).unwrap().t;
        let down = transit_time_eta(xi, -eta, &k, &p).unwrap().t;
        prop_assert!((up + down).abs() <= 1e-12 * up.abs().max(1.0));
    }
}
