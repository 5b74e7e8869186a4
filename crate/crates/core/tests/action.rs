use std::f64::consts::{PI, TAU};

use dispherical_core::action::{
    critical_merge_level, find_wrinkles, principal_cyl, principal_prolate,
    reduced_action_unwrapped, trace_action_contour, unwrap_along_path, unwrapped_closed_form,
    ActionLevel, ContourControls, Topology, Window,
};
use dispherical_core::coords::{prolate_to_cyl, PhysicalParams, ProlatePoint};
use proptest::prelude::*;

fn params() -> PhysicalParams {
    PhysicalParams::default()
}

/// Distance between two angles on the arctangent branch, modulo pi.
fn branch_gap(x: f64, y: f64) -> f64 {
    let d = (x - y).rem_euclid(PI);
    d.min(PI - d)
}

#[test]
fn mirror_plane_action_is_linear() {
    let p = params();
    let anchor = 0.5 * p.ka() - TAU;
    for i in 0..=500 {
        let xi = 1.0 + 9.0 * i as f64 / 500.0;
        let w = reduced_action_unwrapped(&ProlatePoint::new(xi, 0.0), &p)
            .unwrap()
            .unwrapped;
        let line = anchor + 0.5 * p.ka() * (xi - 1.0);
        assert!((w - line).abs() <= 1e-9 * line.abs().max(1.0), "{xi}");
    }
}

#[test]
fn contour_vertices_lie_on_their_level() {
    let p = params();
    for i in 1..=10 {
        let level = ActionLevel::h(0.5 * i as f64);
        let c = trace_action_contour(level, &Window::default(), &ContourControls::default(), &p)
            .unwrap();
        assert!(!c.branches.is_empty());
        for b in &c.branches {
            for v in &b.vertices {
                assert!(v.residual.abs() <= 1e-8);
                let w = unwrapped_closed_form(v.point.xi, v.point.eta, p.ka());
                assert!((w - level.in_hbar()).abs() <= 1e-8 * level.unit.in_hbar());
            }
        }
    }
}

#[test]
fn wrinkles_sit_on_destructive_hyperboloids() {
    for (k, expect) in [
        (15.2, vec![0.207, 0.620]),
        (24.3, vec![0.129, 0.388, 0.646, 0.905]),
    ] {
        let p = params().with_wavenumber(k).unwrap();
        let c = trace_action_contour(
            ActionLevel::h(3.0),
            &Window::default(),
            &ContourControls::default(),
            &p,
        )
        .unwrap();
        let w = find_wrinkles(&c, &p);
        assert_eq!(w.len(), expect.len(), "k={k}: {w:?}");
        for (got, want) in w.iter().zip(&expect) {
            assert!((got - want).abs() <= 0.02, "k={k}: {w:?}");
        }
    }
}

#[test]
fn merge_level_is_the_origin_action() {
    let p = params();
    let m = critical_merge_level(&Window::default(), &ContourControls::default(), &p).unwrap();
    assert!((m.unwrapped - (0.5 * p.ka() - TAU)).abs() <= 1e-6);
    let below = trace_action_contour(
        ActionLevel::hbar(m.unwrapped - 1e-3),
        &Window::default(),
        &ContourControls::default(),
        &p,
    )
    .unwrap();
    assert_eq!(below.topology, Topology::DisjointPair);
}

#[test]
fn unwrapping_is_path_independent() {
    let p = params();
    let end = ProlatePoint::new(3.7, 0.61);
    let exact = unwrapped_closed_form(end.xi, end.eta, p.ka());
    // deterministic pseudo-random detours through the window
    let mut s: u64 = 0x9e37_79b9_7f4a_7c15;
    let mut next = || {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        (s >> 11) as f64 / (1u64 << 53) as f64
    };
    for _ in 0..10 {
        let mut path = Vec::new();
        for _ in 0..3 {
            path.push(ProlatePoint::new(1.0 + 5.0 * next(), -0.95 + 1.9 * next()));
        }
        path.push(end);
        let w = unwrap_along_path(&path, &p).unwrap().unwrapped;
        assert!((w - exact).abs() <= 1e-9, "{path:?}: {w} vs {exact}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn prolate_and_cylindrical_forms_agree(xi in 1.0f64..6.0, eta in -1.0f64..1.0) {
        let p = params();
        let q = ProlatePoint::new(xi, eta);
        prop_assume!(!q.is_focus());
        let c = prolate_to_cyl(&q, 1.0);
        let a = principal_prolate(xi, eta, &p);
        let b = principal_cyl(c.rho, c.z, &p);
        prop_assert!(branch_gap(a, b) <= 1e-10, "{} vs {}", a, b);
    }

    #[test]
    fn action_is_even_in_eta(xi in 1.0f64..6.0, eta in 0.0f64..1.0) {
        let ka = params().ka();
        let d = unwrapped_closed_form(xi, eta, ka) - unwrapped_closed_form(xi, -eta, ka);
        prop_assert!(d.abs() <= 1e-12);
    }
}
