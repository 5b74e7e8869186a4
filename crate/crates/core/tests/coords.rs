use dispherical_core::coords::{
    cyl_to_prolate, prolate_to_cyl, wave_vector_components, CylPoint, Point, ProlatePoint, Sheet,
};
use proptest::prelude::*;

fn grid(n: usize, lo: f64, hi: f64) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
}

#[test]
fn round_trip_on_grid() {
    for a in [1.0, 0.37, 4.0] {
        for xi in grid(200, 1.0, 10.0) {
            for eta in grid(200, -1.0, 1.0) {
                let p = ProlatePoint::new(xi, eta);
                let q = cyl_to_prolate(&prolate_to_cyl(&p, a), a);
                assert!((q.xi - xi).abs() <= 1e-10, "xi {xi} {eta} -> {}", q.xi);
                assert!((q.eta - eta).abs() <= 1e-10, "eta {xi} {eta} -> {}", q.eta);
            }
        }
    }
}

#[test]
fn focal_distance_families_agree() {
    let a = 1.0;
    for xi in grid(200, 1.0, 10.0) {
        for eta in grid(200, -1.0, 1.0) {
            let p = ProlatePoint::new(xi, eta);
            let f = p.focal_distances(a);
            let g = prolate_to_cyl(&p, a).focal_distances(a);
            let scale = f.r1.max(f.r2);
            assert!((f.r1 - g.r1).abs() <= 1e-12 * scale.max(1.0), "{xi} {eta}");
            assert!((f.r2 - g.r2).abs() <= 1e-12 * scale.max(1.0), "{xi} {eta}");
        }
    }
}

#[test]
fn wave_vector_pythagoras_and_angle() {
    let k = 15.2;
    for i in 0..1000 {
        let eta_a = -1.0 + 2.0 * (i as f64 + 0.5) / 1000.0;
        let w = wave_vector_components(k, eta_a).unwrap();
        assert!((w.k_z * w.k_z + w.k_rho * w.k_rho - k * k).abs() <= 1e-12 * k * k);
        if w.k_z != 0.0 {
            let mut th = (w.k_rho / w.k_z).atan();
            if w.k_z < 0.0 {
                th += std::f64::consts::PI;
            }
            assert!((th - eta_a.acos()).abs() <= 1e-12, "{eta_a}");
            assert!((th - w.theta).abs() <= 1e-12);
        }
    }
}

#[test]
fn negative_sheet_is_the_azimuthal_mirror() {
    let p = ProlatePoint::new(2.0, 0.3).on_sheet(Sheet::Negative);
    let c = prolate_to_cyl(&p, 1.0);
    assert!((c.phi - std::f64::consts::PI).abs() < 1e-15);
    assert!(p.rho_signed(1.0) < 0.0);
    let back = ProlatePoint::from_meridian(p.rho_signed(1.0), c.z, 1.0);
    assert_eq!(back.sigma, Sheet::Negative);
    assert!((back.xi - 2.0).abs() < 1e-12 && (back.eta - 0.3).abs() < 1e-12);
}

proptest! {
    #[test]
    fn cyl_round_trip(rho in 0.0..20.0f64, z in -20.0..20.0f64, a in 0.1..5.0f64) {
        let c = CylPoint::new(rho, z);
        let back = prolate_to_cyl(&cyl_to_prolate(&c, a), a);
        let scale = 1.0 + rho.abs() + z.abs();
        prop_assert!((back.z - z).abs() <= 1e-10 * scale);
        // rho is recovered through sqrt((xi^2 - 1)(1 - eta^2)) and loses digits on the axis
        prop_assert!((back.rho - rho).abs() <= 1e-7 * scale);
    }

    #[test]
    fn prolate_round_trip(xi in 1.0..10.0f64, eta in -1.0..=1.0f64) {
        let p = ProlatePoint::new(xi, eta);
        let q = cyl_to_prolate(&prolate_to_cyl(&p, 1.0), 1.0);
        prop_assert!((q.xi - xi).abs() <= 1e-10);
        prop_assert!((q.eta - eta).abs() <= 1e-10);
    }
}
