use std::f64::consts::SQRT_2;

use dispherical_core::action::unwrapped_closed_form;
use dispherical_core::coords::{prolate_to_cyl, CylPoint, PhysicalParams, Point, ProlatePoint};
use dispherical_core::wavefield::{
    dispherical_amplitude, erasure_fields, psi_dispherical, psi_point_source, Hemisphere, Source,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn params() -> PhysicalParams {
    PhysicalParams::default()
}

fn wrap(x: f64) -> f64 {
    let t = x.rem_euclid(std::f64::consts::TAU);
    if t > std::f64::consts::PI {
        t - std::f64::consts::TAU
    } else {
        t
    }
}

#[test]
fn erasure_identity_on_grid() {
    let p = params();
    let n = 100;
    let mut checked = 0;
    for j in 0..n {
        let eta = -1.0 + 2.0 * j as f64 / (n - 1) as f64;
        for i in 0..n {
            let xi = 1.0 + 5.0 * i as f64 / (n - 1) as f64;
            let q = ProlatePoint::new(xi, eta);
            if q.is_focus() {
                assert!(erasure_fields(&q, &p).is_err());
                continue;
            }
            let e = erasure_fields(&q, &p).unwrap();
            let s1 = psi_point_source(&q, Source::Lower, &p).unwrap().value();
            let s2 = psi_point_source(&q, Source::Upper, &p).unwrap().value();
            assert!(
                (e.psi_y.value() - (s1 - s2) / SQRT_2).norm() <= 1e-12 * s1.norm().max(s2.norm())
            );
            let (expected, sign) = match e.hemisphere {
                Hemisphere::Lower => (s1 * SQRT_2, 1.0),
                Hemisphere::Upper => (-s2 * SQRT_2, -1.0),
            };
            assert_eq!(e.hemisphere == Hemisphere::Upper, eta > 0.0);
            assert!(
                (e.psi_l.value() - (s1 + s2) * (sign / SQRT_2)).norm()
                    <= 1e-12 * (s1 + s2).norm().max(1e-300)
            );
            assert!(
                (e.combined.value() - expected).norm() <= 1e-12 * expected.norm(),
                "{xi} {eta}"
            );
            checked += 1;
        }
    }
    assert_eq!(checked, n * n - 2);
}

#[test]
fn near_source_phase_follows_the_near_source() {
    let p = params();
    let k = p.wavenumber();
    for i in 1..=50 {
        let r2 = 1e-3 * i as f64 / 50.0;
        for j in 0..12 {
            let th = std::f64::consts::PI * j as f64 / 11.0;
            let c = CylPoint::new(r2 * th.sin(), 0.5 + r2 * th.cos());
            let f = c.focal_distances(1.0);
            let s = psi_dispherical(&c, &p).unwrap();
            assert!(
                wrap(s.phase_principal - k * f.r2).abs() <= 2.5 * f.r2 / f.r1,
                "{r2} {th}"
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn polar_and_cartesian_forms_agree(xi in 1.0f64..6.0, eta in -1.0f64..1.0) {
        let p = params();
        let q = ProlatePoint::new(xi, eta);
        prop_assume!(!q.is_focus());
        let f = q.focal_distances(1.0);
        let sum = psi_point_source(&q, Source::Lower, &p).unwrap().value()
            + psi_point_source(&q, Source::Upper, &p).unwrap().value();
        let amp = dispherical_amplitude(f.r1, f.r2, p.wavenumber());
        let polar = Complex64::from_polar(amp, unwrapped_closed_form(xi, eta, p.ka()));
        prop_assert!((polar - sum).norm() <= 1e-12 * sum.norm());
        let d = psi_dispherical(&prolate_to_cyl(&q, 1.0), &p).unwrap();
        prop_assert!((d.value() - sum).norm() <= 1e-12 * sum.norm().max(1.0));
    }

    #[test]
    fn no_zeros(xi in 1.0f64..6.0, eta in -1.0f64..1.0) {
        let p = params();
        let q = ProlatePoint::new(xi, eta);
        prop_assume!(!q.is_focus());
        let f = q.focal_distances(1.0);
        let amp = psi_dispherical(&q, &p).unwrap().amplitude;
        let bound = (1.0 / f.r1 - 1.0 / f.r2).abs();
        prop_assert!(amp > 0.0);
        prop_assert!(amp >= bound * (1.0 - 1e-12));
    }
}
