use std::f64::consts::PI;

use eqlyap_core::dynamics::{integrate, integrate_dense, orbit_distance, Method, PhaseState};
use eqlyap_core::{catalog_entry, parse_potential};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn rotation_commutes_with_ring3d_flow(
        theta in 0.0f64..(2.0 * PI),
        du in prop::collection::vec(-0.1f64..0.1, 3),
        dv in prop::collection::vec(-0.1f64..0.1, 3),
        t in 0.5f64..6.0,
    ) {
        let e = catalog_entry("ring3d").unwrap();
        let (c, s) = (theta.cos(), theta.sin());
        let rot = |x: &[f64]| vec![c * x[0] - s * x[1], s * x[0] + c * x[1], x[2]];
        let s0 = PhaseState::new(vec![1.0 + du[0], du[1], du[2]], dv.clone());
        let a = integrate(&e.potential, &PhaseState::new(rot(&s0.u), rot(&s0.v)), t, 1500, Method::Yoshida4).unwrap();
        let b = integrate(&e.potential, &s0, t, 1500, Method::Yoshida4).unwrap();
        prop_assert!(a.distance(&PhaseState::new(rot(&b.u), rot(&b.v))) < 1e-8);
    }

    #[test]
    fn verlet_energy_error_is_bounded(x in -1.0f64..1.0, v in -1.0f64..1.0) {
        let p = parse_potential("u1^2/2 + u1^4/4", 1).unwrap();
        let tr = integrate_dense(&p, &PhaseState::new(vec![x], vec![v]), 10.0, 4000, Method::Verlet, 1).unwrap();
        // second-order method, h = 2.5e-3
        prop_assert!(tr.energy_drift() < 1e-4);
    }

    #[test]
    fn flow_is_reversible(x in -0.5f64..0.5, y in -0.5f64..0.5, vx in -0.5f64..0.5) {
        let e = catalog_entry("harmonic2").unwrap();
        let s0 = PhaseState::new(vec![x, y], vec![vx, 0.2]);
        let s1 = integrate(&e.potential, &s0, 3.0, 1000, Method::Yoshida4).unwrap();
        let back = integrate(&e.potential, &PhaseState::new(s1.u.clone(), s1.v.iter().map(|w| -w).collect()), 3.0, 1000, Method::Yoshida4).unwrap();
        let back = PhaseState::new(back.u, back.v.iter().map(|w| -w).collect());
        prop_assert!(back.distance(&s0) < 1e-11);
    }

    #[test]
    fn orbit_distance_is_group_invariant(theta in 0.0f64..(2.0 * PI), r in 0.5f64..1.5, z in -0.5f64..0.5) {
        let e = catalog_entry("ring3d").unwrap();
        let p = vec![r * theta.cos(), r * theta.sin(), z];
        let d = orbit_distance(&[p], &e.group, &e.u0);
        let exact = ((r - 1.0).powi(2) + z * z).sqrt();
        prop_assert!((d - exact).abs() < 1e-8, "{d} vs {exact}");
    }
}
