use std::f64::consts::TAU;

use cylint::geometry::*;
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn radius() -> impl Strategy<Value = f64> {
    (-3.0f64..3.0).prop_map(|e| 10f64.powf(e))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn point_round_trip(r in radius(), phi in 0.0..TAU, z in -100.0f64..100.0) {
        let p = CylPoint::new(r, phi, z).unwrap();
        let q = cart_to_cyl_point(&cyl_to_cart_point(&p)).unwrap();
        prop_assert!(rel(q.r(), r) < 1e-13 * r.max(1.0));
        let dphi = (q.phi() - p.phi()).abs();
        prop_assert!(dphi.min(TAU - dphi) < 1e-13);
        prop_assert_eq!(q.z(), z);
    }

    #[test]
    fn momentum_round_trip_and_kinetic_energy(
        r in radius(), phi in 0.0..TAU, z in -10.0f64..10.0,
        pr in -5.0f64..5.0, pphi in -5.0f64..5.0, pz in -5.0f64..5.0,
    ) {
        let ph = CylPhase::new(r, phi, z, pr, pphi, pz).unwrap();
        let cart = cyl_to_cart_momenta(&ph);
        let back = cart_to_cyl_momenta(&cart).unwrap();
        // orthonormal-frame magnitude of the momentum
        let n = (pr * pr + pphi * pphi / (r * r) + pz * pz).sqrt();
        prop_assert!((back.p_r - pr).abs() <= 1e-13 * n);
        prop_assert!((back.p_phi - pphi).abs() <= 1e-13 * r * n);
        prop_assert_eq!(back.p_z, pz);
        let t_cyl = 0.5 * (pr * pr + pphi * pphi / (r * r) + pz * pz);
        let t_cart = 0.5 * (cart.p_x * cart.p_x + cart.p_y * cart.p_y + cart.p_z * cart.p_z);
        prop_assert!((t_cyl - t_cart).abs() <= 1e-13 * t_cyl.max(1e-300) + 1e-300);
    }

    #[test]
    fn field_round_trip(r in radius(), phi in 0.0..TAU, br in -3.0f64..3.0, bp in -3.0f64..3.0, bz in -3.0f64..3.0) {
        let at = CylPoint::new(r, phi, 0.0).unwrap();
        let f = FieldTriple::new(br, bp, bz);
        let back = field_cart_to_cyl(&field_cyl_to_cart(&f, &at), &at);
        let n = ((br / r).powi(2) + bp * bp + (bz / r).powi(2)).sqrt();
        prop_assert!((back.b_r - br).abs() <= 1e-13 * r * n);
        prop_assert!((back.b_phi - bp).abs() <= 1e-13 * n);
        prop_assert!((back.b_z - bz).abs() <= 1e-13 * r * n);
    }

    #[test]
    fn field_transform_is_linear(
        r in 0.1f64..10.0, phi in 0.0..TAU,
        a in prop::array::uniform3(-2.0f64..2.0), b in prop::array::uniform3(-2.0f64..2.0), s in -3.0f64..3.0,
    ) {
        let at = CylPoint::new(r, phi, 0.0).unwrap();
        let fa = field_cyl_to_cart(&FieldTriple::new(a[0], a[1], a[2]), &at);
        let fb = field_cyl_to_cart(&FieldTriple::new(b[0], b[1], b[2]), &at);
        let sum = field_cyl_to_cart(&FieldTriple::new(a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]), &at);
        prop_assert!((sum.b_x - (fa.b_x + s * fb.b_x)).abs() < 1e-12 * (1.0 + 1.0 / r));
        prop_assert!((sum.b_y - (fa.b_y + s * fb.b_y)).abs() < 1e-12 * (1.0 + 1.0 / r));
        prop_assert!((sum.b_z - (fa.b_z + s * fb.b_z)).abs() < 1e-12 * (1.0 + 1.0 / r));
    }

    #[test]
    fn stored_angle_is_wrapped(phi in -1e3f64..1e3) {
        let p = CylPoint::new(1.0, phi, 0.0).unwrap();
        prop_assert!((0.0..TAU).contains(&p.phi()));
    }
}

#[test]
fn uniform_axial_field_in_cartesian_components() {
    let mu0 = 0.7;
    for (r, phi) in [(0.3, 0.0), (1.0, 2.0), (4.0, 5.5)] {
        let at = CylPoint::new(r, phi, 1.0).unwrap();
        let c = field_cyl_to_cart(&FieldTriple::new(0.0, 0.0, mu0 * r), &at);
        assert!(c.b_x.abs() < 1e-15 && c.b_y.abs() < 1e-15);
        assert!((c.b_z - mu0).abs() < 1e-15);
    }
}

#[test]
fn axis_point_has_no_angle() {
    let p = CartPoint { x: 0.0, y: 0.0, z: 1.0 };
    assert!(matches!(cart_to_cyl_point(&p), Err(cylint::Error::Axis)));
}
