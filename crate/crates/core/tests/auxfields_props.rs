use std::f64::consts::TAU;

use cylint::auxfields::*;
use cylint::catalog::{build_sample, FamilyId};
use cylint::fd::central4;
use cylint::function::Function1D;
use cylint::geometry::CylPoint;
use cylint::verify::Grid;
use proptest::prelude::*;

/// Quintuple from coefficient vectors: polynomial rho and sigma, harmonic
/// tau, psi and mu.
fn aux_from(c: &[f64; 13]) -> AuxQuintuple {
    AuxQuintuple::new(
        Function1D::poly(&[c[0], c[1], c[2]]),
        Function1D::poly(&[c[3], c[4], c[5]]),
        Function1D::trig(c[6], c[7], 1.0),
        Function1D::trig(c[8], c[9], 2.0),
        Function1D::trig(c[10], c[11], c[12]),
    )
    .unwrap()
}

fn coeffs() -> impl Strategy<Value = [f64; 13]> {
    prop::array::uniform13(-2.0f64..2.0).prop_map(|mut c| {
        c[12] = c[12].abs() + 0.5;
        c
    })
}

fn point() -> impl Strategy<Value = CylPoint> {
    (0.3f64..3.0, 0.0..TAU, -2.0f64..2.0).prop_map(|(r, p, z)| CylPoint::new(r, p, z).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn closed_form_determinant_matches_matrix(c in coeffs(), at in point()) {
        let aux = aux_from(&c);
        let direct = matrix_m(&aux, &at).unwrap().determinant();
        let closed = det_m(&aux, &at).unwrap();
        prop_assert!((direct - closed).abs() <= 1e-10 * closed.abs().max(1.0), "{} vs {}", direct, closed);
    }

    #[test]
    fn field_is_linear_in_the_quintuple(a in coeffs(), b in coeffs(), s in -2.0f64..2.0, at in point()) {
        let mut mix = [0.0; 13];
        for i in 0..12 {
            mix[i] = a[i] + s * b[i];
        }
        // mu must share its frequency for the combination to stay in the family
        let mut b = b;
        b[12] = a[12];
        mix[12] = a[12];
        let fa = b_field_from_aux(&aux_from(&a), &at).unwrap().to_array();
        let fb = b_field_from_aux(&aux_from(&b), &at).unwrap().to_array();
        let fm = b_field_from_aux(&aux_from(&mix), &at).unwrap().to_array();
        for i in 0..3 {
            let want = fa[i] + s * fb[i];
            prop_assert!((fm[i] - want).abs() <= 1e-12 * (1.0 + fa[i].abs() + (s * fb[i]).abs()));
        }
    }

    #[test]
    fn field_two_form_is_closed(c in coeffs(), at in point()) {
        let aux = aux_from(&c);
        let b = |r: f64, p: f64, z: f64| b_field_from_aux(&aux, &CylPoint::new(r, p, z).unwrap()).unwrap();
        let (r, p, z) = (at.r(), at.phi(), at.z());
        let h = 1e-3;
        let terms = [
            central4(|x| Ok(b(x, p, z).b_r), r, h * r.max(1.0)).unwrap(),
            central4(|x| Ok(b(r, x, z).b_phi), p, h * p.max(1.0)).unwrap(),
            central4(|x| Ok(b(r, p, x).b_z), z, h * z.abs().max(1.0)).unwrap(),
        ];
        let scale = terms.iter().fold(1.0f64, |m, t| m.max(t.abs()));
        prop_assert!((terms[0] + terms[1] + terms[2]).abs() / scale <= 1e-7);
    }
}

#[test]
fn catalog_alpha_vanishes_on_grid() {
    for id in FamilyId::ALL {
        let sys = build_sample(id).unwrap();
        for at in Grid::default().points().unwrap() {
            let a = alpha(sys.aux(), &at).unwrap();
            assert!(a.abs() <= 1e-10, "{id}: alpha = {a} at {at:?}");
        }
    }
}

#[test]
fn catalog_aux_agrees_with_instance_fields() {
    for id in FamilyId::ALL {
        let sys = build_sample(id).unwrap();
        for at in Grid::default().points().unwrap() {
            let (s1, s2) = s_coeffs_from_aux(sys.aux(), &at).unwrap();
            let b = b_field_from_aux(sys.aux(), &at).unwrap().to_array();
            let pairs = [
                (s1, sys.s1(&at).unwrap()),
                (s2, sys.s2(&at).unwrap()),
                (b, sys.field(&at).unwrap().to_array()),
            ];
            for (x, y) in pairs {
                for i in 0..3 {
                    assert!(
                        (x[i] - y[i]).abs() <= 1e-12 * (1.0 + y[i].abs()),
                        "{id} at {at:?}: {x:?} vs {y:?}"
                    );
                }
            }
        }
    }
}

#[test]
fn uniform_axial_sample_satisfies_reduced_system() {
    let sys = build_sample(FamilyId::F1).unwrap();
    let w = |p: &CylPoint| sys.potential(p);
    for at in Grid::default().points().unwrap() {
        let red = reduced_residuals(sys.aux(), &w, &at).unwrap();
        let (i, v) = red.max_normalized();
        assert!(v <= 1e-8, "{} = {v} at {at:?}", REDUCED_NAMES[i]);
    }
}

#[test]
fn rank3_configuration_breaks_first_reduced_condition() {
    let aux = AuxQuintuple::new_unchecked(
        Function1D::zero(),
        Function1D::power(1.0, -3.0),
        Function1D::zero(),
        Function1D::poly(&[0.0, 1.0]),
        Function1D::constant(1.0),
    );
    let w = |p: &CylPoint| Ok(p.r() * p.r() + p.z());
    let at = CylPoint::new(1.3, 0.7, 0.4).unwrap();
    let red = reduced_residuals(&aux, &w, &at).unwrap();
    assert!(red.normalized()[0] > 1e-3);
}
