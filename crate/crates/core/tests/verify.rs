use cylint::catalog::*;
use cylint::dynamics::{integrate, IntegratorConfig};
use cylint::function::Function1D;
use cylint::geometry::CylPhase;
use cylint::verify::*;

fn perturbed(sys: &SystemInstance) -> SystemInstance {
    sys.with_potential_perturbation(
        Function1D::poly(&[0.0, 1.0]),
        Function1D::trig(0.05, 0.0, 1.0),
        Function1D::constant(1.0),
    )
}

#[test]
fn every_sample_passes_every_check() {
    let grid = Grid::default();
    for id in FamilyId::ALL {
        let sys = build_sample(id).unwrap();
        let c = check_commutation(&sys, 50, 11, 1e-6).unwrap();
        assert!(c.pass, "{id}: {c:?}");
        let r = determining_residuals(&sys, &grid, 1e-6).unwrap();
        assert!(r.pass, "{id}: {}", r.max_residual());
        assert_eq!(r.equations.len(), 28);
        let g = gauge_check(&sys, &grid, 1e-7).unwrap();
        assert!(g.pass, "{id}: {}", g.max_residual());
        assert!(alpha_max(&sys, &grid).unwrap() <= 1e-10);
    }
}

#[test]
fn perturbed_potential_fails_both_suites() {
    for id in FamilyId::ALL {
        let sys = perturbed(&build_sample(id).unwrap());
        assert!(!check_commutation(&sys, 50, 11, 1e-6).unwrap().pass, "{id}");
        assert!(
            !determining_residuals(&sys, &Grid::default(), 1e-6).unwrap().pass,
            "{id}"
        );
    }
}

#[test]
fn radial_m1_probe_hits_only_m1_equations() {
    let sys = build_family(FamilyId::F1, &ParamSet::new().with_const("mu0", 1.0)).unwrap();
    let probe = sys.with_m_offsets(Function1D::poly(&[0.0, 0.01]), Function1D::zero());
    let grid = Grid::default();
    let a = determining_residuals(&sys, &grid, 1e-6).unwrap();
    let b = determining_residuals(&probe, &grid, 1e-6).unwrap();
    let hit = b.equation("cyl1a.r").unwrap();
    assert!((hit.raw_max - 0.01).abs() <= 1e-9, "{hit:?}");
    assert!(!b.pass);
    for (x, y) in a.equations.iter().zip(&b.equations) {
        if x.name.starts_with("cyl2") || x.name.starts_with("extra2") {
            assert!((x.raw_max - y.raw_max).abs() <= 1e-12, "{} changed", x.name);
        }
    }
}

#[test]
fn bracket_stencil_is_fourth_order() {
    let f = |y: &[f64; 6]| Ok(y[0].sin() * y[4] * y[4]);
    let g = |y: &[f64; 6]| Ok(y[3].powi(3) + y[2] * y[5]);
    let ph = CylPhase::new(1.3, 0.4, 0.2, 0.7, 0.9, -0.5).unwrap();
    let y = ph.to_array();
    // {F, G} = dF/dr dG/dp_r - dG/dZ dF/dp_Z
    let exact = y[0].cos() * y[4] * y[4] * 3.0 * y[3] * y[3];
    let err = |h: f64| (poisson_bracket_fd(&f, &g, &ph, h).unwrap() - exact).abs();
    let ratio = err(0.1) / err(0.05);
    assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn reports_are_deterministic_and_round_trip() {
    let sys = build_sample(FamilyId::F4).unwrap();
    let a = VerifyJson::from(&check_commutation(&sys, 40, 7, 1e-6).unwrap()).to_json();
    let b = VerifyJson::from(&check_commutation(&sys, 40, 7, 1e-6).unwrap()).to_json();
    let c = VerifyJson::from(&check_commutation(&sys, 40, 8, 1e-6).unwrap()).to_json();
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(VerifyJson::from_json(&a).unwrap().to_json(), a);
    let r = determining_residuals(&sys, &Grid::default(), 1e-6).unwrap();
    let j = VerifyJson::from_residuals(&r, 0);
    assert_eq!(j.per_equation.len(), 28 + PRINTED_EXTRA1.len());
    assert!(PRINTED_EXTRA1.iter().all(|k| j.per_equation.contains_key(*k)));
    assert_eq!(VerifyJson::from_json(&j.to_json()).unwrap(), j);
    assert!(VerifyJson::from_json("{").is_err());
}

#[test]
fn printed_forms_are_reported_separately() {
    for id in FamilyId::ALL {
        let r = determining_residuals(&build_sample(id).unwrap(), &Grid::default(), 1e-6).unwrap();
        let names: Vec<&str> = r.informational.iter().map(|e| e.name.as_str()).collect();
        assert_eq!(names, PRINTED_EXTRA1);
        assert!(r.informational.iter().all(|e| e.max.is_finite()));
        for name in ["extra1.r", "extra1.phi", "extra1.Z"] {
            assert!(r.equation(name).is_some());
        }
        assert!(!r.equations.iter().any(|e| e.name.contains("printed")));
    }
}

#[test]
fn equation_groups_cover_all_names() {
    let total: usize = EQUATION_GROUPS.iter().map(|(_, names)| names.len()).sum();
    assert_eq!(total, 28);
    assert_eq!(equation_names().len(), 28);
}

#[test]
fn conservation_report_tracks_all_observables() {
    let sys = build_sample(FamilyId::F1).unwrap();
    let start = CylPhase::new(1.2, 0.3, 0.1, 0.1, 0.5, 0.05).unwrap();
    let traj = integrate(&sys, &start, 1.0, &IntegratorConfig::midpoint(1e-3).unwrap()).unwrap();
    let rep = conservation_report(&traj).unwrap();
    for name in ["H", "X1", "X2", "X1_lin", "X2_lin"] {
        assert!(rep.drift(name).unwrap() <= 1e-8, "{name}");
    }
    let j = VerifyJson::from_conservation("F1", &rep, 0, 1e-6);
    assert!(j.pass);
}

#[test]
fn near_axis_grid_is_rejected() {
    let sys = build_sample(FamilyId::F1).unwrap();
    let grid = Grid {
        r: (1e-6, 1.0),
        ..Grid::default()
    };
    assert!(determining_residuals(&sys, &grid, 1e-6).is_err());
}
