use std::f64::consts::TAU;

use cylint::catalog::profiles::*;
use cylint::odes::*;
use cylint::specialfn::{ellip_k, EllipticModulus};

fn compare(sol: &ProfileSolution, exact: impl Fn(f64) -> (f64, f64), tol: f64) {
    for (x, y, dy) in sol.nodes() {
        let (ye, dye) = exact(x);
        assert!((y - ye).abs() <= tol * ye.abs().max(1.0), "y({x}) = {y} vs {ye}");
        assert!((dy - dye).abs() <= tol * dye.abs().max(1.0), "y'({x}) = {dy} vs {dye}");
    }
}

#[test]
fn gamma_matches_closed_form() {
    let (f1, beta1) = (-8.0, -0.5);
    let g = gamma_closed(f1, beta1, 0.0).unwrap();
    let sol = solve_gamma(
        f1,
        beta1,
        0.0,
        g.eval(0.0).unwrap(),
        g.deriv(1, 0.0).unwrap(),
        (0.0, TAU),
    )
    .unwrap();
    assert!(!sol.is_truncated());
    compare(&sol, |x| (g.eval(x).unwrap(), g.deriv(1, x).unwrap()), 1e-8);
    assert!(sol.max_monitor() <= MONITOR_TOL);
    for i in 0..100 {
        let phi = TAU * i as f64 / 100.0;
        let closed = (32f64.sqrt() * (2.0 * phi).sin() + 8.0) / 8.0;
        assert!((g.eval(phi).unwrap() - closed).abs() <= 1e-14);
    }
}

#[test]
fn gamma_with_beta2_loses_positivity() {
    let eq = ProfileEquation::Gamma {
        f1: -8.0,
        beta1: -0.5,
        beta2: 1.0,
    };
    let dy0 = eq.slope_squared(1.0).sqrt();
    let sol = solve_gamma(-8.0, -0.5, 1.0, 1.0, dy0, (0.0, TAU)).unwrap();
    let cut = sol.truncation().expect("truncated");
    assert_eq!(cut.reason, TruncationReason::PositivityLoss);
    assert!(cut.at > 0.0 && cut.at < TAU);
    assert!(sol.require_full_span().is_err());
    assert!(sol.eval(cut.at + 0.1).is_err());
    assert!(sol.nodes().all(|(_, y, _)| y > 0.0));
    assert!(sol.max_monitor() <= MONITOR_TOL);
}

#[test]
fn inconsistent_initial_data_is_refused() {
    assert!(solve_gamma(-8.0, -0.5, 0.0, 1.0, 0.0, (0.0, 1.0)).is_err());
    assert!(solve_mt(1.0, 0.0, 0.0, 0.0, 1.0, 0.0, (0.0, 1.0)).is_err());
    assert!(solve_gamma(-8.0, -0.5, 0.0, -1.0, 0.0, (0.0, 1.0)).is_err());
}

#[test]
fn bounded_jacobi_profile() {
    let (c, roots) = (2.0, [3.0, 2.0, 1.0]);
    let m = cubic_closed(CubicShape::JacobiBounded, c, roots, "Z").unwrap();
    let (c1, c2, c3) = cubic_from_roots(c, roots);
    let x0 = 0.4;
    let sol = solve_mt(c, c1, c2, c3, m.eval(x0).unwrap(), m.deriv(1, x0).unwrap(), (x0, 10.0)).unwrap();
    assert!(!sol.is_truncated());
    compare(&sol, |x| (m.eval(x).unwrap(), m.deriv(1, x).unwrap()), 1e-8);
    assert!(sol.max_monitor() <= MONITOR_TOL);

    // turning points of sn^2 sit at multiples of K / w
    let k = EllipticModulus::new(((roots[1] - roots[2]) / (roots[0] - roots[2])).sqrt()).unwrap();
    let w = (c * (roots[0] - roots[2])).sqrt() / 2.0;
    let quarter = ellip_k(k).unwrap() / w;
    let turns = sol.turning_points();
    assert!(!turns.is_empty());
    for t in &turns {
        let m = (t / quarter).round();
        assert!((t - m * quarter).abs() <= 1e-6, "turning point {t}");
    }
    // the branch sign flips exactly once across each turning point
    let branch = sol.branch_series();
    let flips = branch
        .windows(2)
        .filter(|p| p[0] != p[1] && p[0] != 0 && p[1] != 0)
        .count();
    assert_eq!(flips, turns.len());
}

#[test]
fn tanh_squared_profile() {
    let (c, roots) = (1.5, [3.0, 3.0, 1.0]);
    let m = cubic_closed(CubicShape::TanhSquared, c, roots, "Z").unwrap();
    let (c1, c2, c3) = cubic_from_roots(c, roots);
    let x0 = 0.2;
    let sol = solve_mt(c, c1, c2, c3, m.eval(x0).unwrap(), m.deriv(1, x0).unwrap(), (x0, 6.0)).unwrap();
    compare(&sol, |x| (m.eval(x).unwrap(), m.deriv(1, x).unwrap()), 1e-8);
    assert!(sol.max_monitor() <= MONITOR_TOL);
}

#[test]
fn exponential_profile_for_vanishing_cubic_term() {
    let k = [0.7, 0.3, 0.2, 0.5];
    let m = exp_profile(k).unwrap();
    // M'^2 = (k0 M - k3)^2 + 4 k1 k2
    let (c1, c2, c3) = (k[0] * k[0], -2.0 * k[0] * k[3], k[3] * k[3] + 4.0 * k[1] * k[2]);
    let sol = solve_mt(
        0.0,
        c1,
        c2,
        c3,
        m.eval(-2.0).unwrap(),
        m.deriv(1, -2.0).unwrap(),
        (-2.0, 2.0),
    )
    .unwrap();
    compare(&sol, |x| (m.eval(x).unwrap(), m.deriv(1, x).unwrap()), 1e-8);
    assert!(sol.max_monitor() <= MONITOR_TOL);
}

#[test]
fn separation_constant_gives_the_requested_period() {
    let roots = [1.0, 0.5, 0.0];
    for n in [1u32, 2, 3] {
        let c = periodic_separation_constant(roots, n).unwrap();
        let t = cubic_closed(CubicShape::JacobiBounded, c, roots, "phi").unwrap();
        let period = TAU / n as f64;
        for i in 0..50 {
            let x = 0.13 * i as f64;
            assert!((t.eval(x + period).unwrap() - t.eval(x).unwrap()).abs() <= 1e-12);
        }
        let (c1, c2, c3) = cubic_from_roots(c, roots);
        let x0 = 0.3;
        let sol = solve_mt(
            c,
            c1,
            c2,
            c3,
            t.eval(x0).unwrap(),
            t.deriv(1, x0).unwrap(),
            (x0, x0 + period),
        )
        .unwrap();
        let (_, y0, dy0) = sol.nodes().next().unwrap();
        let (_, y1, dy1) = sol.nodes().last().unwrap();
        assert!((y1 - y0).abs() <= 1e-8 && (dy1 - dy0).abs() <= 1e-8, "n = {n}");
    }
}

#[test]
fn richardson_estimate_is_small() {
    let (c, roots) = (2.0, [3.0, 2.0, 1.0]);
    let m = cubic_closed(CubicShape::JacobiBounded, c, roots, "Z").unwrap();
    let (c1, c2, c3) = cubic_from_roots(c, roots);
    let sol = solve_mt(
        c,
        c1,
        c2,
        c3,
        m.eval(0.4).unwrap(),
        m.deriv(1, 0.4).unwrap(),
        (0.4, 5.0),
    )
    .unwrap();
    assert!(sol.richardson_error() <= 1e-8);
}
