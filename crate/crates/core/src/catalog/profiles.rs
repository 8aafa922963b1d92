//! Profile functions of the exotic families: `gamma(phi) = beta(phi)^2` for
//! the exotic-beta family and the elliptic profiles `M(Z)`, `T(phi)`.

use std::f64::consts::PI;

use crate::error::{domain, validation, Result};
use crate::function::Function1D;
use crate::jet::Jet;
use crate::odes::{cubic_from_roots, ProfileEquation};
use crate::specialfn::{ellip_k, jacobi_sn_cn_dn, EllipticModulus};

/// Pole predicate tolerance: `|1 - sn^2| <= POLE_TOL` is treated as a pole.
pub const POLE_TOL: f64 = 1e-8;

/// Closed-form `gamma = (sqrt(64 beta1 + f1^2) sin(2 (phi - phi0)) - f1) / 8`
/// of the `beta2 = 0` case.
pub fn gamma_closed(f1: f64, beta1: f64, phi0: f64) -> Result<Function1D> {
    let rad = 64.0 * beta1 + f1 * f1;
    if rad < 0.0 {
        return Err(validation(format!(
            "64 beta1 + f1^2 must be non-negative for the closed profile, got {rad}"
        )));
    }
    let amp = rad.sqrt();
    Ok(Function1D::from_jet_fn(
        format!("gamma = ({amp} sin(2 (phi - {phi0})) - {f1}) / 8"),
        move |phi| {
            let (s, _) = ((Jet::variable(phi) - phi0) * 2.0).sin_cos();
            Ok((s * amp - f1) / 8.0)
        },
    ))
}

/// Elliptic-family profile shapes for `y'^2 = C (y - y1)(y - y2)(y - y3)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CubicShape {
    /// `y1 > y2 >= y >= y3`, bounded `sn^2` solution.
    JacobiBounded,
    /// `y > y1 > y2 > y3`, `sn^2` solution with poles.
    JacobiPoles,
    /// `y1 = y2 > y >= y3`, `tanh^2` solution.
    TanhSquared,
    /// `y > y1 > y2 = y3`, trigonometric solution with poles.
    SinePoles,
}

impl CubicShape {
    pub fn name(self) -> &'static str {
        match self {
            CubicShape::JacobiBounded => "jacobi-ex1",
            CubicShape::JacobiPoles => "jacobi-ex2",
            CubicShape::TanhSquared => "elementary-ex3",
            CubicShape::SinePoles => "elementary-ex4",
        }
    }
}

/// Closed-form solution `y(x)` of the cubic profile equation with `C > 0`.
pub fn cubic_closed(shape: CubicShape, c: f64, roots: [f64; 3], var: &str) -> Result<Function1D> {
    let [y1, y2, y3] = roots;
    if !(c > 0.0) {
        return Err(validation(format!("{}: C must be positive, got {c}", shape.name())));
    }
    let ordered = match shape {
        CubicShape::JacobiBounded | CubicShape::JacobiPoles => y1 > y2 && y2 > y3,
        CubicShape::TanhSquared => y1 == y2 && y2 > y3,
        CubicShape::SinePoles => y1 > y2 && y2 == y3,
    };
    if !ordered {
        let want = match shape {
            CubicShape::JacobiBounded | CubicShape::JacobiPoles => "roots1 > roots2 > roots3",
            CubicShape::TanhSquared => "roots1 = roots2 > roots3",
            CubicShape::SinePoles => "roots1 > roots2 = roots3",
        };
        return Err(validation(format!(
            "{}: root ordering {want} violated by ({y1}, {y2}, {y3})",
            shape.name()
        )));
    }
    let (c1, c2, c3) = cubic_from_roots(c, roots);
    let eq = ProfileEquation::Cubic { c, c1, c2, c3 };
    let name = format!("{}({var}; C = {c}, roots = {y1}, {y2}, {y3})", shape.name());
    let f: Box<dyn Fn(f64) -> Result<(f64, f64)> + Send + Sync> = match shape {
        CubicShape::JacobiBounded => {
            let k = EllipticModulus::new(((y2 - y3) / (y1 - y3)).sqrt())?;
            let w = (c * (y1 - y3)).sqrt() / 2.0;
            let a = y2 - y3;
            Box::new(move |x| {
                let t = jacobi_sn_cn_dn(w * x, k);
                Ok((a * t.sn * t.sn + y3, 2.0 * a * t.sn * t.cn * t.dn * w))
            })
        }
        CubicShape::JacobiPoles => {
            let k = EllipticModulus::new(((y2 - y3) / (y1 - y3)).sqrt())?;
            let w = (c * (y1 - y3)).sqrt() / 2.0;
            Box::new(move |x| {
                let t = jacobi_sn_cn_dn(w * x, k);
                let s2 = t.sn * t.sn;
                let q = 1.0 - s2;
                if q.abs() <= POLE_TOL {
                    return Err(domain(format!("pole of the profile at {x} (sn^2 = 1)")));
                }
                Ok(((y1 - y2 * s2) / q, 2.0 * (y1 - y2) * t.sn * t.cn * t.dn * w / (q * q)))
            })
        }
        CubicShape::TanhSquared => {
            let w = (c * (y1 - y3)).sqrt() / 2.0;
            Box::new(move |x| {
                let th = (w * x).tanh();
                Ok(((y1 - y3) * th * th + y3, 2.0 * (y1 - y3) * th * (1.0 - th * th) * w))
            })
        }
        CubicShape::SinePoles => {
            let w = (c * (y1 - y2)).sqrt() / 2.0;
            Box::new(move |x| {
                let (s, co) = (w * x).sin_cos();
                let q = co * co;
                if q.abs() <= POLE_TOL {
                    return Err(domain(format!("pole of the profile at {x} (sin^2 = 1)")));
                }
                Ok(((y1 - y2 * s * s) / q, 2.0 * (y1 - y2) * s * w / (q * co)))
            })
        }
    };
    Ok(Function1D::from_jet_fn(name, move |x| {
        let (y, dy) = f(x)?;
        Ok(eq.jet_from(y, dy))
    }))
}

/// Separation constant `C` that makes the bounded `sn^2` profile in `phi`
/// 2pi-periodic with `n` oscillations: `sqrt(C (T1 - T3)) pi = 2 n K(k)`.
pub fn periodic_separation_constant(roots: [f64; 3], n: u32) -> Result<f64> {
    let [t1, t2, t3] = roots;
    if !(t1 > t2 && t2 > t3) {
        return Err(validation(format!(
            "T roots must satisfy T1 > T2 > T3, got ({t1}, {t2}, {t3})"
        )));
    }
    if n == 0 {
        return Err(validation("the mode number n must be a positive integer"));
    }
    let k = EllipticModulus::new(((t2 - t3) / (t1 - t3)).sqrt())?;
    let kk = ellip_k(k)?;
    Ok((2.0 * n as f64 * kk / PI).powi(2) / (t1 - t3))
}

/// `(k1 e^{k0 x} - k2 e^{-k0 x} + k3) / k0`.
pub fn exp_profile(k: [f64; 4]) -> Result<Function1D> {
    let [k0, k1, k2, k3] = k;
    if k0 == 0.0 {
        return Err(validation("trig-exp profile needs k0 != 0"));
    }
    Ok(Function1D::from_jet_fn(
        format!("M(Z) = ({k1} e^({k0} Z) - {k2} e^(-{k0} Z) + {k3}) / {k0}"),
        move |z| {
            let t = Jet::variable(z) * k0;
            Ok((t.exp() * k1 - (-t).exp() * k2 + k3) / k0)
        },
    ))
}

/// `(kt1 sin(kt0 x) - kt2 cos(kt0 x) + kt3) / kt0`, with integer `kt0 != 0`.
pub fn trig_profile(k: [f64; 4]) -> Result<Function1D> {
    let [k0, k1, k2, k3] = k;
    if k0 == 0.0 || k0.fract() != 0.0 {
        return Err(validation(format!(
            "trig-exp profile needs a non-zero integer kt0 for 2pi-periodicity, got {k0}"
        )));
    }
    Ok(Function1D::from_jet_fn(
        format!("T(phi) = ({k1} sin({k0} phi) - {k2} cos({k0} phi) + {k3}) / {k0}"),
        move |phi| {
            let (s, c) = (Jet::variable(phi) * k0).sin_cos();
            Ok((s * k1 - c * k2 + k3) / k0)
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn monitor(eq: ProfileEquation, f: &Function1D, x: f64) -> f64 {
        let d = f.derivs(x).unwrap();
        eq.monitor(d[0], d[1])
    }

    #[test]
    fn closed_gamma_example() {
        let g = gamma_closed(-8.0, -0.5, 0.0).unwrap();
        assert!((g.eval(0.0).unwrap() - 1.0).abs() < 1e-15);
        let eq = ProfileEquation::Gamma {
            f1: -8.0,
            beta1: -0.5,
            beta2: 0.0,
        };
        for i in 0..50 {
            let phi = 0.13 * i as f64;
            assert!(monitor(eq, &g, phi).abs() < 1e-12);
        }
    }

    #[test]
    fn shapes_satisfy_the_cubic() {
        let cases = [
            (CubicShape::JacobiBounded, [3.0, 2.0, 1.0]),
            (CubicShape::JacobiPoles, [3.0, 2.0, 1.0]),
            (CubicShape::TanhSquared, [3.0, 3.0, 1.0]),
            (CubicShape::SinePoles, [3.0, 1.0, 1.0]),
        ];
        for (shape, roots) in cases {
            let c = 4.0;
            let (c1, c2, c3) = cubic_from_roots(c, roots);
            let eq = ProfileEquation::Cubic { c, c1, c2, c3 };
            let f = cubic_closed(shape, c, roots, "Z").unwrap();
            for i in 0..40 {
                let z = -1.0 + 0.05 * i as f64;
                match f.derivs(z) {
                    Ok(d) => {
                        let scale = 1.0 + d[1] * d[1];
                        assert!(eq.monitor(d[0], d[1]).abs() < 1e-11 * scale, "{shape:?} at {z}");
                    }
                    Err(_) => assert!(matches!(shape, CubicShape::JacobiPoles | CubicShape::SinePoles)),
                }
            }
        }
    }

    #[test]
    fn bounded_profile_stays_between_roots() {
        let f = cubic_closed(CubicShape::JacobiBounded, 4.0, [3.0, 2.0, 1.0], "Z").unwrap();
        for i in 0..200 {
            let y = f.eval(-5.0 + 0.05 * i as f64).unwrap();
            assert!((1.0 - 1e-14..=2.0 + 1e-14).contains(&y));
        }
    }

    #[test]
    fn sine_profile_poles_are_domain_errors() {
        let c = 4.0;
        let f = cubic_closed(CubicShape::SinePoles, c, [3.0, 1.0, 1.0], "Z").unwrap();
        let w = (c * 2.0f64).sqrt() / 2.0;
        assert!(f.eval(PI / 2.0 / w).is_err());
        assert!(f.eval(0.3).is_ok());
    }

    #[test]
    fn periodic_constant_closes_the_orbit() {
        let roots = [1.0, 0.5, 0.0];
        let c = periodic_separation_constant(roots, 1).unwrap();
        let t = cubic_closed(CubicShape::JacobiBounded, c, roots, "phi").unwrap();
        assert!(t.check_periodic("T", 16, 1e-10).is_ok());
        let c2 = periodic_separation_constant(roots, 2).unwrap();
        assert!((c2 / c - 4.0).abs() < 1e-12);
    }

    #[test]
    fn elementary_profiles() {
        let m = exp_profile([1.0, 0.5, 0.3, 0.2]).unwrap();
        let d = m.derivs(0.4).unwrap();
        assert!((d[1] - (0.5 * 0.4f64.exp() + 0.3 * (-0.4f64).exp())).abs() < 1e-14);
        assert!(trig_profile([1.5, 1.0, 0.0, 0.0]).is_err());
        let t = trig_profile([2.0, 1.0, 0.5, 0.1]).unwrap();
        assert!(t.check_periodic("T", 8, 1e-10).is_ok());
    }
}
