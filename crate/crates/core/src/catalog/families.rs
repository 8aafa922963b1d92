//! Closed-form models of the families with explicit solutions.

use std::f64::consts::TAU;
use std::sync::Arc;

use super::general;
use super::params::{ConstSpec, ParamSet, Schema, SlotSpec, Variable, WordSpec};
use super::profiles::{
    cubic_closed, exp_profile, gamma_closed, periodic_separation_constant, trig_profile, CubicShape,
};
use super::{FamilyDescriptor, FamilyId, Model, SystemInstance};
use crate::auxfields::AuxQuintuple;
use crate::error::{validation, Result};
use crate::function::Function1D;
use crate::geometry::{CylPoint, FieldTriple};
use crate::jet::{Dual, Jet};
use crate::odes::{cubic_from_roots, solve_gamma, solve_mt, ProfileEquation};

fn c(v: f64) -> Dual {
    Dual::constant(v)
}

const fn konst(name: &'static str, default: Option<f64>, doc: &'static str) -> ConstSpec {
    ConstSpec { name, default, doc }
}

const fn slot(name: &'static str, variable: Variable, doc: &'static str) -> SlotSpec {
    SlotSpec { name, variable, doc }
}

pub(super) fn descriptor(id: FamilyId) -> FamilyDescriptor {
    let w1 = slot("W1", Variable::R, "radial part of the potential");
    let w2 = slot("W2", Variable::Phi, "angular part of the potential, enters as W2/r^2");
    let w3 = slot("W3", Variable::Z, "axial part of the potential");
    let (summary, field, schema, constraints, first_order): (_, _, Schema, Vec<&'static str>, _) = match id {
        FamilyId::F1 => (
            "constant mu and tau with arbitrary rho(r), sigma(r); W = W1(r)",
            "B = (0, tau0/r^3 + sigma'/2, mu0 r - rho'/2); uniform B_z = mu0 when rho = sigma = tau0 = 0",
            Schema {
                constants: vec![
                    konst("mu0", Some(0.0), "constant mu"),
                    konst("tau0", Some(0.0), "constant tau"),
                ],
                slots: vec![
                    slot("rho", Variable::R, "auxiliary rho(r)"),
                    slot("sigma", Variable::R, "auxiliary sigma(r)"),
                    w1,
                ],
                words: vec![],
            },
            vec![],
            [true, true],
        ),
        FamilyId::F2 => (
            "psi = beta(phi) with gamma = beta^2 solving a nonlinear profile equation; mu = rho = 0",
            "B = (-tau1 beta'/(r^2 beta^3), tau1/(r^3 beta^2), (2 beta1 beta^2 + beta2)/(4 r^2 beta^5))",
            Schema {
                constants: vec![
                    konst("sigma0", Some(0.0), "additive constant of s2^Z"),
                    konst("tau0", Some(0.0), "additive constant of s1^Z"),
                    konst("tau1", Some(0.0), "strength of the tau1/gamma terms"),
                    konst("W0", Some(0.0), "coefficient of W0/(r^2 gamma)"),
                    konst("f1", None, "profile constant f1"),
                    konst("beta1", None, "profile constant beta1"),
                    konst("beta2", Some(0.0), "profile constant beta2 (closed profile needs 0)"),
                    konst("phi0", Some(0.0), "phase of the closed profile"),
                    konst("gamma0", None, "numeric profile: gamma at phi_start"),
                    konst("dgamma0", None, "numeric profile: gamma' at phi_start (default from the first integral)"),
                    konst("branch", Some(1.0), "numeric profile: sign of gamma' when dgamma0 is omitted"),
                    konst("phi_start", Some(0.0), "numeric profile: start of the span"),
                    konst("phi_end", Some(TAU), "numeric profile: end of the span"),
                ],
                slots: vec![],
                words: vec![WordSpec {
                    name: "profile",
                    choices: &["closed", "numeric"],
                    default: "closed",
                }],
            },
            vec![
                "gamma gamma'^2 + 4 gamma^3 - 4 beta1 gamma + f1 gamma^2 = beta2 with gamma > 0",
                "profile = closed: beta2 = 0 and f1 < 0, f1/8 < beta1 < 0 (beta bounded and positive), 64 beta1 + f1^2 >= 0",
                "profile = numeric: initial data must satisfy the first integral to 1e-10; positivity loss truncates the span",
            ],
            [false, true],
        ),
        FamilyId::F3 => (
            "mu = M'(Z), tau = T'(phi) with M and T solving cubic first-order equations",
            "B = (T''/(2 r^2) - r^2 M''/2, T'/r^3, r M')",
            Schema {
                constants: vec![
                    konst("M1", Some(0.0), "roots of the M cubic"),
                    konst("M2", Some(0.0), ""),
                    konst("M3", Some(0.0), ""),
                    konst("T1", Some(0.0), "roots of the T cubic, T1 > T2 > T3"),
                    konst("T2", Some(0.0), ""),
                    konst("T3", Some(0.0), ""),
                    konst("n", Some(1.0), "number of T oscillations per turn; fixes C"),
                    konst("w0", Some(0.0), "linear coefficient in W2(T) and W3(M)"),
                    konst("k0", Some(1.0), "trig-exp: M = (k1 e^(k0 Z) - k2 e^(-k0 Z) + k3)/k0"),
                    konst("k1", Some(0.0), ""),
                    konst("k2", Some(0.0), ""),
                    konst("k3", Some(0.0), ""),
                    konst("kt0", Some(1.0), "trig-exp: T = (kt1 sin(kt0 phi) - kt2 cos(kt0 phi) + kt3)/kt0, integer kt0"),
                    konst("kt1", Some(0.0), ""),
                    konst("kt2", Some(0.0), ""),
                    konst("kt3", Some(0.0), ""),
                    konst("M0", None, "numeric: M at z_start"),
                    konst("dM0", None, "numeric: M' at z_start (default from the first integral)"),
                    konst("branch", Some(1.0), "numeric: sign of M' when dM0 is omitted"),
                    konst("z_start", Some(-2.0), "numeric: start of the span"),
                    konst("z_end", Some(2.0), "numeric: end of the span"),
                ],
                slots: vec![w1],
                words: vec![
                    WordSpec {
                        name: "profile",
                        choices: &["jacobi-ex1", "jacobi-ex2", "elementary-ex3", "elementary-ex4", "trig-exp", "numeric"],
                        default: "jacobi-ex1",
                    },
                    WordSpec {
                        name: "wiring",
                        choices: &["printed", "swapped"],
                        default: "printed",
                    },
                ],
            },
            vec![
                "M'^2 = C M^3 + C1 M^2 + C2 M + C3, T'^2 = C T^3 + C~1 T^2 + C~2 T + C~3",
                "W2 = -C1 T^2/8 + w0 T, W3 = -C~1 M^2/8 + w0 M (wiring = swapped exchanges C1 and C~1)",
                "T: T1 > T2 > T3, C = (2 n K(k)/pi)^2/(T1 - T3) with k^2 = (T2 - T3)/(T1 - T3) for 2pi-periodicity",
                "jacobi-ex1: M1 > M2 > M3 (M3 <= M <= M2); jacobi-ex2: M1 > M2 > M3 (M > M1, poles)",
                "elementary-ex3: M1 = M2 > M3; elementary-ex4: M1 > M2 = M3 (poles)",
                "trig-exp: C = 0, C1 = k0^2, C~1 = -kt0^2",
            ],
            [false, false],
        ),
        FamilyId::F4 => (
            "tau = psi = sigma = 0 with arbitrary mu(Z), rho(r); reduces to the uniform-mu case when rho = 0",
            "B = (-r^2 mu'/2, 0, r mu - rho'/2)",
            Schema {
                constants: vec![],
                slots: vec![
                    slot("mu", Variable::Z, "auxiliary mu(Z)"),
                    slot("rho", Variable::R, "auxiliary rho(r)"),
                    w1,
                    w3,
                ],
                words: vec![],
            },
            vec![],
            [true, false],
        ),
        FamilyId::F5 => (
            "mu = psi = rho = 0 with arbitrary tau(phi), sigma(r)",
            "B = (tau'/(2 r^2), tau/r^3 + sigma'/2, 0)",
            Schema {
                constants: vec![],
                slots: vec![
                    slot("tau", Variable::Phi, "auxiliary tau(phi)"),
                    slot("sigma", Variable::R, "auxiliary sigma(r)"),
                    w1,
                    w2,
                ],
                words: vec![],
            },
            vec![],
            [false, true],
        ),
        FamilyId::F6 => (
            "only rho(r): axial field of polar type, potential separated in r and Z",
            "B = (0, 0, -rho'/2)",
            Schema {
                constants: vec![],
                slots: vec![slot("rho", Variable::R, "auxiliary rho(r)"), w1, w3],
                words: vec![],
            },
            vec![],
            [false, false],
        ),
        FamilyId::F7 => (
            "only sigma(r): azimuthal field, potential W1(r) + W2(phi)/r^2",
            "B = (0, sigma'/2, 0)",
            Schema {
                constants: vec![],
                slots: vec![slot("sigma", Variable::R, "auxiliary sigma(r)"), w1, w2],
                words: vec![],
            },
            vec![],
            [false, false],
        ),
        FamilyId::F8 => (
            "general auxiliary functions with W = W1(r) + W2(phi)/r^2 + W3(Z), accepted only if the reduced determining system holds",
            "B from the auxiliary functions, gauge A = (0, (psi + psi'')/(2 r) + r^2 mu/2 - rho/2, tau/(2 r^2) - sigma/2)",
            Schema {
                constants: vec![],
                slots: vec![
                    slot("psi", Variable::Phi, "auxiliary psi(phi)"),
                    slot("rho", Variable::R, "auxiliary rho(r)"),
                    slot("sigma", Variable::R, "auxiliary sigma(r)"),
                    slot("tau", Variable::Phi, "auxiliary tau(phi)"),
                    slot("mu", Variable::Z, "auxiliary mu(Z)"),
                    w1,
                    w2,
                    w3,
                ],
                words: vec![],
            },
            vec![
                "psi', mu and sigma must not all be non-vanishing (no full-rank solution exists)",
                "the reduced determining equations and mu psi'' = 0 must hold to 1e-6 on the 5x8x5 check grid",
                "m1 and m2 must be single-valued in phi",
            ],
            [false, false],
        ),
    };
    FamilyDescriptor {
        id,
        summary,
        field,
        schema,
        constraints,
        first_order,
    }
}

pub(super) fn build(id: FamilyId, desc: &FamilyDescriptor, params: &ParamSet) -> Result<SystemInstance> {
    let schema = &desc.schema;
    let mut notes = Vec::new();
    let (model, aux): (Arc<dyn Model>, AuxQuintuple) = match id {
        FamilyId::F1 => {
            let m = UniformAxial {
                mu0: params.constant(schema, "mu0")?,
                tau0: params.constant(schema, "tau0")?,
                rho: params.slot("rho"),
                sigma: params.slot("sigma"),
                w1: params.slot("W1"),
            };
            let aux = AuxQuintuple::new(
                m.rho.clone(),
                m.sigma.clone(),
                Function1D::constant(m.tau0),
                Function1D::zero(),
                Function1D::constant(m.mu0),
            )?;
            (Arc::new(m), aux)
        }
        FamilyId::F2 => {
            let (m, aux) = exotic_beta(schema, params, &mut notes)?;
            (Arc::new(m), aux)
        }
        FamilyId::F3 => {
            let m = elliptic_mt(schema, params)?;
            let aux = AuxQuintuple::new(
                Function1D::zero(),
                Function1D::zero(),
                m.t.derivative(),
                Function1D::zero(),
                m.m.derivative(),
            )?;
            (Arc::new(m), aux)
        }
        FamilyId::F4 => {
            let m = AxialMuRho {
                mu: params.slot("mu"),
                rho: params.slot("rho"),
                w1: params.slot("W1"),
                w3: params.slot("W3"),
            };
            let aux = AuxQuintuple::new(
                m.rho.clone(),
                Function1D::zero(),
                Function1D::zero(),
                Function1D::zero(),
                m.mu.clone(),
            )?;
            (Arc::new(m), aux)
        }
        FamilyId::F5 => {
            let m = TauSigma {
                tau: params.slot("tau"),
                sigma: params.slot("sigma"),
                w1: params.slot("W1"),
                w2: params.slot("W2"),
            };
            m.w2.check_periodic("W2", 16, 1e-10)?;
            let aux = AuxQuintuple::new(
                Function1D::zero(),
                m.sigma.clone(),
                m.tau.clone(),
                Function1D::zero(),
                Function1D::zero(),
            )?;
            (Arc::new(m), aux)
        }
        FamilyId::F6 => {
            let m = PolarXFree {
                rho: params.slot("rho"),
                w1: params.slot("W1"),
                w3: params.slot("W3"),
            };
            let aux = AuxQuintuple::new(
                m.rho.clone(),
                Function1D::zero(),
                Function1D::zero(),
                Function1D::zero(),
                Function1D::zero(),
            )?;
            (Arc::new(m), aux)
        }
        FamilyId::F7 => {
            let m = SigmaOnly {
                sigma: params.slot("sigma"),
                w1: params.slot("W1"),
                w2: params.slot("W2"),
            };
            m.w2.check_periodic("W2", 16, 1e-10)?;
            let aux = AuxQuintuple::new(
                Function1D::zero(),
                m.sigma.clone(),
                Function1D::zero(),
                Function1D::zero(),
                Function1D::zero(),
            )?;
            (Arc::new(m), aux)
        }
        FamilyId::F8 => {
            let aux = AuxQuintuple::new_unchecked(
                params.slot("rho"),
                params.slot("sigma"),
                params.slot("tau"),
                params.slot("psi"),
                params.slot("mu"),
            );
            let w = [params.slot("W1"), params.slot("W2"), params.slot("W3")];
            return general::build_general(aux, w, params.clone());
        }
    };
    general::check_rank3(&aux)?;
    Ok(SystemInstance::new(
        id,
        params.clone(),
        aux,
        model,
        desc.first_order,
        notes,
    ))
}

/// `r mu0`-type uniform axial field with arbitrary `rho`, `sigma`.
struct UniformAxial {
    mu0: f64,
    tau0: f64,
    rho: Function1D,
    sigma: Function1D,
    w1: Function1D,
}

impl Model for UniformAxial {
    fn potential(&self, x: &[Dual; 3]) -> Result<Dual> {
        self.w1.apply(0, x[0])
    }

    fn gauge(&self, x: &[Dual; 3]) -> Result<[Dual; 3]> {
        let r = x[0];
        let a_phi = r.sqr() * (self.mu0 / 2.0) - self.rho.apply(0, r)? / 2.0;
        let a_z = self.tau0 / (2.0 * r.sqr()) - self.sigma.apply(0, r)? / 2.0;
        Ok([c(0.0), a_phi, a_z])
    }

    fn field(&self, at: &CylPoint) -> Result<FieldTriple> {
        let r = at.r();
        Ok(FieldTriple::new(
            0.0,
            self.tau0 / r.powi(3) + self.sigma.deriv(1, r)? / 2.0,
            self.mu0 * r - self.rho.deriv(1, r)? / 2.0,
        ))
    }

    fn s_coeffs(&self, at: &CylPoint) -> Result<([f64; 3], [f64; 3])> {
        let r = at.r();
        Ok((
            [0.0, self.rho.eval(r)? - r * r * self.mu0, self.tau0],
            [0.0, self.mu0, self.sigma.eval(r)? - self.tau0 / (r * r)],
        ))
    }

    fn m_coeffs(&self, at: &CylPoint) -> Result<(f64, f64)> {
        let r = at.r();
        let (rho, sigma) = (self.rho.eval(r)?, self.sigma.eval(r)?);
        let (mu0, tau0, r2) = (self.mu0, self.tau0, r * r);
        let m1 = 0.5 * (tau0 * sigma - r2 * mu0 * rho - tau0 * tau0 / r2) + 0.25 * (rho * rho + mu0 * mu0 * r2 * r2);
        let m2 =
            0.5 * (rho * mu0 - mu0 * mu0 * r2 - tau0 * sigma / r2) + 0.25 * (sigma * sigma + tau0 * tau0 / (r2 * r2));
        Ok((m1, m2))
    }

    fn linear_shifts(&self, at: &CylPoint) -> Result<[Option<f64>; 2]> {
        let r = at.r();
        Ok([
            Some(self.rho.eval(r)? / 2.0 - self.mu0 * r * r / 2.0),
            Some(self.sigma.eval(r)? / 2.0 - self.tau0 / (2.0 * r * r)),
        ])
    }
}

/// Family built on `gamma(phi) = beta(phi)^2`.
struct ExoticBeta {
    sigma0: f64,
    tau0: f64,
    tau1: f64,
    w0: f64,
    beta1: f64,
    beta2: f64,
    gamma: Function1D,
}

fn exotic_beta(schema: &Schema, params: &ParamSet, notes: &mut Vec<String>) -> Result<(ExoticBeta, AuxQuintuple)> {
    let k = |n: &str| params.constant(schema, n);
    let (f1, beta1, beta2) = (k("f1")?, k("beta1")?, k("beta2")?);
    let periodic;
    let gamma = match params.word(schema, "profile") {
        "numeric" => {
            let eq = ProfileEquation::Gamma { f1, beta1, beta2 };
            let gamma0 = k("gamma0")?;
            if !(gamma0 > 0.0) {
                return Err(validation(format!("gamma0 must be positive, got {gamma0}")));
            }
            let dgamma0 = match params.constants().get("dgamma0") {
                Some(d) => *d,
                None => initial_slope(eq, gamma0, k("branch")?, "gamma")?,
            };
            let span = (k("phi_start")?, k("phi_end")?);
            let sol = solve_gamma(f1, beta1, beta2, gamma0, dgamma0, span)?;
            if let Some(t) = sol.truncation() {
                notes.push(format!(
                    "numeric gamma truncated at phi = {} ({:?}); the system is undefined beyond it",
                    t.at, t.reason
                ));
            }
            periodic = false;
            sol.into_function("gamma")
        }
        _ => {
            if beta2 != 0.0 {
                return Err(validation(format!(
                    "closed profile requires beta2 = 0, got {beta2} (use profile = numeric)"
                )));
            }
            if !(f1 < 0.0 && f1 / 8.0 < beta1 && beta1 < 0.0) {
                return Err(validation(format!(
                    "closed profile requires f1 < 0, f1/8 < beta1 < 0, got f1 = {f1}, beta1 = {beta1}"
                )));
            }
            periodic = true;
            gamma_closed(f1, beta1, k("phi0")?)?
        }
    };
    let m = ExoticBeta {
        sigma0: k("sigma0")?,
        tau0: k("tau0")?,
        tau1: k("tau1")?,
        w0: k("W0")?,
        beta1,
        beta2,
        gamma,
    };
    let g = m.gamma.clone();
    let psi = Function1D::from_jet_fn("beta = sqrt(gamma)", move |x| Ok(g.jet(x)?.sqrt()));
    let (g, tau0, tau1) = (m.gamma.clone(), m.tau0, m.tau1);
    let tau = Function1D::from_jet_fn(format!("{tau0} + {tau1}/gamma"), move |x| {
        Ok(g.jet(x)?.recip() * tau1 + tau0)
    });
    let sigma0 = m.sigma0;
    let sigma = Function1D::from_jet_fn(format!("{sigma0} + {tau0}/r^2"), move |r| {
        let inv = Jet::variable(r).recip();
        Ok(inv * inv * tau0 + sigma0)
    });
    let (rho, mu) = (Function1D::zero(), Function1D::zero());
    let aux = if periodic {
        AuxQuintuple::new(rho, sigma, tau, psi, mu)?
    } else {
        AuxQuintuple::new_unchecked(rho, sigma, tau, psi, mu)
    };
    Ok((m, aux))
}

/// `branch * sqrt(y'^2)` from the first integral, rejecting negative radicands.
fn initial_slope(eq: ProfileEquation, y0: f64, branch: f64, name: &str) -> Result<f64> {
    let sq = eq.slope_squared(y0);
    if sq < -1e-12 {
        return Err(validation(format!(
            "no real initial slope: {name}'^2 = {sq:.6e} < 0 at {name} = {y0}"
        )));
    }
    Ok(branch.signum() * sq.max(0.0).sqrt())
}

impl ExoticBeta {
    fn gamma_d(&self, phi: f64) -> Result<(f64, f64)> {
        let d = self.gamma.derivs(phi)?;
        if !(d[0] > 0.0) {
            return Err(crate::error::domain(format!(
                "gamma = {} is not positive at phi = {phi}",
                d[0]
            )));
        }
        Ok((d[0], d[1]))
    }

    fn gamma_dual(&self, phi: Dual) -> Result<Dual> {
        let g = self.gamma.apply(0, phi)?;
        if !(g.v > 0.0) {
            return Err(crate::error::domain(format!(
                "gamma = {} is not positive at phi = {}",
                g.v, phi.v
            )));
        }
        Ok(g)
    }
}

impl Model for ExoticBeta {
    fn potential(&self, x: &[Dual; 3]) -> Result<Dual> {
        let (r2, g) = (x[0].sqr(), self.gamma_dual(x[1])?);
        Ok(self.w0 / (r2 * g) - (4.0 * self.tau1 * self.tau1 + self.beta2) / (32.0 * g.sqr() * r2.sqr()))
    }

    fn gauge(&self, x: &[Dual; 3]) -> Result<[Dual; 3]> {
        let (r, g) = (x[0], self.gamma_dual(x[1])?);
        let g52 = g * g * g.sqrt();
        let a_phi = -(g * (2.0 * self.beta1) + self.beta2) / (g52 * r * 4.0);
        let a_z = self.tau1 / (g * r.sqr() * 2.0);
        Ok([c(0.0), a_phi, a_z])
    }

    fn field(&self, at: &CylPoint) -> Result<FieldTriple> {
        let (r, (g, dg)) = (at.r(), self.gamma_d(at.phi())?);
        let beta = g.sqrt();
        let dbeta = dg / (2.0 * beta);
        Ok(FieldTriple::new(
            -self.tau1 * dbeta / (r * r * beta.powi(3)),
            self.tau1 / (r.powi(3) * g),
            (2.0 * self.beta1 * g + self.beta2) / (4.0 * r * r * beta.powi(5)),
        ))
    }

    fn s_coeffs(&self, at: &CylPoint) -> Result<([f64; 3], [f64; 3])> {
        let (r, (g, dg)) = (at.r(), self.gamma_d(at.phi())?);
        let beta = g.sqrt();
        Ok((
            [dg / (2.0 * beta), -beta / r, self.tau0 + self.tau1 / g],
            [0.0, 0.0, self.sigma0 - self.tau1 / (r * r * g)],
        ))
    }

    fn m_coeffs(&self, at: &CylPoint) -> Result<(f64, f64)> {
        let (r2, (g, _)) = (at.r() * at.r(), self.gamma_d(at.phi())?);
        let (t0, t1) = (self.tau0, self.tau1);
        let m1 = 2.0 * self.w0 / g
            - (4.0 * g * t0 * t1 + 2.0 * self.beta1 * g + 4.0 * t1 * t1 + self.beta2) / (8.0 * g * g * r2);
        let m2 = t1 / (g * r2) * (t1 / (4.0 * g * r2) - self.sigma0 / 2.0);
        Ok((m1, m2))
    }

    fn linear_shifts(&self, at: &CylPoint) -> Result<[Option<f64>; 2]> {
        let (r, (g, _)) = (at.r(), self.gamma_d(at.phi())?);
        Ok([None, Some(-self.tau1 / (2.0 * g * r * r))])
    }
}

/// Family with `mu = M'(Z)`, `tau = T'(phi)`.
struct EllipticMT {
    m: Function1D,
    t: Function1D,
    /// Coefficient of `T^2` in `W2` and of `M^2` in `W3`.
    c_w2: f64,
    c_w3: f64,
    w0: f64,
    w1: Function1D,
}

fn elliptic_mt(schema: &Schema, params: &ParamSet) -> Result<EllipticMT> {
    let k = |n: &str| params.constant(schema, n);
    let profile = params.word(schema, "profile");
    let (m, t, c1, c1t) = if profile == "trig-exp" {
        let kk = [k("k0")?, k("k1")?, k("k2")?, k("k3")?];
        let kt = [k("kt0")?, k("kt1")?, k("kt2")?, k("kt3")?];
        (exp_profile(kk)?, trig_profile(kt)?, kk[0] * kk[0], -kt[0] * kt[0])
    } else {
        let troots = [k("T1")?, k("T2")?, k("T3")?];
        let n = k("n")?;
        if !(n >= 1.0 && n.fract() == 0.0) {
            return Err(validation(format!("n must be a positive integer, got {n}")));
        }
        let cc = periodic_separation_constant(troots, n as u32)?;
        let t = cubic_closed(CubicShape::JacobiBounded, cc, troots, "phi")?;
        let mroots = [k("M1")?, k("M2")?, k("M3")?];
        let (c1, c2, c3) = cubic_from_roots(cc, mroots);
        let (c1t, _, _) = cubic_from_roots(cc, troots);
        let m = match profile {
            "jacobi-ex2" => cubic_closed(CubicShape::JacobiPoles, cc, mroots, "Z")?,
            "elementary-ex3" => cubic_closed(CubicShape::TanhSquared, cc, mroots, "Z")?,
            "elementary-ex4" => cubic_closed(CubicShape::SinePoles, cc, mroots, "Z")?,
            "numeric" => {
                let eq = ProfileEquation::Cubic { c: cc, c1, c2, c3 };
                let m0 = k("M0")?;
                let dm0 = match params.constants().get("dM0") {
                    Some(d) => *d,
                    None => initial_slope(eq, m0, k("branch")?, "M")?,
                };
                let sol = solve_mt(cc, c1, c2, c3, m0, dm0, (k("z_start")?, k("z_end")?))?;
                sol.require_full_span()?;
                sol.into_function("M")
            }
            _ => cubic_closed(CubicShape::JacobiBounded, cc, mroots, "Z")?,
        };
        (m, t, c1, c1t)
    };
    let (c_w2, c_w3) = match params.word(schema, "wiring") {
        "swapped" => (c1t, c1),
        _ => (c1, c1t),
    };
    Ok(EllipticMT {
        m,
        t,
        c_w2,
        c_w3,
        w0: k("w0")?,
        w1: params.slot("W1"),
    })
}

impl Model for EllipticMT {
    fn potential(&self, x: &[Dual; 3]) -> Result<Dual> {
        let (r, phi, z) = (x[0], x[1], x[2]);
        let (m, dm, ddm) = (self.m.apply(0, z)?, self.m.apply(1, z)?, self.m.apply(2, z)?);
        let (t, dt, ddt) = (self.t.apply(0, phi)?, self.t.apply(1, phi)?, self.t.apply(2, phi)?);
        let r2 = r.sqr();
        let w2 = t.sqr() * (-self.c_w2 / 8.0) + t * self.w0;
        let w3 = m.sqr() * (-self.c_w3 / 8.0) + m * self.w0;
        Ok(
            -(ddt * m) / (r2 * 4.0) - t * ddm / 4.0 - r2 * dm.sqr() / 8.0 - dt.sqr() / (r2.sqr() * 8.0)
                + self.w1.apply(0, r)?
                + w2 / r2
                + w3,
        )
    }

    fn gauge(&self, x: &[Dual; 3]) -> Result<[Dual; 3]> {
        let r2 = x[0].sqr();
        Ok([
            c(0.0),
            r2 * self.m.apply(1, x[2])? / 2.0,
            self.t.apply(1, x[1])? / (r2 * 2.0),
        ])
    }

    fn field(&self, at: &CylPoint) -> Result<FieldTriple> {
        let r = at.r();
        let (m, t) = (self.m.derivs(at.z())?, self.t.derivs(at.phi())?);
        Ok(FieldTriple::new(
            t[2] / (2.0 * r * r) - r * r * m[2] / 2.0,
            t[1] / r.powi(3),
            r * m[1],
        ))
    }

    fn s_coeffs(&self, at: &CylPoint) -> Result<([f64; 3], [f64; 3])> {
        let r2 = at.r() * at.r();
        let (dm, dt) = (self.m.deriv(1, at.z())?, self.t.deriv(1, at.phi())?);
        Ok(([0.0, -r2 * dm, dt], [0.0, dm, -dt / r2]))
    }

    fn m_coeffs(&self, at: &CylPoint) -> Result<(f64, f64)> {
        let r2 = at.r() * at.r();
        let (m, t) = (self.m.derivs(at.z())?, self.t.derivs(at.phi())?);
        let w2 = -self.c_w2 * t[0] * t[0] / 8.0 + self.w0 * t[0];
        let w3 = -self.c_w3 * m[0] * m[0] / 8.0 + self.w0 * m[0];
        let m1 = r2 * r2 * m[1] * m[1] / 4.0 - t[1] * t[1] / (2.0 * r2) - m[0] * t[2] / 2.0 + 2.0 * w2;
        let m2 = -r2 * m[1] * m[1] / 2.0 + t[1] * t[1] / (4.0 * r2 * r2) - m[2] * t[0] / 2.0 + 2.0 * w3;
        Ok((m1, m2))
    }
}

/// Arbitrary `mu(Z)` and `rho(r)`.
struct AxialMuRho {
    mu: Function1D,
    rho: Function1D,
    w1: Function1D,
    w3: Function1D,
}

impl Model for AxialMuRho {
    fn potential(&self, x: &[Dual; 3]) -> Result<Dual> {
        let (r2, mu, rho) = (x[0].sqr(), self.mu.apply(0, x[2])?, self.rho.apply(0, x[0])?);
        Ok(self.w1.apply(0, x[0])? - r2 * mu.sqr() / 8.0 + rho * mu / 4.0 + self.w3.apply(0, x[2])?)
    }

    fn gauge(&self, x: &[Dual; 3]) -> Result<[Dual; 3]> {
        let a_phi = x[0].sqr() * self.mu.apply(0, x[2])? / 2.0 - self.rho.apply(0, x[0])? / 2.0;
        Ok([c(0.0), a_phi, c(0.0)])
    }

    fn field(&self, at: &CylPoint) -> Result<FieldTriple> {
        let r = at.r();
        let mu = self.mu.derivs(at.z())?;
        Ok(FieldTriple::new(
            -r * r * mu[1] / 2.0,
            0.0,
            r * mu[0] - self.rho.deriv(1, r)? / 2.0,
        ))
    }

    fn s_coeffs(&self, at: &CylPoint) -> Result<([f64; 3], [f64; 3])> {
        let r = at.r();
        let (mu, rho) = (self.mu.eval(at.z())?, self.rho.eval(r)?);
        Ok(([0.0, rho - r * r * mu, 0.0], [0.0, mu, 0.0]))
    }

    fn m_coeffs(&self, at: &CylPoint) -> Result<(f64, f64)> {
        let r2 = at.r() * at.r();
        let (mu, rho) = (self.mu.eval(at.z())?, self.rho.eval(at.r())?);
        let m1 = r2 * r2 * mu * mu / 4.0 - r2 * mu * rho / 2.0 + rho * rho / 4.0;
        let m2 = -r2 * mu * mu / 2.0 + mu * rho / 2.0 + 2.0 * self.w3.eval(at.z())?;
        Ok((m1, m2))
    }

    fn linear_shifts(&self, at: &CylPoint) -> Result<[Option<f64>; 2]> {
        let r = at.r();
        let (mu, rho) = (self.mu.eval(at.z())?, self.rho.eval(r)?);
        Ok([Some((rho - r * r * mu) / 2.0), None])
    }
}

/// Arbitrary `tau(phi)` and `sigma(r)`.
struct TauSigma {
    tau: Function1D,
    sigma: Function1D,
    w1: Function1D,
    w2: Function1D,
}

impl Model for TauSigma {
    fn potential(&self, x: &[Dual; 3]) -> Result<Dual> {
        let r2 = x[0].sqr();
        let (tau, sigma) = (self.tau.apply(0, x[1])?, self.sigma.apply(0, x[0])?);
        Ok(self.w1.apply(0, x[0])? - tau.sqr() / (r2.sqr() * 8.0)
            + tau * sigma / (r2 * 4.0)
            + self.w2.apply(0, x[1])? / r2)
    }

    fn gauge(&self, x: &[Dual; 3]) -> Result<[Dual; 3]> {
        let a_z = self.tau.apply(0, x[1])? / (x[0].sqr() * 2.0) - self.sigma.apply(0, x[0])? / 2.0;
        Ok([c(0.0), c(0.0), a_z])
    }

    fn field(&self, at: &CylPoint) -> Result<FieldTriple> {
        let r = at.r();
        let tau = self.tau.derivs(at.phi())?;
        Ok(FieldTriple::new(
            tau[1] / (2.0 * r * r),
            tau[0] / r.powi(3) + self.sigma.deriv(1, r)? / 2.0,
            0.0,
        ))
    }

    fn s_coeffs(&self, at: &CylPoint) -> Result<([f64; 3], [f64; 3])> {
        let r = at.r();
        let (tau, sigma) = (self.tau.eval(at.phi())?, self.sigma.eval(r)?);
        Ok(([0.0, 0.0, tau], [0.0, 0.0, sigma - tau / (r * r)]))
    }

    fn m_coeffs(&self, at: &CylPoint) -> Result<(f64, f64)> {
        let r = at.r();
        let (tau, sigma) = (self.tau.eval(at.phi())?, self.sigma.eval(r)?);
        let q = sigma - tau / (r * r);
        Ok((tau / 2.0 * q + 2.0 * self.w2.eval(at.phi())?, q * q / 4.0))
    }

    fn linear_shifts(&self, at: &CylPoint) -> Result<[Option<f64>; 2]> {
        let r = at.r();
        let (tau, sigma) = (self.tau.eval(at.phi())?, self.sigma.eval(r)?);
        Ok([None, Some((sigma - tau / (r * r)) / 2.0)])
    }
}

/// Only `rho(r)`.
struct PolarXFree {
    rho: Function1D,
    w1: Function1D,
    w3: Function1D,
}

impl Model for PolarXFree {
    fn potential(&self, x: &[Dual; 3]) -> Result<Dual> {
        Ok(self.w1.apply(0, x[0])? + self.w3.apply(0, x[2])?)
    }

    fn gauge(&self, x: &[Dual; 3]) -> Result<[Dual; 3]> {
        Ok([c(0.0), -self.rho.apply(0, x[0])? / 2.0, c(0.0)])
    }

    fn field(&self, at: &CylPoint) -> Result<FieldTriple> {
        Ok(FieldTriple::new(0.0, 0.0, -self.rho.deriv(1, at.r())? / 2.0))
    }

    fn s_coeffs(&self, at: &CylPoint) -> Result<([f64; 3], [f64; 3])> {
        Ok(([0.0, self.rho.eval(at.r())?, 0.0], [0.0; 3]))
    }

    fn m_coeffs(&self, at: &CylPoint) -> Result<(f64, f64)> {
        let rho = self.rho.eval(at.r())?;
        Ok((rho * rho / 4.0, 2.0 * self.w3.eval(at.z())?))
    }
}

/// Only `sigma(r)`.
struct SigmaOnly {
    sigma: Function1D,
    w1: Function1D,
    w2: Function1D,
}

impl Model for SigmaOnly {
    fn potential(&self, x: &[Dual; 3]) -> Result<Dual> {
        Ok(self.w1.apply(0, x[0])? + self.w2.apply(0, x[1])? / x[0].sqr())
    }

    fn gauge(&self, x: &[Dual; 3]) -> Result<[Dual; 3]> {
        Ok([c(0.0), c(0.0), -self.sigma.apply(0, x[0])? / 2.0])
    }

    fn field(&self, at: &CylPoint) -> Result<FieldTriple> {
        Ok(FieldTriple::new(0.0, self.sigma.deriv(1, at.r())? / 2.0, 0.0))
    }

    fn s_coeffs(&self, at: &CylPoint) -> Result<([f64; 3], [f64; 3])> {
        Ok(([0.0; 3], [0.0, 0.0, self.sigma.eval(at.r())?]))
    }

    fn m_coeffs(&self, at: &CylPoint) -> Result<(f64, f64)> {
        let sigma = self.sigma.eval(at.r())?;
        Ok((2.0 * self.w2.eval(at.phi())?, sigma * sigma / 4.0))
    }
}
