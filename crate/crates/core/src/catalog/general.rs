//! Systems given directly by their auxiliary functions, accepted through the
//! reduced determining system, and the shared rank-3 rejection.

use std::f64::consts::TAU;
use std::sync::{Arc, OnceLock};

use super::params::ParamSet;
use super::{FamilyId, Model, SystemInstance};
use crate::auxfields::{reduced_residuals, AuxQuintuple, AuxValues, REDUCED_NAMES};
use crate::error::{Error, Result};
use crate::fd::Residual;
use crate::function::Function1D;
use crate::geometry::{CylPoint, FieldTriple};
use crate::jet::Dual;

/// Normalized tolerance of the residual gate.
pub const GATE_TOL: f64 = 1e-6;

const GL_NODES: usize = 16;
const GL_PANELS: usize = 4;

/// Rejects quintuples where `psi'`, `mu` and `sigma` are all non-vanishing.
pub fn check_rank3(aux: &AuxQuintuple) -> Result<()> {
    let dpsi = aux.psi.derivative();
    let phis = (0..16).map(|i| TAU * i as f64 / 16.0 + 0.1);
    let zs = (0..9).map(|i| -1.0 + 0.25 * i as f64);
    let rs = (0..9).map(|i| 0.5 + 0.1875 * i as f64);
    let a = nonvanishing(&dpsi, phis);
    let b = nonvanishing(&aux.mu, zs);
    let c = nonvanishing(&aux.sigma, rs);
    if a && b && c {
        return Err(Error::Rank3(format!(
            "psi' = {}, mu = {} and sigma = {} are all non-vanishing",
            dpsi.describe(),
            aux.mu.describe(),
            aux.sigma.describe()
        )));
    }
    Ok(())
}

fn nonvanishing(f: &Function1D, xs: impl Iterator<Item = f64>) -> bool {
    if f.is_identically_zero() {
        return false;
    }
    xs.into_iter().any(|x| matches!(f.eval(x), Ok(v) if v.abs() > 1e-14))
}

/// Builds a system from auxiliary functions and `W = W1(r) + W2(phi)/r^2 + W3(Z)`.
///
/// Checks, in order: rank 3, periodicity of `psi`, `tau`, `W2`, the reduced
/// residual gate on the standard grid, single-valuedness of `m1`, `m2`.
pub fn build_from_aux(aux: AuxQuintuple, w: [Function1D; 3]) -> Result<SystemInstance> {
    build_general(aux, w, ParamSet::new())
}

pub(super) fn build_general(aux: AuxQuintuple, w: [Function1D; 3], params: ParamSet) -> Result<SystemInstance> {
    check_rank3(&aux)?;
    let aux = AuxQuintuple::new(aux.rho, aux.sigma, aux.tau, aux.psi, aux.mu)?;
    w[1].check_periodic("W2", 16, 1e-10)?;
    let model = AuxModel { aux: aux.clone(), w };
    model.gate()?;
    model.check_single_valued()?;
    Ok(SystemInstance::new(
        FamilyId::F8,
        params,
        aux,
        Arc::new(model),
        [false, false],
        vec!["m1, m2 obtained by path quadrature from the point (1, 0, 0)".to_string()],
    ))
}

struct AuxModel {
    aux: AuxQuintuple,
    w: [Function1D; 3],
}

impl AuxModel {
    fn w_dual(&self, x: &[Dual; 3]) -> Result<Dual> {
        Ok(self.w[0].apply(0, x[0])? + self.w[1].apply(0, x[1])? / x[0].sqr() + self.w[2].apply(0, x[2])?)
    }

    fn w_at(&self, at: &CylPoint) -> Result<Dual> {
        self.w_dual(&[
            Dual::coordinate(at.r(), 0),
            Dual::coordinate(at.phi(), 1),
            Dual::coordinate(at.z(), 2),
        ])
    }

    fn gate(&self) -> Result<()> {
        let w = |at: &CylPoint| Ok(self.w_at(at)?.v);
        for at in gate_grid() {
            let red = reduced_residuals(&self.aux, &w, &at)?;
            let (i, v) = red.max_normalized();
            if !(v <= GATE_TOL) {
                return Err(Error::ResidualGate {
                    equation: format!(
                        "{} at (r, phi, Z) = ({}, {}, {})",
                        REDUCED_NAMES[i],
                        at.r(),
                        at.phi(),
                        at.z()
                    ),
                    residual: v,
                    tolerance: GATE_TOL,
                });
            }
            let vals = self.aux.values(&at)?;
            let mu_psi = Residual::from_terms(&[vals.mu[0] * vals.psi[2]]).normalized();
            if mu_psi > GATE_TOL {
                return Err(Error::ResidualGate {
                    equation: format!("mu psi'' = 0 at (r, phi, Z) = ({}, {}, {})", at.r(), at.phi(), at.z()),
                    residual: mu_psi,
                    tolerance: GATE_TOL,
                });
            }
        }
        Ok(())
    }

    /// The loop integral of `grad m` around the axis must vanish.
    fn check_single_valued(&self) -> Result<()> {
        for r in [0.5, 1.0, 2.0] {
            for z in [-1.0, 0.0, 1.0] {
                let (loop_int, scale) = self.leg(1, [r, 0.0, z], TAU)?;
                for i in 0..2 {
                    let v = loop_int[i].abs() / scale[i].max(1.0);
                    if v > GATE_TOL {
                        return Err(Error::ResidualGate {
                            equation: format!("single-valuedness of m{} at r = {r}, Z = {z}", i + 1),
                            residual: v,
                            tolerance: GATE_TOL,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// `(grad m1, grad m2)` from the first-order determining equations.
    fn grad_m(&self, at: &CylPoint) -> Result<([f64; 3], [f64; 3])> {
        let vals: AuxValues = self.aux.values(at)?;
        let (s1, s2) = vals.s_coeffs();
        let b = vals.b_field().to_array();
        let gw = self.w_at(at)?.d;
        let r2 = at.r() * at.r();
        let g1 = [
            s1[2] * b[1] - s1[1] * b[2],
            s1[0] * b[2] - s1[2] * b[0] + 2.0 * r2 * gw[1],
            s1[1] * b[0] - s1[0] * b[1],
        ];
        let g2 = [
            s2[2] * b[1] - s2[1] * b[2],
            s2[0] * b[2] - s2[2] * b[0],
            s2[1] * b[0] - s2[0] * b[1] + 2.0 * gw[2],
        ];
        Ok((g1, g2))
    }

    /// Integral of `d m / d x_axis` from `start` to `start[axis] = end`,
    /// with the integral of its absolute value as a scale.
    fn leg(&self, axis: usize, start: [f64; 3], end: f64) -> Result<([f64; 2], [f64; 2])> {
        let a = start[axis];
        let mut acc = [0.0; 2];
        let mut abs = [0.0; 2];
        if a == end {
            return Ok((acc, abs));
        }
        let (nodes, weights) = gauss_legendre();
        let width = (end - a) / GL_PANELS as f64;
        for p in 0..GL_PANELS {
            let (lo, hi) = (a + width * p as f64, a + width * (p + 1) as f64);
            let (mid, half) = ((lo + hi) / 2.0, (hi - lo) / 2.0);
            for (x, wt) in nodes.iter().zip(weights) {
                let mut q = start;
                q[axis] = mid + half * x;
                let at = CylPoint::new(q[0], q[1], q[2])?;
                let (g1, g2) = self.grad_m(&at)?;
                for (i, g) in [g1[axis], g2[axis]].into_iter().enumerate() {
                    acc[i] += half * wt * g;
                    abs[i] += (half * wt * g).abs();
                }
            }
        }
        Ok((acc, abs))
    }
}

impl Model for AuxModel {
    fn potential(&self, x: &[Dual; 3]) -> Result<Dual> {
        self.w_dual(x)
    }

    fn gauge(&self, x: &[Dual; 3]) -> Result<[Dual; 3]> {
        let (r, phi, z) = (x[0], x[1], x[2]);
        let a = &self.aux;
        let psi_sum = a.psi.apply(0, phi)? + a.psi.apply(2, phi)?;
        let a_phi = psi_sum / (r * 2.0) + r.sqr() * a.mu.apply(0, z)? / 2.0 - a.rho.apply(0, r)? / 2.0;
        let a_z = a.tau.apply(0, phi)? / (r.sqr() * 2.0) - a.sigma.apply(0, r)? / 2.0;
        Ok([Dual::constant(0.0), a_phi, a_z])
    }

    fn field(&self, at: &CylPoint) -> Result<FieldTriple> {
        Ok(self.aux.values(at)?.b_field())
    }

    fn s_coeffs(&self, at: &CylPoint) -> Result<([f64; 3], [f64; 3])> {
        Ok(self.aux.values(at)?.s_coeffs())
    }

    /// Path quadrature `(1, 0, 0) -> (r, 0, 0) -> (r, phi, 0) -> (r, phi, Z)`.
    fn m_coeffs(&self, at: &CylPoint) -> Result<(f64, f64)> {
        let (r, phi, z) = (at.r(), at.phi(), at.z());
        let (l1, _) = self.leg(0, [1.0, 0.0, 0.0], r)?;
        let (l2, _) = self.leg(1, [r, 0.0, 0.0], phi)?;
        let (l3, _) = self.leg(2, [r, phi, 0.0], z)?;
        Ok((l1[0] + l2[0] + l3[0], l1[1] + l2[1] + l3[1]))
    }
}

/// The 5 x 8 x 5 grid `r in [0.5, 2]`, `phi in [0, 2pi)`, `Z in [-1, 1]`.
pub(crate) fn gate_grid() -> impl Iterator<Item = CylPoint> {
    (0..5).flat_map(|i| {
        (0..8).flat_map(move |j| {
            (0..5).map(move |k| {
                let r = 0.5 + 1.5 * i as f64 / 4.0;
                let phi = TAU * j as f64 / 8.0;
                let z = -1.0 + 2.0 * k as f64 / 4.0;
                CylPoint::new(r, phi, z).expect("grid point")
            })
        })
    })
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre() -> &'static ([f64; GL_NODES], [f64; GL_NODES]) {
    static RULE: OnceLock<([f64; GL_NODES], [f64; GL_NODES])> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_NODES;
        let mut x = [0.0; GL_NODES];
        let mut w = [0.0; GL_NODES];
        for i in 0..n {
            let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, t);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
                let dt = p1 / dp;
                t -= dt;
                if dt.abs() < 1e-16 {
                    break;
                }
            }
            x[i] = t;
            w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
        }
        (x, w)
    })
}
