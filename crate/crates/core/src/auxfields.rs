//! The auxiliary-function ansatz for the magnetic field and the integral
//! coefficients, the linear system `M grad W = (0, 0, alpha)` and the residuals
//! of the reduced determining system.
//!
//! The five auxiliary functions are `rho(r)`, `sigma(r)`, `tau(phi)`,
//! `psi(phi)` and `mu(Z)`. In terms of them
//!
//! ```text
//! s1 = (psi', -psi/r - r^2 mu + rho, tau)      s2 = (0, mu, -tau/r^2 + sigma)
//! B^r   = -r^2 mu'/2 + tau'/(2 r^2)
//! B^phi = tau/r^3 + sigma'/2
//! B^Z   = -psi/(2 r^2) + r mu - rho'/2 - psi''/(2 r^2)
//! ```

use crate::error::{domain, Result};
use crate::fd::{mixed, partial, scaled_step, Residual};
use crate::function::Function1D;
use crate::geometry::{r_min, CylPoint, FieldTriple};

/// Finite-difference step of the reduced residuals, scaled by `max(1, |x|)`.
pub const REDUCED_FD_STEP: f64 = 1e-4;

/// Periodicity tolerance for `tau` and `psi`.
pub const PERIODIC_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct AuxQuintuple {
    pub rho: Function1D,
    pub sigma: Function1D,
    pub tau: Function1D,
    pub psi: Function1D,
    pub mu: Function1D,
}

impl Default for AuxQuintuple {
    fn default() -> Self {
        Self::zero()
    }
}

impl AuxQuintuple {
    /// Builds the quintuple and checks that `tau` and `psi` are 2pi-periodic.
    pub fn new(rho: Function1D, sigma: Function1D, tau: Function1D, psi: Function1D, mu: Function1D) -> Result<Self> {
        let aux = Self::new_unchecked(rho, sigma, tau, psi, mu);
        aux.tau.check_periodic("tau", 16, PERIODIC_TOL)?;
        aux.psi.check_periodic("psi", 16, PERIODIC_TOL)?;
        Ok(aux)
    }

    /// Builds the quintuple without the periodicity gate, for probing
    /// configurations that are not valid on the full cylinder.
    pub fn new_unchecked(rho: Function1D, sigma: Function1D, tau: Function1D, psi: Function1D, mu: Function1D) -> Self {
        Self {
            rho,
            sigma,
            tau,
            psi,
            mu,
        }
    }

    pub fn zero() -> Self {
        Self::new_unchecked(
            Function1D::zero(),
            Function1D::zero(),
            Function1D::zero(),
            Function1D::zero(),
            Function1D::zero(),
        )
    }

    /// All values and derivatives needed by the reduced system at one point.
    pub fn values(&self, at: &CylPoint) -> Result<AuxValues> {
        at.require_r_min(r_min())?;
        Ok(AuxValues {
            r: at.r(),
            rho: self.rho.derivs(at.r())?,
            sigma: self.sigma.derivs(at.r())?,
            tau: self.tau.derivs(at.phi())?,
            psi: self.psi.derivs(at.phi())?,
            mu: self.mu.derivs(at.z())?,
        })
    }
}

/// Values `[f, f', f'', f''']` of each auxiliary function at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxValues {
    pub r: f64,
    pub rho: [f64; 4],
    pub sigma: [f64; 4],
    pub tau: [f64; 4],
    pub psi: [f64; 4],
    pub mu: [f64; 4],
}

impl AuxValues {
    pub fn s_coeffs(&self) -> ([f64; 3], [f64; 3]) {
        let r = self.r;
        let s1 = [
            self.psi[1],
            -self.psi[0] / r - r * r * self.mu[0] + self.rho[0],
            self.tau[0],
        ];
        let s2 = [0.0, self.mu[0], -self.tau[0] / (r * r) + self.sigma[0]];
        (s1, s2)
    }

    pub fn b_field(&self) -> FieldTriple {
        let r = self.r;
        let r2 = r * r;
        FieldTriple {
            b_r: -r2 * self.mu[1] / 2.0 + self.tau[1] / (2.0 * r2),
            b_phi: self.tau[0] / (r2 * r) + self.sigma[1] / 2.0,
            b_z: -self.psi[0] / (2.0 * r2) + r * self.mu[0] - self.rho[1] / 2.0 - self.psi[2] / (2.0 * r2),
        }
    }

    pub fn matrix(&self) -> MatrixM {
        let r = self.r;
        let r2 = r * r;
        let (mu, tau, psi) = (self.mu[0], self.tau[0], self.psi[0]);
        MatrixM([
            [0.0, r2 * mu, r2 * self.sigma[0] - tau],
            [self.psi[1], self.rho[0] - r2 * mu - psi / r, tau],
            [0.0, 4.0 * r.powi(7) * mu, -4.0 * r.powi(5) * tau],
        ])
    }

    pub fn det_m(&self) -> f64 {
        4.0 * self.r.powi(9) * self.psi[1] * self.mu[0] * self.sigma[0]
    }

    /// Summands of the printed alpha expression, fully expanded.
    pub fn alpha_terms(&self) -> [f64; 15] {
        let r = self.r;
        let (rho, drho) = (self.rho[0], self.rho[1]);
        let (sig, dsig) = (self.sigma[0], self.sigma[1]);
        let (tau, dtau) = (self.tau[0], self.tau[1]);
        let (psi, dpsi) = (self.psi[0], self.psi[1]);
        let (mu, dmu) = (self.mu[0], self.mu[1]);
        let (r2, r3, r4, r5, r6) = (r * r, r.powi(3), r.powi(4), r.powi(5), r.powi(6));
        [
            dpsi * r5 * sig * dsig,
            -dpsi * r3 * tau * dsig,
            dpsi * r5 * mu * drho,
            -2.0 * dpsi * tau * tau,
            2.0 * dpsi * r2 * sig * tau,
            -dpsi * r6 * mu * mu,
            -dpsi * r4 * mu * rho,
            2.0 * dpsi * r3 * mu * psi,
            dtau * r * rho * tau,
            -dtau * psi * tau,
            dtau * r5 * sig * mu,
            -dtau * r3 * sig * rho,
            dtau * r2 * sig * psi,
            -r5 * dmu * tau * rho,
            r4 * dmu * tau * psi,
        ]
    }

    pub fn alpha(&self) -> f64 {
        self.alpha_terms().iter().sum()
    }

    /// The two pure auxiliary-function conditions.
    pub fn reduced_a(&self) -> [Residual; 2] {
        let r = self.r;
        let (dpsi, dtau) = (self.psi[1], self.tau[1]);
        [
            Residual::from_terms(&[
                dpsi * r.powi(3) * self.sigma[1],
                2.0 * dpsi * self.tau[0],
                -dtau * r * self.rho[0],
                dtau * self.psi[0],
            ]),
            Residual::from_terms(&[self.mu[0] * dpsi, r.powi(3) * self.sigma[0] * self.mu[1]]),
        ]
    }
}

/// Coefficient matrix of the linear system for `(W_r, W_phi, W_Z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatrixM(pub [[f64; 3]; 3]);

impl MatrixM {
    /// Direct cofactor expansion.
    pub fn determinant(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn mul_vec(&self, v: [f64; 3]) -> [f64; 3] {
        let m = &self.0;
        [0, 1, 2].map(|i| m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2])
    }
}

pub fn s_coeffs_from_aux(aux: &AuxQuintuple, at: &CylPoint) -> Result<([f64; 3], [f64; 3])> {
    Ok(aux.values(at)?.s_coeffs())
}

pub fn b_field_from_aux(aux: &AuxQuintuple, at: &CylPoint) -> Result<FieldTriple> {
    Ok(aux.values(at)?.b_field())
}

pub fn matrix_m(aux: &AuxQuintuple, at: &CylPoint) -> Result<MatrixM> {
    Ok(aux.values(at)?.matrix())
}

pub fn det_m(aux: &AuxQuintuple, at: &CylPoint) -> Result<f64> {
    Ok(aux.values(at)?.det_m())
}

pub fn alpha(aux: &AuxQuintuple, at: &CylPoint) -> Result<f64> {
    Ok(aux.values(at)?.alpha())
}

/// Names of the eight reduced residuals, in report order.
pub const REDUCED_NAMES: [&str; 8] = [
    "reducedAa",
    "reducedAb",
    "reducedB.rphi",
    "reducedB.phiZ",
    "reducedB.rZ",
    "matrix.row1",
    "matrix.row2",
    "matrix.row3",
];

/// Raw and normalized residuals of the reduced determining system.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedResiduals {
    pub residuals: [Residual; 8],
}

impl ReducedResiduals {
    pub fn normalized(&self) -> [f64; 8] {
        self.residuals.map(|r| r.normalized())
    }

    pub fn raw(&self) -> [f64; 8] {
        self.residuals.map(|r| r.raw)
    }

    pub fn max_normalized(&self) -> (usize, f64) {
        self.normalized()
            .iter()
            .copied()
            .enumerate()
            .fold(
                (0, 0.0),
                |best, (i, v)| if v > best.1 || v.is_nan() { (i, v) } else { best },
            )
    }
}

/// Residuals of the reduced system for the potential `w` at `at`. The aux
/// derivatives are analytic; all derivatives of `w` are fourth-order
/// central differences with step `1e-4 max(1, |x|)`.
pub fn reduced_residuals<F>(aux: &AuxQuintuple, w: &F, at: &CylPoint) -> Result<ReducedResiduals>
where
    F: Fn(&CylPoint) -> Result<f64>,
{
    let v = aux.values(at)?;
    let x = [at.r(), at.phi(), at.z()];
    let h = x.map(|c| scaled_step(REDUCED_FD_STEP, c));
    if x[0] - 2.0 * h[0] < r_min() {
        return Err(domain(format!(
            "r = {} is too close to r_min for the difference stencil",
            x[0]
        )));
    }
    let wf = |y: [f64; 3]| w(&CylPoint::new(y[0], y[1], y[2])?);
    let grad = [
        partial(&wf, x, 0, h[0])?,
        partial(&wf, x, 1, h[1])?,
        partial(&wf, x, 2, h[2])?,
    ];
    let w_rphi = mixed(&wf, x, 0, 1, h[0], h[1])?;
    let w_phiz = mixed(&wf, x, 1, 2, h[1], h[2])?;
    let w_rz = mixed(&wf, x, 0, 2, h[0], h[2])?;

    let r = v.r;
    let (rho, drho, ddrho) = (v.rho[0], v.rho[1], v.rho[2]);
    let (sig, dsig) = (v.sigma[0], v.sigma[1]);
    let (tau, dtau, ddtau) = (v.tau[0], v.tau[1], v.tau[2]);
    let (psi, dpsi, ddpsi, dddpsi) = (v.psi[0], v.psi[1], v.psi[2], v.psi[3]);
    let (mu, dmu, ddmu) = (v.mu[0], v.mu[1], v.mu[2]);
    let (r2, r3, r4, r5) = (r * r, r.powi(3), r.powi(4), r.powi(5));
    let c = 1.0 / (4.0 * r5);

    let [ra, rb] = v.reduced_a();
    let b_rphi = Residual::from_terms(&[
        w_rphi,
        2.0 * grad[1] / r,
        -c * dpsi * (-3.0 * ddpsi),
        -c * dpsi * r3 * ddrho,
        c * dpsi * r3 * mu,
        c * dpsi * r2 * drho,
        -c * dpsi * r * rho,
        c * dpsi * 4.0 * psi,
        -c * dtau * r3 * dsig,
        -c * dtau * 2.0 * tau,
        c * 2.0 * r4 * tau * dmu,
        c * dddpsi * psi,
        -c * dddpsi * r * rho,
    ]);
    let b_phiz = Residual::from_terms(&[
        w_phiz,
        ddmu * tau / 4.0,
        -r2 * ddmu * sig / 4.0,
        ddtau * mu / (4.0 * r2),
    ]);
    let b_rz = Residual::from_terms(&[
        w_rz,
        2.0 * r4 * dmu * mu / (4.0 * r3),
        -r3 * dmu * drho / (4.0 * r3),
        -r * dmu * psi / (4.0 * r3),
        -2.0 * mu * dtau / (4.0 * r3),
    ]);
    let row1 = Residual::from_terms(&[r2 * mu * grad[1], r2 * sig * grad[2], -tau * grad[2]]);
    let row2 = Residual::from_terms(&[
        dpsi * grad[0],
        rho * grad[1],
        -r2 * mu * grad[1],
        -psi / r * grad[1],
        tau * grad[2],
    ]);
    let mut row3_terms = vec![4.0 * r.powi(7) * mu * grad[1], -4.0 * r5 * tau * grad[2]];
    row3_terms.extend(v.alpha_terms().iter().map(|t| -t));
    let row3 = Residual::from_terms(&row3_terms);

    Ok(ReducedResiduals {
        residuals: [ra, rb, b_rphi, b_phiz, b_rz, row1, row2, row3],
    })
}
