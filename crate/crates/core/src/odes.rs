//! Fixed-step RK4 solvers for the nonlinear profile equations.
//!
//! Both profile equations are first-order-squared:
//!
//! ```text
//! gamma gamma'^2 + 4 gamma^3 - 4 beta1 gamma + f1 gamma^2 = beta2
//! y'^2 = C y^3 + C1 y^2 + C2 y + C3
//! ```
//!
//! They are integrated in differentiated second-order form, which passes
//! through turning points without branch choices, and the original relation
//! is tracked as a monitor. Higher derivatives at any point come from a
//! Taylor recursion on the second-order equation.

use std::sync::Arc;

use crate::error::{domain, Error, Result};
use crate::function::{Function1D, Profile};
use crate::jet::{Jet, JET_LEN};

/// Steps per span.
pub const DEFAULT_STEPS: usize = 10_000;
/// Admissible monitor residual of the initial data.
pub const INITIAL_DATA_TOL: f64 = 1e-10;
/// Integration stops (with a truncation flag) once the monitor exceeds this.
pub const MONITOR_TOL: f64 = 1e-9;

/// The second-order profile equation being integrated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileEquation {
    /// `gamma'' = -(gamma'^2 + 12 gamma^2 - 4 beta1 + 2 f1 gamma) / (2 gamma)`
    Gamma { f1: f64, beta1: f64, beta2: f64 },
    /// `y'' = (3 C y^2 + 2 C1 y + C2) / 2`
    Cubic { c: f64, c1: f64, c2: f64, c3: f64 },
}

impl ProfileEquation {
    pub fn accel(&self, y: f64, dy: f64) -> f64 {
        match *self {
            ProfileEquation::Gamma { f1, beta1, .. } => {
                -(dy * dy + 12.0 * y * y - 4.0 * beta1 + 2.0 * f1 * y) / (2.0 * y)
            }
            ProfileEquation::Cubic { c, c1, c2, .. } => (3.0 * c * y * y + 2.0 * c1 * y + c2) / 2.0,
        }
    }

    fn accel_jet(&self, y: Jet, dy: Jet) -> Jet {
        match *self {
            ProfileEquation::Gamma { f1, beta1, .. } => {
                -(dy * dy + y * y * 12.0 - 4.0 * beta1 + y * (2.0 * f1)) / (y * 2.0)
            }
            ProfileEquation::Cubic { c, c1, c2, .. } => (y * y * (3.0 * c) + y * (2.0 * c1) + c2) / 2.0,
        }
    }

    /// Residual of the first-order-squared relation.
    pub fn monitor(&self, y: f64, dy: f64) -> f64 {
        match *self {
            ProfileEquation::Gamma { f1, beta1, beta2 } => {
                y * dy * dy + 4.0 * y.powi(3) - 4.0 * beta1 * y + f1 * y * y - beta2
            }
            ProfileEquation::Cubic { c, c1, c2, c3 } => dy * dy - (c * y.powi(3) + c1 * y * y + c2 * y + c3),
        }
    }

    /// `y'^2` implied by the first-order relation at `y` (the radicand).
    pub fn slope_squared(&self, y: f64) -> f64 {
        match *self {
            ProfileEquation::Gamma { f1, beta1, beta2 } => (beta2 + 4.0 * beta1 * y - 4.0 * y.powi(3) - f1 * y * y) / y,
            ProfileEquation::Cubic { c, c1, c2, c3 } => c * y.powi(3) + c1 * y * y + c2 * y + c3,
        }
    }

    /// Full Taylor jet at a point from the value and first derivative.
    pub fn jet_from(&self, y: f64, dy: f64) -> Jet {
        let mut c = [0.0; JET_LEN];
        c[0] = y;
        c[1] = dy;
        for k in 0..JET_LEN - 2 {
            let j = Jet::from_coeffs(c);
            let a = self.accel_jet(j, j.derivative());
            c[k + 2] = a.coeff(k) / ((k + 1) * (k + 2)) as f64;
        }
        Jet::from_coeffs(c)
    }

    fn rk4(&self, y: f64, dy: f64, h: f64) -> (f64, f64) {
        let k1 = (dy, self.accel(y, dy));
        let k2 = (dy + 0.5 * h * k1.1, self.accel(y + 0.5 * h * k1.0, dy + 0.5 * h * k1.1));
        let k3 = (dy + 0.5 * h * k2.1, self.accel(y + 0.5 * h * k2.0, dy + 0.5 * h * k2.1));
        let k4 = (dy + h * k3.1, self.accel(y + h * k3.0, dy + h * k3.1));
        (
            y + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
            dy + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
        )
    }
}

/// Why a solution ended before the requested span.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TruncationReason {
    PositivityLoss,
    MonitorExceeded,
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    /// Last abscissa that belongs to the solution.
    pub at: f64,
    pub reason: TruncationReason,
    /// Value at the first rejected step.
    pub value: f64,
}

/// Dense numerical solution of a profile equation.
#[derive(Debug, Clone)]
pub struct ProfileSolution {
    equation: ProfileEquation,
    x0: f64,
    h: f64,
    ys: Vec<f64>,
    dys: Vec<f64>,
    monitor: Vec<f64>,
    truncation: Option<Truncation>,
    richardson: f64,
}

impl ProfileSolution {
    pub fn equation(&self) -> ProfileEquation {
        self.equation
    }

    pub fn start(&self) -> f64 {
        self.x0
    }

    /// End of the valid span (earlier than requested when truncated).
    pub fn end(&self) -> f64 {
        self.x0 + self.h * (self.ys.len() - 1) as f64
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.ys.len()).map(|i| (self.x0 + self.h * i as f64, self.ys[i], self.dys[i]))
    }

    pub fn truncation(&self) -> Option<Truncation> {
        self.truncation
    }

    pub fn is_truncated(&self) -> bool {
        self.truncation.is_some()
    }

    /// Fails with `PositivityLoss` if the solution stopped because the profile
    /// left the positive half-line, or with a domain error for other truncations.
    pub fn require_full_span(&self) -> Result<()> {
        match self.truncation {
            None => Ok(()),
            Some(t) if t.reason == TruncationReason::PositivityLoss => Err(Error::PositivityLoss {
                at: t.at,
                value: t.value,
            }),
            Some(t) => Err(domain(format!(
                "profile solution truncated at {} ({:?})",
                t.at, t.reason
            ))),
        }
    }

    /// Monitor residual at every node.
    pub fn monitor_series(&self) -> &[f64] {
        &self.monitor
    }

    pub fn max_monitor(&self) -> f64 {
        self.monitor.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Estimated global error at the end of the span from a half-step rerun;
    /// NaN when the rerun cannot reach the end of the solved part.
    pub fn richardson_error(&self) -> f64 {
        self.richardson
    }

    /// Sign of the first derivative at each node (`-1`, `0` or `1`).
    pub fn branch_series(&self) -> Vec<i8> {
        self.dys
            .iter()
            .map(|&d| {
                if d > 0.0 {
                    1
                } else if d < 0.0 {
                    -1
                } else {
                    0
                }
            })
            .collect()
    }

    /// Points where the first derivative changes sign, located by bisection
    /// on the dense output.
    pub fn turning_points(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for i in 0..self.dys.len().saturating_sub(1) {
            let (a, b) = (self.dys[i], self.dys[i + 1]);
            if a == 0.0 {
                out.push(self.x0 + self.h * i as f64);
                continue;
            }
            if a * b < 0.0 {
                let (mut lo, mut hi) = (self.x0 + self.h * i as f64, self.x0 + self.h * (i + 1) as f64);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    let (_, d) = self.dense(mid);
                    if d * a > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                out.push(0.5 * (lo + hi));
            }
        }
        out
    }

    fn dense(&self, x: f64) -> (f64, f64) {
        let n = self.ys.len() - 1;
        let t = (x - self.x0) / self.h;
        let i = (t.floor().max(0.0) as usize).min(n);
        let xi = self.x0 + self.h * i as f64;
        if x == xi {
            return (self.ys[i], self.dys[i]);
        }
        self.equation.rk4(self.ys[i], self.dys[i], x - xi)
    }

    /// Value, first and second derivative at `x`.
    pub fn eval(&self, x: f64) -> Result<(f64, f64, f64)> {
        self.check_domain(x)?;
        let (y, dy) = self.dense(x);
        Ok((y, dy, self.equation.accel(y, dy)))
    }

    pub fn jet(&self, x: f64) -> Result<Jet> {
        self.check_domain(x)?;
        let (y, dy) = self.dense(x);
        Ok(self.equation.jet_from(y, dy))
    }

    fn check_domain(&self, x: f64) -> Result<()> {
        let (a, b) = (self.start(), self.end());
        let slack = 1e-12 * (1.0 + a.abs().max(b.abs()));
        if x.is_finite() && x >= a - slack && x <= b + slack {
            Ok(())
        } else {
            Err(domain(format!("{x} lies outside the solved span [{a}, {b}]")))
        }
    }

    /// The solution as a function-grammar profile.
    pub fn into_function(self, name: &str) -> Function1D {
        Function1D::from_profile(Arc::new(NamedSolution {
            name: name.to_string(),
            sol: self,
        }))
    }
}

struct NamedSolution {
    name: String,
    sol: ProfileSolution,
}

impl Profile for NamedSolution {
    fn jet(&self, x: f64) -> Result<Jet> {
        self.sol.jet(x)
    }

    fn describe(&self) -> String {
        format!("{} (numeric on [{}, {}])", self.name, self.sol.start(), self.sol.end())
    }
}

/// Halvings allowed inside one grid step before the solution is cut.
const MAX_SUBDIVISION: u32 = 24;

/// One grid step of RK4, split recursively while the step loses positivity
/// or the monitor. Fails with the reason and last value once the depth runs out.
fn advance(
    eq: &ProfileEquation,
    y: f64,
    dy: f64,
    h: f64,
    positive: bool,
    depth: u32,
) -> std::result::Result<(f64, f64), (TruncationReason, f64)> {
    let (ny, ndy) = eq.rk4(y, dy, h);
    let finite = ny.is_finite() && ndy.is_finite();
    if finite && !(positive && ny <= 0.0) && eq.monitor(ny, ndy).abs() <= MONITOR_TOL {
        return Ok((ny, ndy));
    }
    if depth < MAX_SUBDIVISION {
        let (my, mdy) = advance(eq, y, dy, h / 2.0, positive, depth + 1)?;
        return advance(eq, my, mdy, h / 2.0, positive, depth + 1);
    }
    let reason = if !finite {
        TruncationReason::NonFinite
    } else if positive && (ny <= 0.0 || dy < 0.0) {
        // stuck while heading into gamma = 0
        TruncationReason::PositivityLoss
    } else {
        TruncationReason::MonitorExceeded
    };
    Err((reason, ny))
}

fn integrate(eq: ProfileEquation, y0: f64, dy0: f64, span: (f64, f64), steps: usize) -> Result<ProfileSolution> {
    let (a, b) = span;
    if !(a.is_finite() && b.is_finite() && b > a) {
        return Err(domain(format!("invalid span [{a}, {b}]")));
    }
    if steps == 0 {
        return Err(domain("at least one step is required"));
    }
    let m0 = eq.monitor(y0, dy0);
    if !(m0.abs() <= INITIAL_DATA_TOL) {
        return Err(Error::InconsistentInitialData {
            residual: m0.abs(),
            tolerance: INITIAL_DATA_TOL,
        });
    }
    let positive = matches!(eq, ProfileEquation::Gamma { .. });
    if positive && y0 <= 0.0 {
        return Err(Error::PositivityLoss { at: a, value: y0 });
    }
    let h = (b - a) / steps as f64;
    let mut ys = Vec::with_capacity(steps + 1);
    let mut dys = Vec::with_capacity(steps + 1);
    let mut monitor = Vec::with_capacity(steps + 1);
    ys.push(y0);
    dys.push(dy0);
    monitor.push(m0);
    let (mut y, mut dy) = (y0, dy0);
    let mut truncation = None;
    for i in 0..steps {
        let (ny, ndy) = match advance(&eq, y, dy, h, positive, 0) {
            Ok(next) => next,
            Err((reason, value)) => {
                truncation = Some(Truncation {
                    at: a + h * i as f64,
                    reason,
                    value,
                });
                break;
            }
        };
        y = ny;
        dy = ndy;
        ys.push(y);
        dys.push(dy);
        monitor.push(eq.monitor(y, dy));
    }

    // Richardson estimate: rerun at half step over the solved part
    let n_done = ys.len() - 1;
    let richardson = if n_done > 0 {
        let (mut y2, mut dy2) = (y0, dy0);
        let mut reached = true;
        for _ in 0..2 * n_done {
            match advance(&eq, y2, dy2, h / 2.0, positive, 0) {
                Ok(next) => (y2, dy2) = next,
                Err(_) => {
                    reached = false;
                    break;
                }
            }
        }
        if reached {
            (y2 - y).abs() / 15.0
        } else {
            f64::NAN
        }
    } else {
        0.0
    };

    Ok(ProfileSolution {
        equation: eq,
        x0: a,
        h,
        ys,
        dys,
        monitor,
        truncation,
        richardson,
    })
}

/// Solves the gamma profile equation from `(gamma0, dgamma0)` at `phi_span.0`.
pub fn solve_gamma(
    f1: f64,
    beta1: f64,
    beta2: f64,
    gamma0: f64,
    dgamma0: f64,
    phi_span: (f64, f64),
) -> Result<ProfileSolution> {
    solve_gamma_with_steps(f1, beta1, beta2, gamma0, dgamma0, phi_span, DEFAULT_STEPS)
}

pub fn solve_gamma_with_steps(
    f1: f64,
    beta1: f64,
    beta2: f64,
    gamma0: f64,
    dgamma0: f64,
    phi_span: (f64, f64),
    steps: usize,
) -> Result<ProfileSolution> {
    integrate(
        ProfileEquation::Gamma { f1, beta1, beta2 },
        gamma0,
        dgamma0,
        phi_span,
        steps,
    )
}

/// Solves `y'^2 = C y^3 + C1 y^2 + C2 y + C3` from `(y0, dy0)` at `span.0`.
pub fn solve_mt(c: f64, c1: f64, c2: f64, c3: f64, y0: f64, dy0: f64, span: (f64, f64)) -> Result<ProfileSolution> {
    solve_mt_with_steps(c, c1, c2, c3, y0, dy0, span, DEFAULT_STEPS)
}

#[allow(clippy::too_many_arguments)]
pub fn solve_mt_with_steps(
    c: f64,
    c1: f64,
    c2: f64,
    c3: f64,
    y0: f64,
    dy0: f64,
    span: (f64, f64),
    steps: usize,
) -> Result<ProfileSolution> {
    integrate(ProfileEquation::Cubic { c, c1, c2, c3 }, y0, dy0, span, steps)
}

/// Coefficients `(C1, C2, C3)` of `C (y - y1)(y - y2)(y - y3)`.
pub fn cubic_from_roots(c: f64, roots: [f64; 3]) -> (f64, f64, f64) {
    let [a, b, d] = roots;
    (-c * (a + b + d), c * (a * b + a * d + b * d), -c * a * b * d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_gamma_fixed_point() {
        let (f1, g0) = (-3.0, 0.8_f64);
        let beta1 = (12.0 * g0 * g0 + 2.0 * f1 * g0) / 4.0;
        let beta2 = 4.0 * g0.powi(3) - 4.0 * beta1 * g0 + f1 * g0 * g0;
        let sol = solve_gamma(f1, beta1, beta2, g0, 0.0, (0.0, 3.0)).unwrap();
        for (_, y, _) in sol.nodes() {
            assert!((y - g0).abs() < 1e-12);
        }
    }

    #[test]
    fn inconsistent_initial_data_rejected() {
        let err = solve_mt(4.0, -24.0, 44.0, -24.0, 1.0, 0.1, (0.0, 1.0)).unwrap_err();
        assert!(matches!(err, Error::InconsistentInitialData { .. }));
    }

    #[test]
    fn taylor_recursion_matches_second_derivative() {
        let eq = ProfileEquation::Cubic {
            c: 2.0,
            c1: -1.0,
            c2: 0.5,
            c3: 0.0,
        };
        let j = eq.jet_from(0.7, 0.3);
        assert!((j.deriv(2) - eq.accel(0.7, 0.3)).abs() < 1e-14);
        // y''' = (3 C y + C1) y'
        assert!((j.deriv(3) - (3.0 * 2.0 * 0.7 - 1.0) * 0.3).abs() < 1e-14);
    }

    #[test]
    fn out_of_span_is_domain_error() {
        let sol = solve_mt(0.0, 1.0, 0.0, 0.0, 1.0, 1.0, (0.0, 1.0)).unwrap();
        assert!(sol.eval(1.5).is_err());
        assert!(sol.eval(-0.1).is_err());
        let (y, dy, _) = sol.eval(0.5).unwrap();
        assert!((y - 0.5f64.exp()).abs() < 1e-12 && (dy - 0.5f64.exp()).abs() < 1e-12);
    }
}
