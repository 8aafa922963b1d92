//! Hamilton's equations for `H = |p + A|^2_cyl / 2 + W` and fixed-step
//! trajectory integration.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::catalog::{Integral, SystemInstance};
use crate::error::{validation, Error, Result};
use crate::geometry::{CylPhase, CylPoint};

/// Default fixed-point tolerance of the implicit midpoint rule.
pub const MIDPOINT_TOL: f64 = 1e-12;
/// Default iteration cap of the implicit midpoint rule.
pub const MIDPOINT_MAX_ITER: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Rk4,
    ImplicitMidpoint,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Rk4 => "rk4",
            Scheme::ImplicitMidpoint => "implicit-midpoint",
        }
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rk4" => Ok(Scheme::Rk4),
            "implicit-midpoint" | "midpoint" => Ok(Scheme::ImplicitMidpoint),
            _ => Err(validation(format!(
                "unknown integrator '{s}' (expected rk4 | implicit-midpoint)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub scheme: Scheme,
    pub dt: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl IntegratorConfig {
    pub fn new(scheme: Scheme, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(validation(format!("dt must be positive, got {dt}")));
        }
        Ok(Self {
            scheme,
            dt,
            tol: MIDPOINT_TOL,
            max_iter: MIDPOINT_MAX_ITER,
        })
    }

    pub fn midpoint(dt: f64) -> Result<Self> {
        Self::new(Scheme::ImplicitMidpoint, dt)
    }

    pub fn rk4(dt: f64) -> Result<Self> {
        Self::new(Scheme::Rk4, dt)
    }
}

/// Phase-space velocity `(r', phi', Z', p_r', p_phi', p_Z')` at a state whose
/// angle need not be wrapped.
pub fn eom_array(sys: &SystemInstance, y: &[f64; 6]) -> Result<[f64; 6]> {
    let at = CylPoint::new(y[0], y[1], y[2])?;
    let (w, a) = sys.potentials(&at)?;
    let r = y[0];
    let pa = [y[3] + a[0].v, y[4] + a[1].v, y[5] + a[2].v];
    let inv_r2 = 1.0 / (r * r);
    let mut dy = [pa[0], pa[1] * inv_r2, pa[2], 0.0, 0.0, 0.0];
    for j in 0..3 {
        dy[3 + j] = -(pa[0] * a[0].d[j] + pa[1] * inv_r2 * a[1].d[j] + pa[2] * a[2].d[j]) - w.d[j];
    }
    dy[3] += pa[1] * pa[1] * inv_r2 / r;
    Ok(dy)
}

pub fn eom(sys: &SystemInstance, ph: &CylPhase) -> Result<[f64; 6]> {
    eom_array(sys, &ph.to_array())
}

/// Conserved quantities recorded at every sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    pub h: f64,
    pub x1: f64,
    pub x2: f64,
    pub x1_lin: Option<f64>,
    pub x2_lin: Option<f64>,
}

impl Observables {
    pub fn evaluate(sys: &SystemInstance, ph: &CylPhase, lin: [bool; 2]) -> Result<Self> {
        let opt = |on: bool, w: Integral| {
            if on {
                sys.integral_value(w, ph).map(Some)
            } else {
                Ok(None)
            }
        };
        Ok(Self {
            h: sys.integral_value(Integral::H, ph)?,
            x1: sys.integral_value(Integral::X1, ph)?,
            x2: sys.integral_value(Integral::X2, ph)?,
            x1_lin: opt(lin[0], Integral::X1Lin)?,
            x2_lin: opt(lin[1], Integral::X2Lin)?,
        })
    }

    /// `(name, value)` pairs in CSV column order.
    pub fn named(&self) -> Vec<(&'static str, f64)> {
        let mut v = vec![("H", self.h), ("X1", self.x1), ("X2", self.x2)];
        if let Some(x) = self.x1_lin {
            v.push(("X1_lin", x));
        }
        if let Some(x) = self.x2_lin {
            v.push(("X2_lin", x));
        }
        v
    }
}

/// Why a trajectory stopped early.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryTruncation {
    pub at_time: f64,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<CylPhase>,
    pub observables: Vec<Observables>,
    pub truncation: Option<TrajectoryTruncation>,
}

pub const CSV_COLUMNS: [&str; 7] = ["t", "r", "phi", "Z", "p_r", "p_phi", "p_Z"];

impl Trajectory {
    pub fn is_truncated(&self) -> bool {
        self.truncation.is_some()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&CylPhase> {
        self.states.last()
    }

    pub fn header(&self) -> Vec<&'static str> {
        let mut h = CSV_COLUMNS.to_vec();
        if let Some(o) = self.observables.first() {
            h.extend(o.named().into_iter().map(|(n, _)| n));
        }
        h
    }

    /// CSV with 17 significant digits per number.
    pub fn to_csv(&self) -> String {
        let mut out = self.header().join(",");
        out.push('\n');
        for ((t, s), o) in self.times.iter().zip(&self.states).zip(&self.observables) {
            let mut row: Vec<f64> = vec![*t];
            row.extend(s.to_array());
            row.extend(o.named().into_iter().map(|(_, v)| v));
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

/// Parses CSV text produced by [`Trajectory::to_csv`] into header and rows.
pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::Parse("empty CSV".into()))?
        .split(',')
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let row: std::result::Result<Vec<f64>, _> = line.split(',').map(str::parse::<f64>).collect();
        let row = row.map_err(|e| Error::Parse(format!("CSV row {}: {e}", i + 1)))?;
        if row.len() != header.len() {
            return Err(Error::Parse(format!(
                "CSV row {} has {} cells, expected {}",
                i + 1,
                row.len(),
                header.len()
            )));
        }
        rows.push(row);
    }
    Ok((header, rows))
}

fn add(y: &[f64; 6], k: &[f64; 6], h: f64) -> [f64; 6] {
    std::array::from_fn(|i| y[i] + h * k[i])
}

fn rk4_step(sys: &SystemInstance, y: &[f64; 6], h: f64) -> Result<[f64; 6]> {
    let k1 = eom_array(sys, y)?;
    let k2 = eom_array(sys, &add(y, &k1, h / 2.0))?;
    let k3 = eom_array(sys, &add(y, &k2, h / 2.0))?;
    let k4 = eom_array(sys, &add(y, &k3, h))?;
    Ok(std::array::from_fn(|i| {
        y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    }))
}

fn midpoint_step(sys: &SystemInstance, y: &[f64; 6], h: f64, cfg: &IntegratorConfig) -> Result<[f64; 6]> {
    let mut next = add(y, &eom_array(sys, y)?, h);
    let mut last_update = f64::INFINITY;
    for _ in 0..cfg.max_iter {
        let mid: [f64; 6] = std::array::from_fn(|i| 0.5 * (y[i] + next[i]));
        let cand = add(y, &eom_array(sys, &mid)?, h);
        let mut conv = true;
        last_update = 0.0;
        for i in 0..6 {
            let d = (cand[i] - next[i]).abs();
            last_update = last_update.max(d);
            if d > cfg.tol * cand[i].abs().max(1.0) {
                conv = false;
            }
        }
        next = cand;
        if conv {
            return Ok(next);
        }
    }
    Err(Error::Convergence {
        iterations: cfg.max_iter,
        last_update,
    })
}

/// One step of the configured scheme on an unwrapped state array.
pub fn step(sys: &SystemInstance, y: &[f64; 6], h: f64, cfg: &IntegratorConfig) -> Result<[f64; 6]> {
    match cfg.scheme {
        Scheme::Rk4 => rk4_step(sys, y, h),
        Scheme::ImplicitMidpoint => midpoint_step(sys, y, h, cfg),
    }
}

/// Integrates from `t = 0` to `t_end`. The step is `t_end / n` with `n` the
/// nearest whole number of `dt` steps, so the last sample lands on `t_end`.
/// Leaving the domain truncates the trajectory; a failed fixed point is an error.
pub fn integrate(sys: &SystemInstance, initial: &CylPhase, t_end: f64, cfg: &IntegratorConfig) -> Result<Trajectory> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(validation(format!("t_end must be positive, got {t_end}")));
    }
    let n = ((t_end / cfg.dt).round() as usize).max(1);
    let h = t_end / n as f64;
    let lin = match sys.first_order_integrals() {
        Ok(list) => [list.contains(&Integral::X1Lin), list.contains(&Integral::X2Lin)],
        Err(_) => [false, false],
    };
    let mut traj = Trajectory {
        times: Vec::with_capacity(n + 1),
        states: Vec::with_capacity(n + 1),
        observables: Vec::with_capacity(n + 1),
        truncation: None,
    };
    initial.point.require_r_min(sys.r_min())?;
    traj.times.push(0.0);
    traj.states.push(*initial);
    traj.observables.push(Observables::evaluate(sys, initial, lin)?);
    let mut y = initial.to_array();
    for i in 1..=n {
        let t = h * i as f64;
        let res = step(sys, &y, h, cfg).and_then(|next| {
            let ph = CylPhase::from_array(next)?;
            ph.point.require_r_min(sys.r_min())?;
            let obs = Observables::evaluate(sys, &ph, lin)?;
            Ok((next, ph, obs))
        });
        match res {
            Ok((next, ph, obs)) => {
                y = next;
                traj.times.push(t);
                traj.states.push(ph);
                traj.observables.push(obs);
            }
            Err(Error::Domain(msg)) => {
                traj.truncation = Some(TrajectoryTruncation {
                    at_time: h * (i - 1) as f64,
                    reason: msg,
                });
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(traj)
}

/// Integrates `n` steps of size `dt` forward and the same number backward,
/// returning the largest coordinate deviation from the initial state.
pub fn time_reversal_error(sys: &SystemInstance, initial: &CylPhase, n: usize, cfg: &IntegratorConfig) -> Result<f64> {
    let y0 = initial.to_array();
    let mut y = y0;
    for _ in 0..n {
        y = step(sys, &y, cfg.dt, cfg)?;
    }
    for _ in 0..n {
        y = step(sys, &y, -cfg.dt, cfg)?;
    }
    Ok(y.iter().zip(&y0).fold(0.0, |m, (a, b)| m.max((a - b).abs())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{build_family, FamilyId, ParamSet};

    fn free() -> SystemInstance {
        build_family(FamilyId::F1, &ParamSet::new()).unwrap()
    }

    #[test]
    fn free_particle_velocity() {
        let sys = free();
        let ph = CylPhase::new(2.0, 0.3, 0.1, 0.5, 1.5, -0.2).unwrap();
        let d = eom(&sys, &ph).unwrap();
        let want = [0.5, 1.5 / 4.0, -0.2, 1.5 * 1.5 / 8.0, 0.0, 0.0];
        for i in 0..6 {
            assert!((d[i] - want[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn free_particle_radial_line() {
        let sys = free();
        let ph = CylPhase::new(1.0, 0.0, 0.0, 1.0, 0.0, 0.0).unwrap();
        let traj = integrate(&sys, &ph, 1.0, &IntegratorConfig::midpoint(1e-2).unwrap()).unwrap();
        for (t, s) in traj.times.iter().zip(&traj.states) {
            assert!((s.point.r() - (1.0 + t)).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_config() {
        assert!(IntegratorConfig::midpoint(0.0).is_err());
        assert!(IntegratorConfig::rk4(-1.0).is_err());
        assert!("euler".parse::<Scheme>().is_err());
    }

    #[test]
    fn axis_approach_truncates() {
        let sys = free();
        let ph = CylPhase::new(0.5, 0.0, 0.0, -1.0, 0.0, 0.0).unwrap();
        let traj = integrate(&sys, &ph, 1.0, &IntegratorConfig::rk4(1e-2).unwrap()).unwrap();
        assert!(traj.is_truncated());
        assert!(traj.times.last().unwrap() < &0.51);
    }
}
