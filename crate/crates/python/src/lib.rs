//! Python bindings: family catalog, field evaluation, integration,
//! verification suites, special functions and profile solvers.

use std::collections::BTreeMap;

use cylint::catalog::{build_family_from_text, descriptor, sample_params, FamilyId, Integral, SystemInstance};
use cylint::cli::{special_value, verify_report, SpecialFn, VerifyKind, VerifyOptions};
use cylint::dynamics::{integrate, IntegratorConfig, Scheme};
use cylint::geometry::{CylPhase, CylPoint};
use cylint::odes::{solve_gamma, solve_mt, ProfileSolution};
use cylint::verify::{Grid, VerifyJson};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

create_exception!(cylint_py, CylintError, PyValueError, "Base error raised by cylint.");
create_exception!(
    cylint_py,
    DomainError,
    CylintError,
    "Point or value outside the domain of an evaluator."
);
create_exception!(
    cylint_py,
    Rank3Error,
    CylintError,
    "Rank-3 auxiliary configuration rejected."
);

fn to_py(e: cylint::Error) -> PyErr {
    let msg = e.to_string();
    match e {
        cylint::Error::Domain(_) | cylint::Error::Axis | cylint::Error::PositivityLoss { .. } => {
            DomainError::new_err(msg)
        }
        cylint::Error::Rank3(_) => Rank3Error::new_err(msg),
        _ => CylintError::new_err(msg),
    }
}

fn family(key: &str) -> PyResult<FamilyId> {
    key.parse().map_err(to_py)
}

fn phase(state: [f64; 6]) -> PyResult<CylPhase> {
    CylPhase::from_array(state).map_err(to_py)
}

/// `(key, name)` for every family in the catalog.
#[pyfunction]
fn families() -> Vec<(&'static str, &'static str)> {
    FamilyId::ALL.iter().map(|id| (id.key(), id.name())).collect()
}

/// Parameter schema and constraints of a family as text.
#[pyfunction]
fn describe(family_key: &str) -> PyResult<String> {
    Ok(descriptor(family(family_key)?).render())
}

/// `sn`, `cn`, `dn` at `(u, k)` or the complete integral `K` at `k`.
#[pyfunction]
#[pyo3(signature = (name, k, u = 0.0))]
fn special(name: &str, k: f64, u: f64) -> PyResult<f64> {
    let f = match name {
        "sn" => SpecialFn::Sn,
        "cn" => SpecialFn::Cn,
        "dn" => SpecialFn::Dn,
        "K" => SpecialFn::K,
        other => return Err(CylintError::new_err(format!("unknown special function '{other}'"))),
    };
    special_value(f, u, k).map_err(to_py)
}

fn profile_dict(py: Python<'_>, sol: &ProfileSolution) -> PyResult<Py<PyAny>> {
    let nodes: Vec<(f64, f64, f64)> = sol.nodes().collect();
    let d = pyo3::types::PyDict::new(py);
    d.set_item("x", nodes.iter().map(|n| n.0).collect::<Vec<_>>())?;
    d.set_item("y", nodes.iter().map(|n| n.1).collect::<Vec<_>>())?;
    d.set_item("dy", nodes.iter().map(|n| n.2).collect::<Vec<_>>())?;
    d.set_item("monitor", sol.monitor_series().to_vec())?;
    d.set_item("truncated_at", sol.truncation().map(|t| t.at))?;
    Ok(d.into_any().unbind())
}

/// Solves the gamma profile equation; returns node arrays and the monitor.
#[pyfunction]
fn profile_gamma(
    py: Python<'_>,
    f1: f64,
    beta1: f64,
    beta2: f64,
    y0: f64,
    dy0: f64,
    span: (f64, f64),
) -> PyResult<Py<PyAny>> {
    let sol = solve_gamma(f1, beta1, beta2, y0, dy0, span).map_err(to_py)?;
    profile_dict(py, &sol)
}

/// Solves `y'^2 = C y^3 + C1 y^2 + C2 y + C3` from `(y0, dy0)`.
#[pyfunction]
fn profile_cubic(py: Python<'_>, coeffs: [f64; 4], y0: f64, dy0: f64, span: (f64, f64)) -> PyResult<Py<PyAny>> {
    let [c, c1, c2, c3] = coeffs;
    let sol = solve_mt(c, c1, c2, c3, y0, dy0, span).map_err(to_py)?;
    profile_dict(py, &sol)
}

/// A concrete integrable system built from a family and its parameters.
#[pyclass(frozen)]
struct System {
    inner: SystemInstance,
}

#[pymethods]
impl System {
    /// `params` is parameter-file text; the shipped sample is used when omitted.
    #[new]
    #[pyo3(signature = (family_key, params = None))]
    fn new(family_key: &str, params: Option<&str>) -> PyResult<Self> {
        let id = family(family_key)?;
        let text = params.unwrap_or(sample_params(id));
        Ok(Self {
            inner: build_family_from_text(id, text).map_err(to_py)?,
        })
    }

    #[getter]
    fn family(&self) -> &'static str {
        self.inner.family().key()
    }

    #[getter]
    fn r_min(&self) -> f64 {
        self.inner.r_min()
    }

    #[getter]
    fn notes(&self) -> Vec<String> {
        self.inner.notes().to_vec()
    }

    fn potential(&self, r: f64, phi: f64, z: f64) -> PyResult<f64> {
        let at = CylPoint::new(r, phi, z).map_err(to_py)?;
        self.inner.potential(&at).map_err(to_py)
    }

    /// Covariant components `(A_r, A_phi, A_Z)`.
    fn vector_potential(&self, r: f64, phi: f64, z: f64) -> PyResult<[f64; 3]> {
        let at = CylPoint::new(r, phi, z).map_err(to_py)?;
        self.inner.vector_potential(&at).map_err(to_py)
    }

    /// 2-form components `(B^r, B^phi, B^Z)`.
    fn field(&self, r: f64, phi: f64, z: f64) -> PyResult<[f64; 3]> {
        let at = CylPoint::new(r, phi, z).map_err(to_py)?;
        Ok(self.inner.field(&at).map_err(to_py)?.to_array())
    }

    /// Values of `H`, `X1`, `X2` (and the first-order integrals, when they
    /// exist) at `(r, phi, Z, p_r, p_phi, p_Z)`.
    fn integrals(&self, state: [f64; 6]) -> PyResult<BTreeMap<&'static str, f64>> {
        let ph = phase(state)?;
        let mut which = vec![Integral::H, Integral::X1, Integral::X2];
        which.extend(self.inner.first_order_integrals().unwrap_or_default());
        which
            .into_iter()
            .map(|w| Ok((w.name(), self.inner.integral_value(w, &ph).map_err(to_py)?)))
            .collect()
    }

    fn hamiltonian(&self, state: [f64; 6]) -> PyResult<f64> {
        self.inner.hamiltonian(&phase(state)?).map_err(to_py)
    }

    /// Integrates from `state`; returns times, states, observables and the
    /// truncation time (None for a full run).
    #[pyo3(signature = (state, t_end, dt = 1e-3, integrator = "implicit-midpoint"))]
    fn simulate(&self, py: Python<'_>, state: [f64; 6], t_end: f64, dt: f64, integrator: &str) -> PyResult<Py<PyAny>> {
        let scheme: Scheme = integrator.parse().map_err(to_py)?;
        let cfg = IntegratorConfig::new(scheme, dt).map_err(to_py)?;
        let traj = integrate(&self.inner, &phase(state)?, t_end, &cfg).map_err(to_py)?;
        let d = pyo3::types::PyDict::new(py);
        d.set_item("t", traj.times.clone())?;
        d.set_item("states", traj.states.iter().map(|s| s.to_array()).collect::<Vec<_>>())?;
        let mut obs: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
        for o in &traj.observables {
            for (name, v) in o.named() {
                obs.entry(name).or_default().push(v);
            }
        }
        d.set_item("observables", obs)?;
        d.set_item("truncated_at", traj.truncation.as_ref().map(|t| t.at_time))?;
        d.set_item("csv", traj.to_csv())?;
        Ok(d.into_any().unbind())
    }

    /// Runs a verification suite and returns its JSON report text.
    #[pyo3(signature = (kind, samples = 100, seed = 0, tol = None, grid = (5, 8, 5), t_end = 10.0, dt = 1e-3, state = None))]
    #[allow(clippy::too_many_arguments)]
    fn verify(
        &self,
        kind: &str,
        samples: usize,
        seed: u64,
        tol: Option<f64>,
        grid: (usize, usize, usize),
        t_end: f64,
        dt: f64,
        state: Option<[f64; 6]>,
    ) -> PyResult<String> {
        let kind = match kind {
            "commutation" => VerifyKind::Commutation,
            "residuals" => VerifyKind::Residuals,
            "gauge" => VerifyKind::Gauge,
            "conservation" => VerifyKind::Conservation,
            other => return Err(CylintError::new_err(format!("unknown verification kind '{other}'"))),
        };
        let mut opts = VerifyOptions {
            samples,
            seed,
            tol,
            grid: Grid {
                n_r: grid.0,
                n_phi: grid.1,
                n_z: grid.2,
                ..Grid::default()
            },
            t_end,
            dt,
            ..VerifyOptions::default()
        };
        if let Some(s) = state {
            opts.initial = phase(s)?;
        }
        let report: VerifyJson = verify_report(&self.inner, kind, &opts).map_err(to_py)?;
        Ok(report.to_json())
    }

    fn __repr__(&self) -> String {
        format!("System('{}')", self.inner.family().key())
    }
}

#[pymodule]
fn cylint_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("CylintError", m.py().get_type::<CylintError>())?;
    m.add("DomainError", m.py().get_type::<DomainError>())?;
    m.add("Rank3Error", m.py().get_type::<Rank3Error>())?;
    m.add_class::<System>()?;
    m.add_function(wrap_pyfunction!(families, m)?)?;
    m.add_function(wrap_pyfunction!(describe, m)?)?;
    m.add_function(wrap_pyfunction!(special, m)?)?;
    m.add_function(wrap_pyfunction!(profile_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(profile_cubic, m)?)?;
    Ok(())
}
