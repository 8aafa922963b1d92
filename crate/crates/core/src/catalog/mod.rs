//! The classified integrable families and the [`SystemInstance`] evaluator.
//!
//! Every family is realized in a radial gauge `A_r = 0`. A system exposes the
//! potential, the vector potential with its Jacobian, the magnetic field and
//! the coefficients of the two quadratic integrals
//!
//! ```text
//! X1 = (p_phi^A)^2 + s1 . p^A + m1,   X2 = (p_Z^A)^2 + s2 . p^A + m2,
//! ```
//!
//! with `p^A = p + A` (unit mass, charge -1).

mod families;
mod general;
pub mod params;
pub mod profiles;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::auxfields::AuxQuintuple;
use crate::error::{Error, Result};
use crate::function::Function1D;
use crate::geometry::{r_min, CylPhase, CylPoint, FieldTriple};
use crate::jet::Dual;

pub use general::{build_from_aux, check_rank3, GATE_TOL};
pub use params::{ConstSpec, ParamSet, Schema, SlotSpec, Variable, WordSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FamilyId {
    F1,
    F2,
    F3,
    F4,
    F5,
    F6,
    F7,
    F8,
}

impl FamilyId {
    pub const ALL: [FamilyId; 8] = [
        FamilyId::F1,
        FamilyId::F2,
        FamilyId::F3,
        FamilyId::F4,
        FamilyId::F5,
        FamilyId::F6,
        FamilyId::F7,
        FamilyId::F8,
    ];

    pub fn key(self) -> &'static str {
        match self {
            FamilyId::F1 => "F1",
            FamilyId::F2 => "F2",
            FamilyId::F3 => "F3",
            FamilyId::F4 => "F4",
            FamilyId::F5 => "F5",
            FamilyId::F6 => "F6",
            FamilyId::F7 => "F7",
            FamilyId::F8 => "F8",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FamilyId::F1 => "uniform-axial",
            FamilyId::F2 => "exotic-beta",
            FamilyId::F3 => "elliptic-MT",
            FamilyId::F4 => "axial-mu-rho",
            FamilyId::F5 => "tau-sigma",
            FamilyId::F6 => "polar-x-free",
            FamilyId::F7 => "sigma-only",
            FamilyId::F8 => "polar-2d-constrained",
        }
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for FamilyId {
    type Err = Error;

    /// Accepts the key (`F3`, `f3`) or the name (`elliptic-MT`).
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        FamilyId::ALL
            .into_iter()
            .find(|id| id.key().eq_ignore_ascii_case(t) || id.name().eq_ignore_ascii_case(t))
            .ok_or_else(|| Error::UnknownFamily(t.to_string()))
    }
}

/// Static description of a family: schema, constraints and reductions.
#[derive(Debug, Clone)]
pub struct FamilyDescriptor {
    pub id: FamilyId,
    pub summary: &'static str,
    pub field: &'static str,
    pub schema: Schema,
    pub constraints: Vec<&'static str>,
    /// Whether `X1`, `X2` reduce to first-order integrals.
    pub first_order: [bool; 2],
}

impl FamilyDescriptor {
    pub fn render(&self) -> String {
        let mut out = format!("{} {}: {}\n", self.id.key(), self.id.name(), self.summary);
        out.push_str(&format!("field: {}\n", self.field));
        out.push_str(&self.schema.render());
        if !self.constraints.is_empty() {
            out.push_str("constraints:\n");
            for c in &self.constraints {
                out.push_str(&format!("  {c}\n"));
            }
        }
        let reductions: Vec<&str> = ["X1", "X2"]
            .into_iter()
            .zip(self.first_order)
            .filter_map(|(n, ok)| ok.then_some(n))
            .collect();
        if reductions.is_empty() {
            out.push_str("first-order reduction: none\n");
        } else {
            out.push_str(&format!("first-order reduction: {}\n", reductions.join(", ")));
        }
        out
    }
}

pub fn descriptor(id: FamilyId) -> FamilyDescriptor {
    families::descriptor(id)
}

pub fn descriptors() -> Vec<FamilyDescriptor> {
    FamilyId::ALL.into_iter().map(descriptor).collect()
}

/// Closed-form evaluators of one system in its radial gauge.
///
/// Coordinates enter as duals `(r, phi, Z)` so that gradients of `W` and the
/// Jacobian of `A` come out analytically.
pub trait Model: Send + Sync {
    fn potential(&self, x: &[Dual; 3]) -> Result<Dual>;
    /// Covariant components `(A_r, A_phi, A_Z)`.
    fn gauge(&self, x: &[Dual; 3]) -> Result<[Dual; 3]>;
    fn field(&self, at: &CylPoint) -> Result<FieldTriple>;
    fn s_coeffs(&self, at: &CylPoint) -> Result<([f64; 3], [f64; 3])>;
    fn m_coeffs(&self, at: &CylPoint) -> Result<(f64, f64)>;
    /// Shifts `c` with `X~ = p^A_phi + c1` and `X~ = p^A_Z + c2`, when they exist.
    fn linear_shifts(&self, _at: &CylPoint) -> Result<[Option<f64>; 2]> {
        Ok([None, None])
    }
}

/// Which conserved quantity to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integral {
    H,
    X1,
    X2,
    /// First-order reduction of `X1`.
    X1Lin,
    /// First-order reduction of `X2`.
    X2Lin,
}

impl Integral {
    pub fn name(self) -> &'static str {
        match self {
            Integral::H => "H",
            Integral::X1 => "X1",
            Integral::X2 => "X2",
            Integral::X1Lin => "X1_lin",
            Integral::X2Lin => "X2_lin",
        }
    }
}

impl FromStr for Integral {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "H" | "h" => Ok(Integral::H),
            "X1" | "x1" => Ok(Integral::X1),
            "X2" | "x2" => Ok(Integral::X2),
            "X1_lin" | "x1_lin" => Ok(Integral::X1Lin),
            "X2_lin" | "x2_lin" => Ok(Integral::X2Lin),
            _ => Err(crate::error::validation(format!("unknown integral '{s}'"))),
        }
    }
}

/// A fully realized integrable system. Immutable and cheap to clone.
#[derive(Clone)]
pub struct SystemInstance {
    family: FamilyId,
    params: ParamSet,
    aux: AuxQuintuple,
    model: Arc<dyn Model>,
    r_min: f64,
    first_order: [bool; 2],
    notes: Vec<String>,
}

impl fmt::Debug for SystemInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SystemInstance")
            .field("family", &self.family)
            .field("params", &self.params)
            .field("r_min", &self.r_min)
            .finish_non_exhaustive()
    }
}

fn duals(at: &CylPoint) -> [Dual; 3] {
    [
        Dual::coordinate(at.r(), 0),
        Dual::coordinate(at.phi(), 1),
        Dual::coordinate(at.z(), 2),
    ]
}

impl SystemInstance {
    pub(crate) fn new(
        family: FamilyId,
        params: ParamSet,
        aux: AuxQuintuple,
        model: Arc<dyn Model>,
        first_order: [bool; 2],
        notes: Vec<String>,
    ) -> Self {
        Self {
            family,
            params,
            aux,
            model,
            r_min: r_min(),
            first_order,
            notes,
        }
    }

    pub fn family(&self) -> FamilyId {
        self.family
    }

    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    pub fn aux(&self) -> &AuxQuintuple {
        &self.aux
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    /// Construction remarks, e.g. a truncated numeric profile.
    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    pub fn model(&self) -> &Arc<dyn Model> {
        &self.model
    }

    fn check(&self, at: &CylPoint) -> Result<()> {
        at.require_r_min(self.r_min)
    }

    pub fn potential(&self, at: &CylPoint) -> Result<f64> {
        self.check(at)?;
        Ok(self.model.potential(&duals(at))?.v)
    }

    pub fn grad_potential(&self, at: &CylPoint) -> Result<[f64; 3]> {
        self.check(at)?;
        Ok(self.model.potential(&duals(at))?.d)
    }

    pub fn vector_potential(&self, at: &CylPoint) -> Result<[f64; 3]> {
        self.check(at)?;
        Ok(self.model.gauge(&duals(at))?.map(|a| a.v))
    }

    /// `jac[i][j] = d A_i / d x_j` with `x = (r, phi, Z)`.
    pub fn jac_vector_potential(&self, at: &CylPoint) -> Result<[[f64; 3]; 3]> {
        self.check(at)?;
        Ok(self.model.gauge(&duals(at))?.map(|a| a.d))
    }

    /// `W` and `A` with their gradients in one pass.
    pub fn potentials(&self, at: &CylPoint) -> Result<(Dual, [Dual; 3])> {
        self.check(at)?;
        let x = duals(at);
        Ok((self.model.potential(&x)?, self.model.gauge(&x)?))
    }

    pub fn field(&self, at: &CylPoint) -> Result<FieldTriple> {
        self.check(at)?;
        self.model.field(at)
    }

    pub fn s1(&self, at: &CylPoint) -> Result<[f64; 3]> {
        self.check(at)?;
        Ok(self.model.s_coeffs(at)?.0)
    }

    pub fn s2(&self, at: &CylPoint) -> Result<[f64; 3]> {
        self.check(at)?;
        Ok(self.model.s_coeffs(at)?.1)
    }

    pub fn m1(&self, at: &CylPoint) -> Result<f64> {
        self.check(at)?;
        Ok(self.model.m_coeffs(at)?.0)
    }

    pub fn m2(&self, at: &CylPoint) -> Result<f64> {
        self.check(at)?;
        Ok(self.model.m_coeffs(at)?.1)
    }

    /// Covariant momenta `p + A`.
    pub fn covariant_momenta(&self, ph: &CylPhase) -> Result<[f64; 3]> {
        let a = self.vector_potential(&ph.point)?;
        let p = ph.momenta();
        Ok([p[0] + a[0], p[1] + a[1], p[2] + a[2]])
    }

    pub fn hamiltonian(&self, ph: &CylPhase) -> Result<f64> {
        self.integral_value(Integral::H, ph)
    }

    pub fn integral_value(&self, which: Integral, ph: &CylPhase) -> Result<f64> {
        let at = &ph.point;
        let pa = self.covariant_momenta(ph)?;
        let dot = |s: [f64; 3]| s[0] * pa[0] + s[1] * pa[1] + s[2] * pa[2];
        match which {
            Integral::H => {
                let r = at.r();
                Ok(0.5 * (pa[0] * pa[0] + pa[1] * pa[1] / (r * r) + pa[2] * pa[2]) + self.potential(at)?)
            }
            Integral::X1 => {
                let (s1, _) = self.model.s_coeffs(at)?;
                Ok(pa[1] * pa[1] + dot(s1) + self.model.m_coeffs(at)?.0)
            }
            Integral::X2 => {
                let (_, s2) = self.model.s_coeffs(at)?;
                Ok(pa[2] * pa[2] + dot(s2) + self.model.m_coeffs(at)?.1)
            }
            Integral::X1Lin | Integral::X2Lin => {
                let i = if which == Integral::X1Lin { 0 } else { 1 };
                match self.model.linear_shifts(at)?[i] {
                    Some(c) if self.first_order[i] => Ok(pa[i + 1] + c),
                    _ => Err(Error::Unsupported(format!(
                        "{} has no first-order reduction of X{}",
                        self.family.name(),
                        i + 1
                    ))),
                }
            }
        }
    }

    /// The first-order integrals this system supports; `Unsupported` when none.
    pub fn first_order_integrals(&self) -> Result<Vec<Integral>> {
        let list: Vec<Integral> = [Integral::X1Lin, Integral::X2Lin]
            .into_iter()
            .zip(self.first_order)
            .filter_map(|(w, ok)| ok.then_some(w))
            .collect();
        if list.is_empty() {
            Err(Error::Unsupported(format!(
                "{} ({}) has no first-order integrals",
                self.family.key(),
                self.family.name()
            )))
        } else {
            Ok(list)
        }
    }

    /// The same system in the gauge `A + grad chi` with
    /// `chi = chi_r(r) + chi_phi(phi) + chi_Z(Z)`. `chi_phi'` must be periodic.
    pub fn with_gauge_shift(&self, chi: [Function1D; 3]) -> Result<Self> {
        chi[1].derivative().check_periodic("d chi_phi / d phi", 16, 1e-10)?;
        let mut out = self.clone();
        out.model = Arc::new(GaugeShifted {
            inner: self.model.clone(),
            chi,
        });
        out.notes.push("gauge shifted by grad chi".to_string());
        Ok(out)
    }

    /// The same field with `W + f(r) g(phi) h(Z)` and unchanged integrals.
    /// Generic choices break integrability.
    pub fn with_potential_perturbation(&self, f: Function1D, g: Function1D, h: Function1D) -> Self {
        let mut out = self.clone();
        out.model = Arc::new(Perturbed {
            inner: self.model.clone(),
            dw: [f, g, h],
            dm: [Function1D::zero(), Function1D::zero()],
        });
        out.notes.push("potential perturbed".to_string());
        out
    }

    /// The same system with `m1 + dm1(r)` and `m2 + dm2(r)`.
    pub fn with_m_offsets(&self, dm1: Function1D, dm2: Function1D) -> Self {
        let mut out = self.clone();
        out.model = Arc::new(Perturbed {
            inner: self.model.clone(),
            dw: [Function1D::zero(), Function1D::constant(1.0), Function1D::constant(1.0)],
            dm: [dm1, dm2],
        });
        out.notes.push("integral coefficients m perturbed".to_string());
        out
    }
}

struct GaugeShifted {
    inner: Arc<dyn Model>,
    chi: [Function1D; 3],
}

impl Model for GaugeShifted {
    fn potential(&self, x: &[Dual; 3]) -> Result<Dual> {
        self.inner.potential(x)
    }

    fn gauge(&self, x: &[Dual; 3]) -> Result<[Dual; 3]> {
        let mut a = self.inner.gauge(x)?;
        for (i, ai) in a.iter_mut().enumerate() {
            *ai = *ai + self.chi[i].apply(1, x[i])?;
        }
        Ok(a)
    }

    fn field(&self, at: &CylPoint) -> Result<FieldTriple> {
        self.inner.field(at)
    }

    fn s_coeffs(&self, at: &CylPoint) -> Result<([f64; 3], [f64; 3])> {
        self.inner.s_coeffs(at)
    }

    fn m_coeffs(&self, at: &CylPoint) -> Result<(f64, f64)> {
        self.inner.m_coeffs(at)
    }

    fn linear_shifts(&self, at: &CylPoint) -> Result<[Option<f64>; 2]> {
        self.inner.linear_shifts(at)
    }
}

struct Perturbed {
    inner: Arc<dyn Model>,
    dw: [Function1D; 3],
    dm: [Function1D; 2],
}

impl Model for Perturbed {
    fn potential(&self, x: &[Dual; 3]) -> Result<Dual> {
        let f = self.dw[0].apply(0, x[0])?;
        let g = self.dw[1].apply(0, x[1])?;
        let h = self.dw[2].apply(0, x[2])?;
        Ok(self.inner.potential(x)? + f * g * h)
    }

    fn gauge(&self, x: &[Dual; 3]) -> Result<[Dual; 3]> {
        self.inner.gauge(x)
    }

    fn field(&self, at: &CylPoint) -> Result<FieldTriple> {
        self.inner.field(at)
    }

    fn s_coeffs(&self, at: &CylPoint) -> Result<([f64; 3], [f64; 3])> {
        self.inner.s_coeffs(at)
    }

    fn m_coeffs(&self, at: &CylPoint) -> Result<(f64, f64)> {
        let (m1, m2) = self.inner.m_coeffs(at)?;
        Ok((m1 + self.dm[0].eval(at.r())?, m2 + self.dm[1].eval(at.r())?))
    }

    fn linear_shifts(&self, at: &CylPoint) -> Result<[Option<f64>; 2]> {
        self.inner.linear_shifts(at)
    }
}

/// Builds a family from its parameter set.
pub fn build_family(id: FamilyId, params: &ParamSet) -> Result<SystemInstance> {
    let desc = descriptor(id);
    params.check_keys(&desc.schema)?;
    families::build(id, &desc, params)
}

/// Parses a parameter file and builds the family.
pub fn build_family_from_text(id: FamilyId, text: &str) -> Result<SystemInstance> {
    build_family(id, &ParamSet::parse(text)?)
}

/// The parameter file shipped as the sample of each family.
pub fn sample_params(id: FamilyId) -> &'static str {
    match id {
        FamilyId::F1 => include_str!("../../../../params/F1.params"),
        FamilyId::F2 => include_str!("../../../../params/F2.params"),
        FamilyId::F3 => include_str!("../../../../params/F3.params"),
        FamilyId::F4 => include_str!("../../../../params/F4.params"),
        FamilyId::F5 => include_str!("../../../../params/F5.params"),
        FamilyId::F6 => include_str!("../../../../params/F6.params"),
        FamilyId::F7 => include_str!("../../../../params/F7.params"),
        FamilyId::F8 => include_str!("../../../../params/F8.params"),
    }
}

/// Builds the shipped sample of a family.
pub fn build_sample(id: FamilyId) -> Result<SystemInstance> {
    build_family_from_text(id, sample_params(id))
}
