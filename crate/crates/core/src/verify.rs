//! Numerical verification: finite-difference Poisson brackets, the full
//! determining system, curl consistency of the gauge and conservation drift.
//!
//! Everything here uses value-only evaluators and fourth-order central
//! differences, independent of the analytic derivatives used by the catalog.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::auxfields::alpha;
use crate::catalog::{Integral, SystemInstance};
use crate::dynamics::Trajectory;
use crate::error::{domain, validation, Error, Result};
use crate::fd::{central4, scaled_step, stencil4, Residual};
use crate::geometry::{r_min, CylPhase, CylPoint};

/// Default base step of the bracket and residual stencils.
pub const DEFAULT_FD_STEP: f64 = 1e-3;

/// Scale floor for residuals built from FD derivatives. Fourth-order
/// differences at `h = 1e-3` carry absolute rounding noise near `1e-13`, so
/// equations whose summands all vanish are judged against this floor.
pub const FD_NORMALIZATION_FLOOR: f64 = 1e-6;

/// Poisson bracket `{F, G}` with fourth-order central differences at base
/// step `h0`, scaled by `max(1, |coordinate|)`. Phase functions take
/// `[r, phi, Z, p_r, p_phi, p_Z]`.
pub fn poisson_bracket_fd<F, G>(f: &F, g: &G, ph: &CylPhase, h0: f64) -> Result<f64>
where
    F: Fn(&[f64; 6]) -> Result<f64>,
    G: Fn(&[f64; 6]) -> Result<f64>,
{
    let y = ph.to_array();
    check_stencil(y[0], h0)?;
    let gf = phase_gradient(f, &y, h0)?;
    let gg = phase_gradient(g, &y, h0)?;
    Ok(bracket_from_gradients(&gf, &gg))
}

fn check_stencil(r: f64, h0: f64) -> Result<()> {
    let h = scaled_step(h0, r);
    if r < r_min() + 2.0 * h {
        return Err(domain(format!("r = {r} is within two FD steps of r_min")));
    }
    Ok(())
}

/// Gradient of a phase function in `(r, phi, Z, p_r, p_phi, p_Z)`.
pub fn phase_gradient<F>(f: &F, y: &[f64; 6], h0: f64) -> Result<[f64; 6]>
where
    F: Fn(&[f64; 6]) -> Result<f64>,
{
    let mut g = [0.0; 6];
    for (i, gi) in g.iter_mut().enumerate() {
        let h = scaled_step(h0, y[i]);
        *gi = central4(
            |t| {
                let mut z = *y;
                z[i] = t;
                f(&z)
            },
            y[i],
            h,
        )?;
    }
    Ok(g)
}

pub fn bracket_from_gradients(gf: &[f64; 6], gg: &[f64; 6]) -> f64 {
    (0..3).map(|q| gf[q] * gg[q + 3] - gf[q + 3] * gg[q]).sum()
}

fn norm(v: &[f64; 6]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// A phase function of a system, e.g. `H` or `X1`.
pub fn phase_function(sys: &SystemInstance, which: Integral) -> impl Fn(&[f64; 6]) -> Result<f64> + '_ {
    move |y| sys.integral_value(which, &CylPhase::from_array(*y)?)
}

/// Sampling box of the commutation suite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleBox {
    pub r: (f64, f64),
    pub phi: (f64, f64),
    pub z: (f64, f64),
    pub p: (f64, f64),
}

impl Default for SampleBox {
    fn default() -> Self {
        Self {
            r: (0.5, 2.0),
            phi: (0.0, TAU),
            z: (-1.0, 1.0),
            p: (-2.0, 2.0),
        }
    }
}

impl SampleBox {
    fn sample(&self, rng: &mut ChaCha8Rng) -> Result<CylPhase> {
        let mut u = |(a, b): (f64, f64)| a + (b - a) * rng.random::<f64>();
        let (r, phi, z) = (u(self.r), u(self.phi), u(self.z));
        CylPhase::new(r, phi, z, u(self.p), u(self.p), u(self.p))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairStats {
    pub pair: String,
    pub max: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommutationReport {
    pub family: String,
    pub seed: u64,
    pub samples: usize,
    pub fd_step: f64,
    pub tolerance: f64,
    pub pairs: Vec<PairStats>,
    /// Samples redrawn because a point fell outside the domain.
    pub resampled: usize,
    pub pass: bool,
}

impl CommutationReport {
    pub fn max_residual(&self) -> f64 {
        self.pairs.iter().fold(0.0, |m, p| m.max(p.max))
    }
}

pub const PAIRS: [(Integral, Integral, &str); 3] = [
    (Integral::H, Integral::X1, "H-X1"),
    (Integral::H, Integral::X2, "H-X2"),
    (Integral::X1, Integral::X2, "X1-X2"),
];

/// Normalized brackets `|{F, G}| / max(1, |grad F| |grad G|)` of the three
/// pairs at `n_samples` seeded points of the default box.
pub fn check_commutation(sys: &SystemInstance, n_samples: usize, seed: u64, tol: f64) -> Result<CommutationReport> {
    check_commutation_in(sys, n_samples, seed, tol, &SampleBox::default(), DEFAULT_FD_STEP)
}

pub fn check_commutation_in(
    sys: &SystemInstance,
    n_samples: usize,
    seed: u64,
    tol: f64,
    bx: &SampleBox,
    h0: f64,
) -> Result<CommutationReport> {
    if n_samples == 0 {
        return Err(validation("at least one sample is required"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fs = [
        phase_function(sys, Integral::H),
        phase_function(sys, Integral::X1),
        phase_function(sys, Integral::X2),
    ];
    let mut max = [0.0f64; 3];
    let mut sum = [0.0f64; 3];
    let mut resampled = 0usize;
    let mut done = 0usize;
    while done < n_samples {
        if resampled > 100 * n_samples {
            return Err(domain("too many samples fell outside the domain"));
        }
        let ph = bx.sample(&mut rng)?;
        let y = ph.to_array();
        let grads: Result<Vec<[f64; 6]>> =
            check_stencil(y[0], h0).and_then(|_| fs.iter().map(|f| phase_gradient(f, &y, h0)).collect());
        let grads = match grads {
            Ok(g) => g,
            Err(Error::Domain(_)) => {
                resampled += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        for (k, (i, j)) in [(0, 1), (0, 2), (1, 2)].into_iter().enumerate() {
            let b = bracket_from_gradients(&grads[i], &grads[j]);
            let v = b.abs() / (norm(&grads[i]) * norm(&grads[j])).max(1.0);
            let v = if v.is_nan() { f64::INFINITY } else { v };
            max[k] = max[k].max(v);
            sum[k] += v;
        }
        done += 1;
    }
    let pairs: Vec<PairStats> = PAIRS
        .iter()
        .enumerate()
        .map(|(k, (_, _, name))| PairStats {
            pair: name.to_string(),
            max: max[k],
            mean: sum[k] / n_samples as f64,
        })
        .collect();
    let pass = pairs.iter().all(|p| p.max <= tol);
    Ok(CommutationReport {
        family: sys.family().key().to_string(),
        seed,
        samples: n_samples,
        fd_step: h0,
        tolerance: tol,
        pairs,
        resampled,
        pass,
    })
}

/// Tensor grid `r in r_range`, `phi = 2 pi j / n_phi`, `Z in z_range`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub n_r: usize,
    pub n_phi: usize,
    pub n_z: usize,
    pub r: (f64, f64),
    pub z: (f64, f64),
}

impl Default for Grid {
    /// The 5 x 8 x 5 grid on `r in [0.5, 2]`, `Z in [-1, 1]`.
    fn default() -> Self {
        Self {
            n_r: 5,
            n_phi: 8,
            n_z: 5,
            r: (0.5, 2.0),
            z: (-1.0, 1.0),
        }
    }
}

fn lin(range: (f64, f64), n: usize, i: usize) -> f64 {
    if n == 1 {
        range.0
    } else {
        range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64
    }
}

impl Grid {
    pub fn points(&self) -> Result<Vec<CylPoint>> {
        if self.n_r == 0 || self.n_phi == 0 || self.n_z == 0 {
            return Err(validation("grid dimensions must be positive"));
        }
        let mut out = Vec::with_capacity(self.n_r * self.n_phi * self.n_z);
        for i in 0..self.n_r {
            for j in 0..self.n_phi {
                for k in 0..self.n_z {
                    let phi = TAU * j as f64 / self.n_phi as f64;
                    out.push(CylPoint::new(lin(self.r, self.n_r, i), phi, lin(self.z, self.n_z, k))?);
                }
            }
        }
        Ok(out)
    }

    /// Fails when the stencil of step `h0` would reach below `r_min`.
    pub fn check_domain(&self, h0: f64) -> Result<()> {
        let lo = self.r.0.min(self.r.1);
        check_stencil(lo, h0)
    }
}

/// Names of the 28 determining equations, grouped.
pub const EQUATION_GROUPS: [(&str, &[&str]); 8] = [
    (
        "cyl2a",
        &["cyl2a.1", "cyl2a.2", "cyl2a.3", "cyl2a.4", "cyl2a.5", "cyl2a.6"],
    ),
    (
        "cyl2b",
        &["cyl2b.1", "cyl2b.2", "cyl2b.3", "cyl2b.4", "cyl2b.5", "cyl2b.6"],
    ),
    ("cyl1a", &["cyl1a.r", "cyl1a.phi", "cyl1a.Z"]),
    ("cyl1b", &["cyl1b.r", "cyl1b.phi", "cyl1b.Z"]),
    ("cyl0", &["cyl0.1", "cyl0.2"]),
    ("extra2", &["extra2.1", "extra2.2", "extra2.3", "extra2.4"]),
    ("extra1", &["extra1.r", "extra1.Z", "extra1.phi"]),
    ("extra0", &["extra0"]),
];

/// Literal transcriptions of the printed first-order bracket conditions,
/// reported for comparison only.
pub const PRINTED_EXTRA1: [&str; 3] = ["extra1.printed.1", "extra1.printed.2", "extra1.printed.3"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquationStats {
    pub name: String,
    /// Largest normalized residual.
    pub max: f64,
    pub mean: f64,
    /// Largest residual before normalization.
    pub raw_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub family: String,
    pub grid: Grid,
    pub fd_step: f64,
    pub tolerance: f64,
    /// The 28 equations in group order.
    pub equations: Vec<EquationStats>,
    /// Per-group maxima and means.
    pub groups: Vec<EquationStats>,
    /// Printed forms, not part of the pass criterion.
    pub informational: Vec<EquationStats>,
    pub pass: bool,
}

impl ResidualReport {
    pub fn max_residual(&self) -> f64 {
        self.equations.iter().fold(0.0, |m, e| m.max(e.max))
    }

    pub fn mean_residual(&self) -> f64 {
        self.equations.iter().map(|e| e.mean).sum::<f64>() / self.equations.len() as f64
    }

    pub fn equation(&self, name: &str) -> Option<&EquationStats> {
        self.equations
            .iter()
            .chain(&self.informational)
            .find(|e| e.name == name)
    }
}

/// FD derivatives of the integral coefficients and of `W` at one point.
struct Local {
    r: f64,
    s1: [f64; 3],
    s2: [f64; 3],
    b: [f64; 3],
    /// `ds1[i][a] = d s1^i / d x_a`.
    ds1: [[f64; 3]; 3],
    ds2: [[f64; 3]; 3],
    dm1: [f64; 3],
    dm2: [f64; 3],
    dw: [f64; 3],
}

fn shifted(at: &CylPoint, axis: usize, t: f64) -> Result<CylPoint> {
    let mut q = [at.r(), at.phi(), at.z()];
    q[axis] = t;
    CylPoint::new(q[0], q[1], q[2])
}

/// FD partials of a vector-valued point function along each axis.
fn partials<const N: usize, F>(f: F, at: &CylPoint, h0: f64) -> Result<[[f64; 3]; N]>
where
    F: Fn(&CylPoint) -> Result<[f64; N]>,
{
    let x = [at.r(), at.phi(), at.z()];
    let mut out = [[0.0; 3]; N];
    for axis in 0..3 {
        let h = scaled_step(h0, x[axis]);
        let v = |d: f64| f(&shifted(at, axis, x[axis] + d * h)?);
        let (p2, p1, m1, m2) = (v(2.0)?, v(1.0)?, v(-1.0)?, v(-2.0)?);
        for n in 0..N {
            out[n][axis] = stencil4(p2[n], p1[n], m1[n], m2[n], h);
        }
    }
    Ok(out)
}

fn local(sys: &SystemInstance, at: &CylPoint, h0: f64) -> Result<Local> {
    let s = |p: &CylPoint| -> Result<[f64; 6]> {
        let (a, b) = (sys.s1(p)?, sys.s2(p)?);
        Ok([a[0], a[1], a[2], b[0], b[1], b[2]])
    };
    let ds = partials(s, at, h0)?;
    let dm = partials(|p| Ok([sys.m1(p)?, sys.m2(p)?]), at, h0)?;
    let dw = partials(|p| Ok([sys.potential(p)?]), at, h0)?;
    Ok(Local {
        r: at.r(),
        s1: sys.s1(at)?,
        s2: sys.s2(at)?,
        b: sys.field(at)?.to_array(),
        ds1: [ds[0], ds[1], ds[2]],
        ds2: [ds[3], ds[4], ds[5]],
        dm1: dm[0],
        dm2: dm[1],
        dw: dw[0],
    })
}

/// `v . grad f` as separate terms.
fn along(v: &[f64; 3], grad: &[f64; 3]) -> [f64; 3] {
    [v[0] * grad[0], v[1] * grad[1], v[2] * grad[2]]
}

fn terms(parts: &[&[f64]]) -> Residual {
    let all: Vec<f64> = parts.iter().flat_map(|p| p.iter().copied()).collect();
    Residual::from_terms(&all)
}

/// The 28 determining equations followed by the three printed forms.
fn equations(l: &Local) -> Vec<Residual> {
    let (r, r2) = (l.r, l.r * l.r);
    let (s1, s2, b) = (&l.s1, &l.s2, &l.b);
    let (d1, d2) = (&l.ds1, &l.ds2);
    const R: usize = 0;
    const P: usize = 1;
    const Z: usize = 2;
    let neg = |a: [f64; 3]| a.map(|x| -x);
    let mut e = Vec::with_capacity(31);
    // second order in momenta, X1 with H
    e.push(terms(&[&[d1[R][R]]]));
    e.push(terms(&[&[d1[P][P], s1[R] / r]]));
    e.push(terms(&[&[d1[R][P], r2 * d1[P][R], 2.0 * r2 * b[Z]]]));
    e.push(terms(&[&[d1[Z][P], r2 * d1[P][Z], -2.0 * r2 * b[R]]]));
    e.push(terms(&[&[d1[Z][R], d1[R][Z]]]));
    e.push(terms(&[&[d1[Z][Z]]]));
    // second order, X2 with H
    e.push(terms(&[&[d2[R][R]]]));
    e.push(terms(&[&[d2[P][P], s2[R] / r]]));
    e.push(terms(&[&[d2[R][P], r2 * d2[P][R]]]));
    e.push(terms(&[&[d2[Z][P], r2 * d2[P][Z], 2.0 * b[R]]]));
    e.push(terms(&[&[d2[Z][R], d2[R][Z], -2.0 * b[P]]]));
    e.push(terms(&[&[d2[Z][Z]]]));
    // first order
    e.push(terms(&[&[l.dm1[R], -s1[Z] * b[P], s1[P] * b[Z]]]));
    e.push(terms(&[&[l.dm1[P], -s1[R] * b[Z], s1[Z] * b[R], -2.0 * r2 * l.dw[P]]]));
    e.push(terms(&[&[l.dm1[Z], -s1[P] * b[R], s1[R] * b[P]]]));
    e.push(terms(&[&[l.dm2[R], -s2[Z] * b[P], s2[P] * b[Z]]]));
    e.push(terms(&[&[l.dm2[P], -s2[R] * b[Z], s2[Z] * b[R]]]));
    e.push(terms(&[&[l.dm2[Z], -s2[P] * b[R], s2[R] * b[P], -2.0 * l.dw[Z]]]));
    // zeroth order
    e.push(terms(&[&along(s1, &l.dw)]));
    e.push(terms(&[&along(s2, &l.dw)]));
    // {X1, X2}, second order
    e.push(terms(&[&[d2[P][P]]]));
    e.push(terms(&[&[d2[R][P]]]));
    e.push(terms(&[&[d1[R][Z]]]));
    e.push(terms(&[&[d2[Z][P], -d1[P][Z], 2.0 * b[R]]]));
    // {X1, X2}, first order (coefficients of p_r, p_Z, p_phi)
    e.push(terms(&[&along(s2, &d1[R]), &neg(along(s1, &d2[R]))]));
    e.push(terms(&[
        &[2.0 * b[P] * s1[R], -2.0 * b[R] * s1[P], 2.0 * l.dm1[Z]],
        &along(s2, &d1[Z]),
        &neg(along(s1, &d2[Z])),
    ]));
    e.push(terms(&[
        &[2.0 * b[Z] * s2[R], -2.0 * b[R] * s2[Z], -2.0 * l.dm2[P]],
        &along(s2, &d1[P]),
        &neg(along(s1, &d2[P])),
    ]));
    // {X1, X2}, zeroth order: s2 . grad m1 - s1 . grad m2 - B . (s1 x s2)
    let cross = [
        s1[P] * s2[Z] - s1[Z] * s2[P],
        s1[Z] * s2[R] - s1[R] * s2[Z],
        s1[R] * s2[P] - s1[P] * s2[R],
    ];
    e.push(terms(&[
        &along(s2, &l.dm1),
        &neg(along(s1, &l.dm2)),
        &[-b[R] * cross[0], -b[P] * cross[1], -b[Z] * cross[2]],
    ]));
    // printed first-order forms, with the token "2_1^Z" read as s1^Z
    e.push(terms(&[&[s2[Z] * d1[R][Z], s2[P] * d1[R][P]]]));
    e.push(terms(&[&[
        -s1[P] * 2.0 * b[R],
        -s1[P] * d2[Z][P],
        s2[Z] * d1[Z][Z],
        -s1[Z] * d2[Z][Z],
        s2[P] * d1[Z][P],
        s1[R] * 2.0 * b[P],
        -s1[R] * d2[Z][R],
        2.0 * l.dm1[Z],
    ]]));
    e.push(terms(&[&[
        -s2[Z] * 2.0 * b[R],
        s2[Z] * d1[P][Z],
        s2[P] * d1[P][P],
        -s1[Z] * d2[P][Z],
        -s1[R] * d2[P][R],
        -2.0 * l.dm2[P],
    ]]));
    e
}

pub fn equation_names() -> Vec<&'static str> {
    EQUATION_GROUPS.iter().flat_map(|(_, n)| n.iter().copied()).collect()
}

/// Normalized residuals of the determining system on `grid`.
pub fn determining_residuals(sys: &SystemInstance, grid: &Grid, tol: f64) -> Result<ResidualReport> {
    determining_residuals_with_step(sys, grid, tol, DEFAULT_FD_STEP)
}

pub fn determining_residuals_with_step(sys: &SystemInstance, grid: &Grid, tol: f64, h0: f64) -> Result<ResidualReport> {
    grid.check_domain(h0)?;
    let names = equation_names();
    let total = names.len() + PRINTED_EXTRA1.len();
    let mut max = vec![0.0f64; total];
    let mut sum = vec![0.0f64; total];
    let mut raw = vec![0.0f64; total];
    let points = grid.points()?;
    for at in &points {
        let l = local(sys, at, h0)?;
        for (i, res) in equations(&l).iter().enumerate() {
            let v = res.normalized_with_floor(FD_NORMALIZATION_FLOOR);
            max[i] = max[i].max(v);
            sum[i] += v;
            raw[i] = raw[i].max(res.raw.abs());
        }
    }
    let n = points.len() as f64;
    let stats = |i: usize, name: &str| EquationStats {
        name: name.to_string(),
        max: max[i],
        mean: sum[i] / n,
        raw_max: raw[i],
    };
    let equations: Vec<EquationStats> = names.iter().enumerate().map(|(i, nm)| stats(i, nm)).collect();
    let informational = PRINTED_EXTRA1
        .iter()
        .enumerate()
        .map(|(i, nm)| stats(names.len() + i, nm))
        .collect();
    let mut groups = Vec::new();
    let mut k = 0;
    for (g, members) in EQUATION_GROUPS {
        let slice = &equations[k..k + members.len()];
        groups.push(EquationStats {
            name: g.to_string(),
            max: slice.iter().fold(0.0, |m, e| m.max(e.max)),
            mean: slice.iter().map(|e| e.mean).sum::<f64>() / slice.len() as f64,
            raw_max: slice.iter().fold(0.0, |m, e| m.max(e.raw_max)),
        });
        k += members.len();
    }
    let pass = equations.iter().all(|e| e.max <= tol);
    Ok(ResidualReport {
        family: sys.family().key().to_string(),
        grid: *grid,
        fd_step: h0,
        tolerance: tol,
        equations,
        groups,
        informational,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaugeReport {
    pub family: String,
    pub grid: Grid,
    pub fd_step: f64,
    pub tolerance: f64,
    /// Maxima for the `B^r`, `B^phi`, `B^Z` relations.
    pub components: Vec<EquationStats>,
    pub pass: bool,
}

impl GaugeReport {
    pub fn max_residual(&self) -> f64 {
        self.components.iter().fold(0.0, |m, e| m.max(e.max))
    }
}

/// Compares `B` with the FD curl of `A`:
/// `B^r = d_phi A_Z - d_Z A_phi`, `B^phi = d_Z A_r - d_r A_Z`, `B^Z = d_r A_phi - d_phi A_r`.
pub fn gauge_check(sys: &SystemInstance, grid: &Grid, tol: f64) -> Result<GaugeReport> {
    let h0 = DEFAULT_FD_STEP;
    grid.check_domain(h0)?;
    let points = grid.points()?;
    let mut max = [0.0f64; 3];
    let mut sum = [0.0f64; 3];
    let mut raw = [0.0f64; 3];
    for at in &points {
        let da = partials(|p| sys.vector_potential(p), at, h0)?;
        let b = sys.field(at)?.to_array();
        let res = [
            Residual::from_terms(&[b[0], -da[2][1], da[1][2]]),
            Residual::from_terms(&[b[1], -da[0][2], da[2][0]]),
            Residual::from_terms(&[b[2], -da[1][0], da[0][1]]),
        ];
        for i in 0..3 {
            let v = res[i].normalized_with_floor(FD_NORMALIZATION_FLOOR);
            max[i] = max[i].max(v);
            sum[i] += v;
            raw[i] = raw[i].max(res[i].raw.abs());
        }
    }
    let components: Vec<EquationStats> = ["B^r", "B^phi", "B^Z"]
        .iter()
        .enumerate()
        .map(|(i, n)| EquationStats {
            name: n.to_string(),
            max: max[i],
            mean: sum[i] / points.len() as f64,
            raw_max: raw[i],
        })
        .collect();
    let pass = components.iter().all(|c| c.max <= tol);
    Ok(GaugeReport {
        family: sys.family().key().to_string(),
        grid: *grid,
        fd_step: h0,
        tolerance: tol,
        components,
        pass,
    })
}

/// Largest `|alpha|` of the instance's auxiliary functions on `grid`.
pub fn alpha_max(sys: &SystemInstance, grid: &Grid) -> Result<f64> {
    let mut m = 0.0f64;
    for at in grid.points()? {
        m = m.max(alpha(sys.aux(), &at)?.abs());
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConservationReport {
    pub steps: usize,
    pub truncated: bool,
    /// Drift `|obs(t) - obs(0)| / max(1, |obs(0)|)` per observable.
    pub observables: Vec<EquationStats>,
}

impl ConservationReport {
    pub fn drift(&self, name: &str) -> Option<f64> {
        self.observables.iter().find(|o| o.name == name).map(|o| o.max)
    }

    pub fn max_residual(&self) -> f64 {
        self.observables.iter().fold(0.0, |m, e| m.max(e.max))
    }
}

pub fn conservation_report(traj: &Trajectory) -> Result<ConservationReport> {
    let first = traj
        .observables
        .first()
        .ok_or_else(|| validation("empty trajectory"))?
        .named();
    let mut max = vec![0.0f64; first.len()];
    let mut sum = vec![0.0f64; first.len()];
    let mut raw = vec![0.0f64; first.len()];
    for o in &traj.observables {
        for (i, ((_, v0), (_, v))) in first.iter().zip(o.named()).enumerate() {
            let d = (v - v0).abs() / v0.abs().max(1.0);
            max[i] = max[i].max(d);
            sum[i] += d;
            raw[i] = raw[i].max((v - v0).abs());
        }
    }
    let n = traj.observables.len() as f64;
    Ok(ConservationReport {
        steps: traj.len().saturating_sub(1),
        truncated: traj.is_truncated(),
        observables: first
            .iter()
            .enumerate()
            .map(|(i, (name, _))| EquationStats {
                name: name.to_string(),
                max: max[i],
                mean: sum[i] / n,
                raw_max: raw[i],
            })
            .collect(),
    })
}

/// The common JSON shape of all verification reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyJson {
    pub family: String,
    pub kind: String,
    pub seed: u64,
    pub tolerance: f64,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub per_equation: BTreeMap<String, f64>,
    pub pass: bool,
}

impl VerifyJson {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

impl From<&CommutationReport> for VerifyJson {
    fn from(r: &CommutationReport) -> Self {
        VerifyJson {
            family: r.family.clone(),
            kind: "commutation".into(),
            seed: r.seed,
            tolerance: r.tolerance,
            max_residual: r.max_residual(),
            mean_residual: r.pairs.iter().map(|p| p.mean).sum::<f64>() / r.pairs.len() as f64,
            per_equation: r.pairs.iter().map(|p| (p.pair.clone(), p.max)).collect(),
            pass: r.pass,
        }
    }
}

impl VerifyJson {
    pub fn from_residuals(r: &ResidualReport, seed: u64) -> Self {
        VerifyJson {
            family: r.family.clone(),
            kind: "residuals".into(),
            seed,
            tolerance: r.tolerance,
            max_residual: r.max_residual(),
            mean_residual: r.mean_residual(),
            per_equation: r
                .equations
                .iter()
                .chain(&r.informational)
                .map(|e| (e.name.clone(), e.max))
                .collect(),
            pass: r.pass,
        }
    }

    pub fn from_gauge(r: &GaugeReport, seed: u64) -> Self {
        VerifyJson {
            family: r.family.clone(),
            kind: "gauge".into(),
            seed,
            tolerance: r.tolerance,
            max_residual: r.max_residual(),
            mean_residual: r.components.iter().map(|c| c.mean).sum::<f64>() / 3.0,
            per_equation: r.components.iter().map(|c| (c.name.clone(), c.max)).collect(),
            pass: r.pass,
        }
    }

    pub fn from_conservation(family: &str, r: &ConservationReport, seed: u64, tol: f64) -> Self {
        let max = r.max_residual();
        VerifyJson {
            family: family.to_string(),
            kind: "conservation".into(),
            seed,
            tolerance: tol,
            max_residual: max,
            mean_residual: r.observables.iter().map(|o| o.mean).sum::<f64>() / r.observables.len().max(1) as f64,
            per_equation: r.observables.iter().map(|o| (o.name.clone(), o.max)).collect(),
            pass: max <= tol && !r.truncated,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{build_family, FamilyId, ParamSet};

    #[test]
    fn canonical_pair() {
        let ph = CylPhase::new(1.3, 0.2, 0.1, 0.4, -0.3, 0.9).unwrap();
        let b = poisson_bracket_fd(&|y: &[f64; 6]| Ok(y[0]), &|y: &[f64; 6]| Ok(y[3]), &ph, 1e-3).unwrap();
        assert!((b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn antisymmetry_is_exact() {
        let f = |y: &[f64; 6]| Ok(y[0].sin() * y[4] + y[5] * y[5] * y[2]);
        let g = |y: &[f64; 6]| Ok(y[3] * y[1].cos() + y[0] * y[4]);
        let ph = CylPhase::new(1.1, 0.7, -0.3, 0.2, 0.5, -1.0).unwrap();
        let a = poisson_bracket_fd(&f, &g, &ph, 1e-3).unwrap();
        let b = poisson_bracket_fd(&g, &f, &ph, 1e-3).unwrap();
        assert_eq!(a, -b);
    }

    #[test]
    fn free_particle_commutes() {
        let sys = build_family(FamilyId::F1, &ParamSet::new()).unwrap();
        let rep = check_commutation(&sys, 20, 7, 1e-12).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn zero_system_residuals_vanish() {
        let sys = build_family(FamilyId::F1, &ParamSet::new()).unwrap();
        let rep = determining_residuals(&sys, &Grid::default(), 0.0).unwrap();
        assert_eq!(rep.max_residual(), 0.0);
        assert_eq!(gauge_check(&sys, &Grid::default(), 0.0).unwrap().max_residual(), 0.0);
    }

    #[test]
    fn grid_near_axis_is_rejected() {
        let g = Grid {
            r: (1e-6, 1.0),
            ..Grid::default()
        };
        assert!(g.check_domain(1e-3).is_err());
    }
}
