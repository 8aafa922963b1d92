//! Command-line front end.
//!
//! Exit codes: 0 success or pass, 1 verification failure, 2 usage or
//! validation error, 3 truncated simulation or profile.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::catalog::{
    build_family, build_sample, descriptor, descriptors, FamilyId, Integral, ParamSet, SystemInstance,
};
use crate::dynamics::{integrate, IntegratorConfig, Scheme};
use crate::error::{validation, Error, Result};
use crate::geometry::{set_r_min, CylPhase, CylPoint};
use crate::odes::{solve_gamma, solve_mt, ProfileEquation, ProfileSolution, INITIAL_DATA_TOL};
use crate::specialfn::{ellip_k, jacobi_sn_cn_dn, EllipticModulus};
use crate::verify::{check_commutation, conservation_report, determining_residuals, gauge_check, Grid, VerifyJson};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_TRUNCATED: i32 = 3;

/// Environment variable overriding the near-axis cutoff.
pub const RMIN_ENV: &str = "CYLINT_RMIN";

/// Default initial state of the `conservation` suite.
pub const DEFAULT_INITIAL: [f64; 6] = [1.2, 0.3, 0.1, 0.1, 0.5, 0.05];

#[derive(Debug, Parser)]
#[command(
    name = "cylint",
    version,
    about = "Integrable charged-particle systems of cylindrical type"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the catalog families.
    List,
    /// Show the parameter schema and constraints of a family.
    Describe {
        #[arg(long)]
        family: String,
    },
    /// Evaluate potentials, field and integral coefficients at a point.
    Eval(EvalArgs),
    /// Integrate a trajectory and emit CSV.
    Simulate(SimulateArgs),
    /// Run a verification suite and emit a JSON report.
    Verify(VerifyArgs),
    /// Evaluate a Jacobi elliptic function or the complete integral K.
    Special(SpecialArgs),
    /// Solve a profile equation and emit CSV.
    Profile(ProfileArgs),
}

#[derive(Debug, Args)]
pub struct SystemArgs {
    #[arg(long)]
    pub family: String,
    /// Parameter file; the shipped sample is used when omitted.
    #[arg(long = "params-file", alias = "params")]
    pub params_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[arg(long)]
    pub r: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub phi: f64,
    #[arg(long = "z", default_value_t = 0.0, allow_hyphen_values = true)]
    pub z: f64,
    /// Canonical momenta `p_r,p_phi,p_Z`; adds H and the integrals to the output.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub momenta: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// File with `r`, `phi`, `Z`, `p_r`, `p_phi`, `p_Z` as `key = value` lines.
    #[arg(long = "initial-file", alias = "initial")]
    pub initial_file: PathBuf,
    #[arg(long = "t-end", allow_hyphen_values = true)]
    pub t_end: f64,
    #[arg(long, default_value_t = 1e-3, allow_hyphen_values = true)]
    pub dt: f64,
    #[arg(long, default_value = "implicit-midpoint")]
    pub integrator: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VerifyKind {
    Commutation,
    Residuals,
    Gauge,
    Conservation,
}

impl VerifyKind {
    pub fn default_tolerance(self) -> f64 {
        match self {
            VerifyKind::Gauge => 1e-7,
            _ => 1e-6,
        }
    }
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub kind: VerifyKind,
    #[command(flatten)]
    pub system: SystemArgs,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, allow_hyphen_values = true)]
    pub tol: Option<f64>,
    /// Grid as `NRxNPHIxNZ`.
    #[arg(long, default_value = "5x8x5")]
    pub grid: String,
    /// Initial state for `conservation`; defaults to a fixed state near r = 1.2.
    #[arg(long = "initial-file")]
    pub initial_file: Option<PathBuf>,
    #[arg(long = "t-end", default_value_t = 10.0, allow_hyphen_values = true)]
    pub t_end: f64,
    #[arg(long, default_value_t = 1e-3, allow_hyphen_values = true)]
    pub dt: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpecialFn {
    Sn,
    Cn,
    Dn,
    #[value(name = "K")]
    K,
}

#[derive(Debug, Args)]
pub struct SpecialArgs {
    pub function: SpecialFn,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub u: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub k: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProfileKind {
    Gamma,
    Mt,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    pub kind: ProfileKind,
    /// Equation coefficients: `f1,beta1,beta2` for gamma, `C,C1,C2,C3` for mt.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub coeffs: Vec<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub y0: f64,
    /// Initial slope; taken from the first integral when omitted.
    #[arg(long, allow_hyphen_values = true)]
    pub dy0: Option<f64>,
    /// Sign of the derived initial slope.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub branch: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub start: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub end: f64,
    /// Output every n-th node.
    #[arg(long, default_value_t = 100)]
    pub every: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `std::env::args` and runs, returning the exit code.
pub fn run() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    if let Ok(v) = std::env::var(RMIN_ENV) {
        let applied = v
            .trim()
            .parse::<f64>()
            .map_err(|_| validation(format!("{RMIN_ENV} is not a number: {v}")))
            .and_then(set_r_min);
        if let Err(e) = applied {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    }
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::List => {
            emit(out, None, &list_table())?;
            Ok(EXIT_OK)
        }
        Command::Describe { family } => {
            let id: FamilyId = family.parse()?;
            emit(out, None, &descriptor(id).render())?;
            Ok(EXIT_OK)
        }
        Command::Eval(a) => cmd_eval(a, out),
        Command::Simulate(a) => cmd_simulate(a, out),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Special(a) => cmd_special(a, out),
        Command::Profile(a) => cmd_profile(a, out),
    }
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| validation(format!("cannot write {}: {e}", p.display()))),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| validation(format!("cannot write output: {e}"))),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| validation(format!("cannot read {}: {e}", path.display())))
}

/// The table printed by `list`, one row per family.
pub fn list_table() -> String {
    let mut s = format!("{:<4}{:<22}{}\n", "id", "name", "summary");
    for d in descriptors() {
        s.push_str(&format!("{:<4}{:<22}{}\n", d.id.key(), d.id.name(), d.summary));
    }
    s
}

fn load_system(a: &SystemArgs) -> Result<SystemInstance> {
    let id: FamilyId = a.family.parse()?;
    match &a.params_file {
        Some(p) => build_family(id, &ParamSet::parse(&read(p)?)?),
        None => build_sample(id),
    }
}

const INITIAL_KEYS: [&str; 6] = ["r", "phi", "Z", "p_r", "p_phi", "p_Z"];

/// Parses an initial-state file of `key = value` lines.
pub fn parse_initial(text: &str) -> Result<CylPhase> {
    let set = ParamSet::parse(text)?;
    if let Some(k) = set.slots().keys().chain(set.words().keys()).next() {
        return Err(Error::Parse(format!(
            "initial state entries must be numbers, got '{k}'"
        )));
    }
    let c = set.constants();
    if let Some(k) = c.keys().find(|k| !INITIAL_KEYS.contains(&k.as_str())) {
        return Err(Error::Parse(format!("unknown initial-state key '{k}'")));
    }
    let mut v = [0.0; 6];
    for (slot, key) in v.iter_mut().zip(INITIAL_KEYS) {
        *slot = *c
            .get(key)
            .ok_or_else(|| Error::Parse(format!("initial state is missing '{key}'")))?;
    }
    CylPhase::from_array(v)
}

fn cmd_eval(a: EvalArgs, out: &mut dyn Write) -> Result<i32> {
    let sys = load_system(&a.system)?;
    let at = CylPoint::new(a.r, a.phi, a.z)?;
    let fmt3 = |v: [f64; 3]| format!("{} {} {}", v[0], v[1], v[2]);
    let mut s = String::new();
    s.push_str(&format!("family = {}\n", sys.family().key()));
    s.push_str(&format!("point = {} {} {}\n", at.r(), at.phi(), at.z()));
    s.push_str(&format!("W = {}\n", sys.potential(&at)?));
    s.push_str(&format!("A = {}\n", fmt3(sys.vector_potential(&at)?)));
    s.push_str(&format!("B = {}\n", fmt3(sys.field(&at)?.to_array())));
    s.push_str(&format!("s1 = {}\n", fmt3(sys.s1(&at)?)));
    s.push_str(&format!("s2 = {}\n", fmt3(sys.s2(&at)?)));
    s.push_str(&format!("m1 = {}\n", sys.m1(&at)?));
    s.push_str(&format!("m2 = {}\n", sys.m2(&at)?));
    if let Some(p) = a.momenta {
        if p.len() != 3 {
            return Err(validation(format!("--momenta needs three values, got {}", p.len())));
        }
        let ph = CylPhase::new(a.r, a.phi, a.z, p[0], p[1], p[2])?;
        let mut which = vec![Integral::H, Integral::X1, Integral::X2];
        which.extend(sys.first_order_integrals().unwrap_or_default());
        for i in which {
            s.push_str(&format!("{} = {}\n", i.name(), sys.integral_value(i, &ph)?));
        }
    }
    emit(out, None, &s)?;
    Ok(EXIT_OK)
}

fn integrator_config(name: &str, dt: f64) -> Result<IntegratorConfig> {
    let scheme: Scheme = name.parse()?;
    IntegratorConfig::new(scheme, dt)
}

fn cmd_simulate(a: SimulateArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = integrator_config(&a.integrator, a.dt)?;
    let sys = load_system(&a.system)?;
    let initial = parse_initial(&read(&a.initial_file)?)?;
    let traj = integrate(&sys, &initial, a.t_end, &cfg)?;
    emit(out, a.out.as_deref(), &traj.to_csv())?;
    Ok(if traj.is_truncated() { EXIT_TRUNCATED } else { EXIT_OK })
}

/// Parses `NRxNPHIxNZ` onto the default grid ranges.
pub fn parse_grid(spec: &str) -> Result<Grid> {
    let dims: Vec<usize> = spec
        .split('x')
        .map(|t| t.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| validation(format!("grid must look like 5x8x5, got '{spec}'")))?;
    match dims[..] {
        [n_r, n_phi, n_z] if n_r > 0 && n_phi > 0 && n_z > 0 => Ok(Grid {
            n_r,
            n_phi,
            n_z,
            ..Grid::default()
        }),
        _ => Err(validation(format!("grid must have three positive sizes, got '{spec}'"))),
    }
}

/// Runs one verification suite and returns its JSON report.
pub fn verify_report(sys: &SystemInstance, kind: VerifyKind, opts: &VerifyOptions) -> Result<VerifyJson> {
    let tol = opts.tol.unwrap_or(kind.default_tolerance());
    if !(tol >= 0.0) {
        return Err(validation(format!("tolerance must be non-negative, got {tol}")));
    }
    Ok(match kind {
        VerifyKind::Commutation => VerifyJson::from(&check_commutation(sys, opts.samples, opts.seed, tol)?),
        VerifyKind::Residuals => VerifyJson::from_residuals(&determining_residuals(sys, &opts.grid, tol)?, opts.seed),
        VerifyKind::Gauge => VerifyJson::from_gauge(&gauge_check(sys, &opts.grid, tol)?, opts.seed),
        VerifyKind::Conservation => {
            let cfg = IntegratorConfig::midpoint(opts.dt)?;
            let traj = integrate(sys, &opts.initial, opts.t_end, &cfg)?;
            VerifyJson::from_conservation(sys.family().key(), &conservation_report(&traj)?, opts.seed, tol)
        }
    })
}

/// Inputs of [`verify_report`].
#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub samples: usize,
    pub seed: u64,
    pub tol: Option<f64>,
    pub grid: Grid,
    pub initial: CylPhase,
    pub t_end: f64,
    pub dt: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            samples: 100,
            seed: 0,
            tol: None,
            grid: Grid::default(),
            initial: CylPhase::from_array(DEFAULT_INITIAL).expect("valid default state"),
            t_end: 10.0,
            dt: 1e-3,
        }
    }
}

fn cmd_verify(a: VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let sys = load_system(&a.system)?;
    let initial = match &a.initial_file {
        Some(p) => parse_initial(&read(p)?)?,
        None => CylPhase::from_array(DEFAULT_INITIAL)?,
    };
    let opts = VerifyOptions {
        samples: a.samples,
        seed: a.seed,
        tol: a.tol,
        grid: parse_grid(&a.grid)?,
        initial,
        t_end: a.t_end,
        dt: a.dt,
    };
    let report = verify_report(&sys, a.kind, &opts)?;
    let mut text = report.to_json();
    text.push('\n');
    emit(out, a.out.as_deref(), &text)?;
    Ok(if report.pass { EXIT_OK } else { EXIT_FAIL })
}

/// Value printed by `special`.
pub fn special_value(f: SpecialFn, u: f64, k: f64) -> Result<f64> {
    let m = EllipticModulus::new(k)?;
    if !u.is_finite() {
        return Err(validation(format!("u must be finite, got {u}")));
    }
    Ok(match f {
        SpecialFn::Sn => jacobi_sn_cn_dn(u, m).sn,
        SpecialFn::Cn => jacobi_sn_cn_dn(u, m).cn,
        SpecialFn::Dn => jacobi_sn_cn_dn(u, m).dn,
        SpecialFn::K => ellip_k(m)?,
    })
}

fn cmd_special(a: SpecialArgs, out: &mut dyn Write) -> Result<i32> {
    let v = special_value(a.function, a.u, a.k)?;
    emit(out, None, &format!("{v}\n"))?;
    Ok(EXIT_OK)
}

/// CSV of a profile solution: `x, y, dy, monitor` at every `every`-th node.
pub fn profile_csv(sol: &ProfileSolution, every: usize) -> String {
    let mut s = String::from("x,y,dy,monitor\n");
    let monitor = sol.monitor_series();
    let nodes: Vec<(f64, f64, f64)> = sol.nodes().collect();
    let last = nodes.len().saturating_sub(1);
    for (i, (x, y, dy)) in nodes.iter().enumerate() {
        if i % every.max(1) == 0 || i == last {
            let m = monitor.get(i).copied().unwrap_or(f64::NAN);
            s.push_str(&format!("{x:.16e},{y:.16e},{dy:.16e},{m:.16e}\n"));
        }
    }
    s
}

fn cmd_profile(a: ProfileArgs, out: &mut dyn Write) -> Result<i32> {
    let eq = match (a.kind, &a.coeffs[..]) {
        (ProfileKind::Gamma, &[f1, beta1, beta2]) => ProfileEquation::Gamma { f1, beta1, beta2 },
        (ProfileKind::Mt, &[c, c1, c2, c3]) => ProfileEquation::Cubic { c, c1, c2, c3 },
        (ProfileKind::Gamma, _) => return Err(validation("gamma needs --coeffs f1,beta1,beta2")),
        (ProfileKind::Mt, _) => return Err(validation("mt needs --coeffs C,C1,C2,C3")),
    };
    let dy0 = match a.dy0 {
        Some(d) => d,
        None => {
            let sq = eq.slope_squared(a.y0);
            if sq < -INITIAL_DATA_TOL {
                return Err(validation(format!(
                    "no real slope at y0 = {}: slope squared is {sq}",
                    a.y0
                )));
            }
            a.branch.signum() * sq.max(0.0).sqrt()
        }
    };
    let span = (a.start, a.end);
    let sol = match eq {
        ProfileEquation::Gamma { f1, beta1, beta2 } => solve_gamma(f1, beta1, beta2, a.y0, dy0, span)?,
        ProfileEquation::Cubic { c, c1, c2, c3 } => solve_mt(c, c1, c2, c3, a.y0, dy0, span)?,
    };
    emit(out, a.out.as_deref(), &profile_csv(&sol, a.every))?;
    Ok(if sol.is_truncated() { EXIT_TRUNCATED } else { EXIT_OK })
}
