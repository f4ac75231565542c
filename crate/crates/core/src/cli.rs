//! The `opsys` command line: JSON in, JSON report out.
//!
//! Exit codes: 0 success or feasible, 1 usage or parse error, 2 infeasible,
//! negative or inconclusive outcome, 3 numerical failure.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use crate::cpmaps::{self, CPMap, CPMapJson, FunctionalJson, PositiveFunctional, StateWeights};
use crate::error::{Error, Result};
use crate::extend::{self, InvarianceOutcome, SystemFunctional};
use crate::haar::{self, HaarNeighborhood};
use crate::iso::{self, FunctionMap};
use crate::linalg::{traceless_hermitian_basis, CMatrix, C64};
use crate::opsys::{FunctionSystem, OperatorSystem, OperatorSystemJson};
use crate::VERSION;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NEGATIVE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "opsys", version, about = "Operator systems, CP maps and state extensions")]
pub struct Cli {
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide complete positivity of a map (Choi matrix or CP extension).
    CheckCp {
        #[arg(long)]
        map: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Print the Choi matrix of a map on a full matrix algebra.
    Choi {
        #[arg(long)]
        map: PathBuf,
    },
    /// Map ↔ functional correspondence on M_n(S).
    Correspond(CorrespondArgs),
    /// Extend a state from S to S + Cx.
    Extend(ExtendArgs),
    /// The extension interval [β₁, β₂] together with P_f(x).
    Interval(ElementArgs),
    /// Faithful UCP extension of a map on S, optionally with an invariance constraint.
    FaithfulExtend(FaithfulArgs),
    /// Monte Carlo averaging over a neighbourhood of I in U_n.
    HaarAvg(HaarArgs),
    /// Estimate the depolarizing constant c_U.
    EstimateC(HaarArgs),
    /// Invariant state of τ_c by the geometric series.
    InvariantState {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        c: f64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// The invariants x_k(λ) on a grid; with --y, compare two elements.
    Invariants {
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        y: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        kmax: usize,
        /// Only "default" is available.
        #[arg(long, default_value = "default")]
        grid: String,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Search for u with u x u* = y.
    FindUnitary {
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        y: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 16)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Paulsen 2×2 system of an operator space.
    Paulsen {
        #[arg(long)]
        generators: PathBuf,
        /// Ambient size, needed only when the generator list is empty.
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        check_cocycle: bool,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Recover the point map behind an isomorphism of function systems.
    Stone {
        #[arg(long = "F")]
        f: PathBuf,
        #[arg(long = "Fp")]
        fp: PathBuf,
        #[arg(long)]
        map: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct CorrespondArgs {
    /// Map τ; emits its functional s.
    #[arg(long, conflicts_with = "functional", required_unless_present = "functional")]
    pub map: Option<PathBuf>,
    /// Functional s; emits its map τ.
    #[arg(long)]
    pub functional: Option<PathBuf>,
    /// Matrix level n of M_n(S); defaults to the output size of τ.
    #[arg(long)]
    pub level: Option<usize>,
    /// State weights λ for the weighted functional s_{τ,λ}.
    #[arg(long, requires = "map")]
    pub weights: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ElementArgs {
    #[arg(long)]
    pub system: PathBuf,
    #[arg(long)]
    pub functional: PathBuf,
    #[arg(long)]
    pub element: PathBuf,
}

#[derive(Debug, Args)]
#[group(id = "mode", multiple = false)]
pub struct ExtendArgs {
    #[command(flatten)]
    pub input: ElementArgs,
    /// Prescribed value α = g(x).
    #[arg(long, group = "mode")]
    pub alpha: Option<f64>,
    #[arg(long, group = "mode")]
    pub interval: bool,
    /// Extension with the largest least eigenvalue.
    #[arg(long, group = "mode")]
    pub faithful: bool,
}

#[derive(Debug, Args)]
pub struct FaithfulArgs {
    #[arg(long)]
    pub map: PathBuf,
    /// Density of φ₀; asks for tr₀∘η = φ₀ instead of faithfulness.
    #[arg(long)]
    pub phi0: Option<PathBuf>,
    /// Restrict the invariance constraint to this operator system.
    #[arg(long, requires = "phi0")]
    pub domain: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HaarArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub delta: f64,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long)]
    pub seed: u64,
    /// Also average this matrix.
    #[arg(long)]
    pub x: Option<PathBuf>,
}

/// Exit code and report of one invocation.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub report: Value,
}

/// Parses `args` (including the program name), runs, writes the report and
/// returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = run(&cli);
    let text = serde_json::to_string_pretty(&outcome.report).expect("reports are valid JSON");
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text + "\n") {
                eprintln!("cannot write {}: {e}", path.display());
                return EXIT_USAGE;
            }
        }
        None => println!("{text}"),
    }
    outcome.code
}

pub fn run(cli: &Cli) -> Outcome {
    let name = command_name(&cli.command);
    match dispatch(&cli.command) {
        Ok((code, body)) => Outcome {
            code,
            report: finish(name, code, body),
        },
        Err(e) => {
            let code = exit_code(&e);
            let mut body = json!({ "error": e.to_string() });
            match e {
                Error::Infeasible { certificate_value } => {
                    body["certificate_value"] = json!(certificate_value);
                }
                Error::AlphaOutOfRange { alpha, beta1, beta2 } => {
                    body["alpha"] = json!(alpha);
                    body["beta1"] = json!(beta1);
                    body["beta2"] = json!(beta2);
                }
                Error::NoFaithfulExtensionFound { margin } => body["margin"] = json!(margin),
                Error::Inconclusive { residual } => body["residual"] = json!(residual),
                _ => {}
            }
            Outcome {
                code,
                report: finish(name, code, body),
            }
        }
    }
}

fn finish(name: &str, code: i32, mut body: Value) -> Value {
    let status = match code {
        EXIT_OK => "ok",
        EXIT_USAGE => "usage_error",
        EXIT_NEGATIVE => "negative",
        _ => "numerical_failure",
    };
    if body.get("status").is_none() {
        body["status"] = json!(status);
    }
    body["command"] = json!(name);
    body["version"] = json!(VERSION);
    body["exit_code"] = json!(code);
    body
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidInput(_)
        | Error::Json(_)
        | Error::Io(_)
        | Error::DimensionMismatch(_)
        | Error::ShapeMismatch(_)
        | Error::LevelMismatch { .. }
        | Error::NotHermitian { .. }
        | Error::WeightMismatch(_)
        | Error::DomainNotFullAlgebra
        | Error::DegenerateDimension => EXIT_USAGE,
        Error::SolverFailure(_) | Error::NoConvergence { .. } | Error::RejectionBudgetExceeded { .. } => {
            EXIT_NUMERICAL
        }
        _ => EXIT_NEGATIVE,
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::CheckCp { .. } => "check-cp",
        Command::Choi { .. } => "choi",
        Command::Correspond(_) => "correspond",
        Command::Extend(_) => "extend",
        Command::Interval(_) => "interval",
        Command::FaithfulExtend(_) => "faithful-extend",
        Command::HaarAvg(_) => "haar-avg",
        Command::EstimateC(_) => "estimate-c",
        Command::InvariantState { .. } => "invariant-state",
        Command::Invariants { .. } => "invariants",
        Command::FindUnitary { .. } => "find-unitary",
        Command::Paulsen { .. } => "paulsen",
        Command::Stone { .. } => "stone",
    }
}

/// Reads `path` as T, either at the top level or under one of `keys`, so
/// that reports from one subcommand can be fed to another unchanged.
pub fn load<T: DeserializeOwned>(path: &Path, keys: &[&str]) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)?;
    let direct = serde_json::from_value::<T>(value.clone());
    if let Ok(t) = direct {
        return Ok(t);
    }
    for k in keys {
        if let Some(inner) = value.get(*k) {
            if let Ok(t) = serde_json::from_value::<T>(inner.clone()) {
                return Ok(t);
            }
        }
    }
    Err(Error::InvalidInput(format!(
        "{}: {}",
        path.display(),
        direct.err().map(|e| e.to_string()).unwrap_or_default()
    )))
}

fn load_matrix(path: &Path) -> Result<CMatrix> {
    load(path, &["matrix", "u", "rho", "density", "x"])
}

fn load_map(path: &Path) -> Result<CPMap> {
    CPMap::try_from(load::<CPMapJson>(path, &["map", "eta"])?)
}

fn load_system(path: &Path) -> Result<OperatorSystem> {
    OperatorSystem::try_from(load::<OperatorSystemJson>(path, &["system"])?)
}

/// A level-one functional on `s`: a functional file or a bare density matrix.
fn load_system_functional(path: &Path, s: &OperatorSystem) -> Result<SystemFunctional> {
    if let Ok(rho) = load_matrix(path) {
        return SystemFunctional::from_density(s, &rho);
    }
    let f = PositiveFunctional::try_from(load::<FunctionalJson>(path, &["functional"])?)?;
    match f.domain() {
        cpmaps::Domain::Full(_) => SystemFunctional::from_density(s, &f.density_matrix()?),
        cpmaps::Domain::System(_) => {
            let sf = SystemFunctional::from_functional(&f)?;
            if sf.system.ambient_dim() != s.ambient_dim() {
                return Err(Error::DimensionMismatch("functional and system live in different M_m".into()));
            }
            // f(x) = tr(Fx) on S only needs the component of F inside S.
            Ok(SystemFunctional {
                system: s.clone(),
                matrix: s.project(&sf.matrix)?,
            })
        }
    }
}

type Reply = Result<(i32, Value)>;

fn dispatch(c: &Command) -> Reply {
    match c {
        Command::CheckCp { map, tol } => check_cp(map, *tol),
        Command::Choi { map } => choi(map),
        Command::Correspond(a) => correspond(a),
        Command::Extend(a) => extend_cmd(a),
        Command::Interval(a) => interval(a),
        Command::FaithfulExtend(a) => faithful(a),
        Command::HaarAvg(a) => haar_avg(a),
        Command::EstimateC(a) => estimate_c(a),
        Command::InvariantState { map, c, tol } => invariant_state(map, *c, *tol),
        Command::Invariants {
            x,
            y,
            kmax,
            grid,
            tol,
        } => invariants(x, y.as_deref(), *kmax, grid, *tol),
        Command::FindUnitary {
            x,
            y,
            tol,
            restarts,
            seed,
        } => find_unitary(x, y, *tol, *restarts, *seed),
        Command::Paulsen {
            generators,
            m,
            check_cocycle,
            trials,
            seed,
        } => paulsen(generators, *m, *check_cocycle, *trials, *seed),
        Command::Stone { f, fp, map } => stone(f, fp, map),
    }
}

fn check_cp(path: &Path, tol: f64) -> Reply {
    let tau = load_map(path)?;
    let unital = tau.unital_residual()?;
    let mut body = json!({ "unital_residual": unital, "m": tau.m(), "n": tau.n() });
    let is_cp = if tau.domain().is_full() {
        let min = tau.choi_min_eigenvalue()?;
        body["min_choi_eigenvalue"] = json!(min);
        min >= -tol
    } else {
        match extend::arveson_extension(&tau) {
            Ok(eta) => {
                body["extension"] = json!(eta.to_json());
                body["extension_agreement_residual"] = json!(extend::agreement_residual(&eta, &tau)?);
                true
            }
            Err(Error::Infeasible { certificate_value }) => {
                body["certificate_value"] = json!(certificate_value);
                false
            }
            Err(e) => return Err(e),
        }
    };
    body["is_cp"] = json!(is_cp);
    Ok((if is_cp { EXIT_OK } else { EXIT_NEGATIVE }, body))
}

fn choi(path: &Path) -> Reply {
    let tau = load_map(path)?;
    let c = tau.choi()?;
    let min = tau.choi_min_eigenvalue()?;
    Ok((EXIT_OK, json!({ "matrix": c, "min_eigenvalue": min })))
}

fn correspond(a: &CorrespondArgs) -> Reply {
    if let Some(path) = &a.functional {
        let f = PositiveFunctional::try_from(load::<FunctionalJson>(path, &["functional"])?)?;
        let tau = cpmaps::cpmap_from_functional(&f)?;
        let back = cpmaps::functional_from_cpmap(&tau, f.level())?;
        let residual = back
            .coefficients()
            .iter()
            .zip(f.coefficients())
            .map(|(p, q)| (p - q).norm())
            .fold(0.0, f64::max);
        return Ok((
            EXIT_OK,
            json!({ "map": tau.to_json(), "roundtrip_residual": residual }),
        ));
    }
    let path = a.map.as_ref().expect("clap requires --map or --functional");
    let tau = load_map(path)?;
    let level = a.level.unwrap_or(tau.n());
    let (f, diag_check) = match &a.weights {
        Some(w) => {
            let w: StateWeights = load(w, &["weights"])?;
            w.validate()?;
            let f = cpmaps::weighted_functional(&tau, &w)?;
            // s_{τ,λ}(x ⊗ I) = φ₀(τ(x)).
            let phi0 = w.phi0_density();
            let worst = diagonal_residual(&tau, &f, |y| phi0.trace_product(y))?;
            (f, worst)
        }
        None => {
            let f = cpmaps::functional_from_cpmap(&tau, level)?;
            let worst = diagonal_residual(&tau, &f, |y| y.trace() / y.rows() as f64)?;
            (f, worst)
        }
    };
    let mut body = json!({ "functional": f.to_json(), "diagonal_residual": diag_check });
    if a.weights.is_none() {
        let back = cpmaps::cpmap_from_functional_unchecked(&f)?;
        let residual = back
            .basis_images()
            .iter()
            .zip(tau.basis_images())
            .map(|(p, q)| p.dist(q))
            .fold(0.0, f64::max);
        body["roundtrip_residual"] = json!(residual);
    }
    Ok((EXIT_OK, body))
}

/// max over the domain basis of |s(b ⊗ I) − state(τ(b))|.
fn diagonal_residual(tau: &CPMap, f: &PositiveFunctional, state: impl Fn(&CMatrix) -> C64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for b in tau.domain().basis() {
        let lhs = f.evaluate_diagonal(&b)?;
        let rhs = state(&tau.apply(&b)?);
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}

fn load_element_args(a: &ElementArgs) -> Result<(SystemFunctional, CMatrix)> {
    let s = load_system(&a.system)?;
    let f = load_system_functional(&a.functional, &s)?;
    let x = load_matrix(&a.element)?;
    Ok((f, x))
}

fn interval_body(iv: &extend::ExtensionInterval) -> Value {
    json!({
        "beta1": iv.beta1,
        "beta2": iv.beta2,
        "p_value": iv.p_value,
        "duality_residual": iv.duality_residual,
        "rho_min": iv.rho_min,
        "rho_max": iv.rho_max,
    })
}

fn extend_cmd(a: &ExtendArgs) -> Reply {
    let (f, x) = load_element_args(&a.input)?;
    if let Some(alpha) = a.alpha {
        let rho = extend::extend_functional(&f, &x, alpha)?;
        let value = rho.trace_product(&x).re;
        let agreement = f
            .system
            .basis()
            .iter()
            .zip(f.basis_values())
            .map(|(b, v)| (rho.trace_product(b) - v).norm())
            .fold(0.0, f64::max);
        return Ok((
            EXIT_OK,
            json!({ "rho": rho, "alpha": alpha, "value": value, "agreement_residual": agreement }),
        ));
    }
    if a.faithful {
        let fs = extend::faithful_state_extension(&f)?;
        let value = fs.rho.trace_product(&x).re;
        let code = if fs.margin > extend::MARGIN_TOL { EXIT_OK } else { EXIT_NEGATIVE };
        return Ok((
            code,
            json!({ "rho": fs.rho, "margin": fs.margin, "value": value }),
        ));
    }
    let iv = extend::extension_interval(&f, &x)?;
    Ok((EXIT_OK, interval_body(&iv)))
}

fn interval(a: &ElementArgs) -> Reply {
    let (f, x) = load_element_args(a)?;
    let iv = extend::extension_interval(&f, &x)?;
    let mk = extend::minkowski_value(&f, &x)?;
    let mut body = interval_body(&iv);
    body["minkowski"] = json!(mk);
    Ok((EXIT_OK, body))
}

fn faithful(a: &FaithfulArgs) -> Reply {
    let tau = load_map(&a.map)?;
    if let Some(p) = &a.phi0 {
        let phi0 = load_matrix(p)?;
        let domain = a.domain.as_deref().map(load_system).transpose()?;
        return match extend::invariance_constrained_extension(&tau, &phi0, domain.as_ref())? {
            InvarianceOutcome::Feasible(eta) => Ok((
                EXIT_OK,
                json!({
                    "feasible": true,
                    "eta": eta.to_json(),
                    "agreement_residual": extend::agreement_residual(&eta, &tau)?,
                }),
            )),
            InvarianceOutcome::Infeasible {
                certificate,
                certificate_value,
            } => Ok((
                EXIT_NEGATIVE,
                json!({
                    "feasible": false,
                    "status": "infeasible",
                    "certificate": certificate,
                    "certificate_value": certificate_value,
                }),
            )),
        };
    }
    match extend::faithful_extension(&tau) {
        Ok(fe) => Ok((
            EXIT_OK,
            json!({
                "eta": fe.eta.to_json(),
                "margin": fe.margin,
                "agreement_residual": fe.agreement_residual,
            }),
        )),
        Err(Error::NoFaithfulExtensionFound { margin }) => Ok((
            EXIT_NEGATIVE,
            json!({ "status": "inconclusive", "margin": margin }),
        )),
        Err(e) => Err(e),
    }
}

fn neighborhood(a: &HaarArgs) -> Result<HaarNeighborhood> {
    if a.samples < 2 {
        return Err(Error::InvalidInput("need at least 2 samples".into()));
    }
    HaarNeighborhood::new(a.n, a.delta, a.seed)
}

fn haar_avg(a: &HaarArgs) -> Reply {
    let mut u = neighborhood(a)?;
    let mut body = json!({ "n": a.n, "delta": a.delta, "samples": a.samples, "seed": a.seed });
    if a.n >= 2 {
        let (c, hw) = u.estimate_c_u(a.samples)?;
        // Fit on the traceless basis: E(b) ≈ c_fit·b, off-model part relative to ‖b‖ = 1.
        let basis = traceless_hermitian_basis(a.n);
        let mut fit = 0.0;
        let mut means = Vec::with_capacity(basis.len());
        let mut std_error: f64 = 0.0;
        for b in &basis {
            let est = u.average_conjugation_stats(b, a.samples)?;
            fit += b.inner(&est.mean).re;
            std_error = std_error.max(est.std_error);
            means.push(est.mean);
        }
        fit /= basis.len() as f64;
        let off = basis
            .iter()
            .zip(&means)
            .map(|(b, e)| (e - &b.scale_real(fit)).frobenius_norm())
            .fold(0.0, f64::max);
        body["c"] = json!(c);
        body["half_width"] = json!(hw);
        body["fitted_c"] = json!(fit);
        body["off_model_residual"] = json!(off);
        body["std_error"] = json!(std_error);
    }
    if let Some(p) = &a.x {
        let x = load_matrix(p)?;
        let est = u.average_conjugation_stats(&x, a.samples)?;
        body["trace_residual"] = json!((est.mean.trace() - x.trace()).norm());
        body["average"] = json!(est.mean);
        body["average_std_error"] = json!(est.std_error);
    }
    Ok((EXIT_OK, body))
}

fn estimate_c(a: &HaarArgs) -> Reply {
    let mut u = neighborhood(a)?;
    let (c, hw) = u.estimate_c_u(a.samples)?;
    let code = if c + hw >= 0.0 && c - hw < 1.0 { EXIT_OK } else { EXIT_NEGATIVE };
    Ok((
        code,
        json!({ "n": a.n, "delta": a.delta, "samples": a.samples, "seed": a.seed, "c": c, "half_width": hw }),
    ))
}

fn invariant_state(path: &Path, c: f64, tol: f64) -> Reply {
    let tau = load_map(path)?;
    let phi = haar::invariant_state_series(&tau, c, tol)?;
    let rho = phi.density_matrix()?;
    let tc = haar::tau_c(&tau, c)?;
    let residual = tc.dual_apply(&rho)?.dist(&rho);
    Ok((
        EXIT_OK,
        json!({
            "functional": phi.to_json(),
            "density": rho,
            "invariance_residual": residual,
            "trace": rho.trace().re,
            "min_eigenvalue": phi.min_density_eigenvalue()?,
            "terms": haar::series_terms(c, tol),
        }),
    ))
}

fn invariants(x: &Path, y: Option<&Path>, kmax: usize, grid: &str, tol: f64) -> Reply {
    if grid != "default" {
        return Err(Error::InvalidInput(format!("unknown grid {grid:?}")));
    }
    if kmax == 0 {
        return Err(Error::InvalidInput("kmax must be at least 1".into()));
    }
    let x = load_matrix(x)?;
    let (ks, ls) = iso::default_grid(&x, kmax);
    let mut body = json!({ "profile": iso::invariant_profile(&x, &ks, &ls) });
    let Some(y) = y else {
        return Ok((EXIT_OK, body));
    };
    let y = load_matrix(y)?;
    body["profile_y"] = json!(iso::invariant_profile(&y, &ks, &ls));
    match iso::first_mismatch(&x, &y, &ks, &ls, tol) {
        None => {
            body["match"] = json!(true);
            Ok((EXIT_OK, body))
        }
        Some((k, l, a, b)) => {
            body["match"] = json!(false);
            body["mismatch"] = json!({ "k": k, "lambda": [l.re, l.im], "x_value": a, "y_value": b });
            Ok((EXIT_NEGATIVE, body))
        }
    }
}

fn find_unitary(x: &Path, y: &Path, tol: f64, restarts: usize, seed: u64) -> Reply {
    let (x, y) = (load_matrix(x)?, load_matrix(y)?);
    match iso::find_implementing_unitary(&x, &y, tol, restarts, seed) {
        Ok(s) => Ok((EXIT_OK, json!(s))),
        Err(Error::Inconclusive { residual }) => Ok((
            EXIT_NEGATIVE,
            json!({ "status": "inconclusive", "residual": residual }),
        )),
        Err(e) => Err(e),
    }
}

fn load_generators(path: &Path) -> Result<(Vec<CMatrix>, Option<usize>)> {
    if let Ok(list) = load::<Vec<CMatrix>>(path, &["generators"]) {
        return Ok((list, None));
    }
    let sys: OperatorSystemJson = load(path, &["system"])?;
    Ok((sys.generators, Some(sys.ambient_dim)))
}

fn paulsen(path: &Path, m: Option<usize>, check: bool, trials: usize, seed: u64) -> Reply {
    let (gens, declared) = load_generators(path)?;
    let m = m
        .or(declared)
        .or_else(|| gens.first().map(|g| g.rows()))
        .ok_or_else(|| Error::InvalidInput("empty generator list needs --m".into()))?;
    let mut ps = iso::paulsen_embed(&gens, m)?;
    let mut body = json!({
        "m": m,
        "system_dim": ps.system.dim(),
        "algebra_dim": ps.algebra.len(),
        "corner_dims": ps.corner_dims(),
        "corner_inclusion_residual": ps.corner_inclusion_residual(),
    });
    if !check {
        return Ok((EXIT_OK, body));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = haar::haar_unitary(m, &mut rng);
    let v = haar::haar_unitary(m, &mut rng);
    let fixed = ps.attach_unitaries(&u, &v)?;
    let mut genuine: f64 = 0.0;
    let triples: Vec<[CMatrix; 3]> = (0..trials)
        .map(|_| {
            [
                ps.random_corner_element(0, 0, &mut rng),
                ps.random_corner_element(0, 1, &mut rng),
                ps.random_corner_element(1, 1, &mut rng),
            ]
        })
        .collect();
    for [a, b, c] in &triples {
        genuine = genuine.max(ps.cocycle_check(a, b, c, 1e-9)?);
    }
    ps.attach_perturbed(&u, &v, 0.1)?;
    let mut corrupted = f64::INFINITY;
    for [a, b, c] in &triples {
        corrupted = corrupted.min(ps.cocycle_check(a, b, c, 1e-9)?);
    }
    let ok = genuine < 1e-10 && (triples.is_empty() || corrupted > 1e-3 || ps.corners[0][1].is_empty());
    body["corner_projection_residual"] = json!(fixed);
    body["cocycle_residual"] = json!(genuine);
    body["corrupted_min_residual"] = json!(if triples.is_empty() { 0.0 } else { corrupted });
    body["trials"] = json!(trials);
    body["u"] = json!(u);
    body["v"] = json!(v);
    Ok((if ok { EXIT_OK } else { EXIT_NEGATIVE }, body))
}

fn stone(f: &Path, fp: &Path, map: &Path) -> Reply {
    let f: FunctionSystem = load(f, &["F"])?;
    let fp: FunctionSystem = load(fp, &["Fp"])?;
    let g: FunctionMap = load(map, &["map"])?;
    let gamma = iso::stone_recover_permutation(&f, &fp, &g)?;
    Ok((EXIT_OK, json!({ "gamma": gamma })))
}
