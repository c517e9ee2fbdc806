//! The `fracpseudo` command line: `direct`, `inverse`, `verify` and
//! `ml-eval`, driven by a TOML experiment file. See `docs/formats.md`.
//!
//! Exit status: 0 on success, 1 on I/O failure, 2 for configuration or
//! validation errors, 3 for numerical failures (reported with the mode).

pub mod config;
pub mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use crate::caputo_oracle::{l1_error_exponents, l1_solve_modal, richardson, L1Grid};
use crate::direct::{derived_series, solve_direct, Derived, DirectProblem, Representation, SolverOptions, TimeGrid};
use crate::error::Error;
use crate::inverse::{inverse_diagnostics, reconstruct, InverseOptions, InverseProblemData};
use crate::ledger::NormLedger;
use crate::mlfunc::{ml_eval, MLAccuracy, MLParams};
use crate::spectral::SpectralField;
pub use config::{Config, ConfigError, Loaded};
use output::{coefficients_csv, fmt_f64, json, Report};

#[derive(Debug, Parser)]
#[command(name = "fracpseudo", version, about = "Time-fractional pseudo-parabolic problems by eigenfunction expansion")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the forward problem and write the modal report.
    Direct(Common),
    /// Recover the source and the state from the initial and final states.
    Inverse {
        #[command(flatten)]
        common: Common,
        /// Take alpha, T, the spectrum, phi and psi = u(T) from a directory
        /// written by `direct`, and compare the recovered source with the one
        /// used there.
        #[arg(long, value_name = "DIR")]
        from_direct: Option<PathBuf>,
    },
    /// Compare closed-form solutions with the L1 time-stepping oracle.
    Verify(Common),
    /// Evaluate E_{alpha,beta}(z) and print one value per line.
    #[command(name = "ml-eval")]
    MlEval {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        beta: Option<f64>,
        /// Arguments; repeat or comma-separate for several.
        #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
        z: Vec<f64>,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    /// Experiment file (TOML).
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory, created if needed; overrides `[output] dir`.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads for the per-mode loops (default: all cores).
    #[arg(long, value_name = "N")]
    pub threads: Option<usize>,
    /// Tolerance override: the quadrature self-estimate for `direct`, the
    /// round-trip tolerance for `inverse`, the oracle agreement for
    /// `verify` and the absolute accuracy for `ml-eval`.
    #[arg(long, value_name = "X")]
    pub tol: Option<f64>,
}

/// Everything that can stop a run, mapped onto the exit status.
#[derive(Debug)]
pub enum Failure {
    Config(ConfigError),
    Numerical(Error),
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(e) => write!(f, "configuration error: {e}"),
            Failure::Io(e) => write!(f, "i/o error: {e}"),
            Failure::Numerical(e) => match e.mode() {
                Some(k) => write!(f, "numerical failure in mode {k}: {}", e.root()),
                None => write!(f, "numerical failure: {e}"),
            },
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

/// Library errors raised after validation: numerical ones exit with 3,
/// anything else is a problem with the inputs.
fn classify(e: Error, file: &Path) -> Failure {
    match e.root() {
        Error::QuadratureFailure(_)
        | Error::DenominatorUnderflow { .. }
        | Error::NonConvergence(_)
        | Error::NumericOverflow(_) => Failure::Numerical(e),
        _ => Failure::Config(ConfigError { file: file.display().to_string(), line: None, message: e.to_string() }),
    }
}

/// Parse `args`, run, and report: the whole of `main`.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().filter_or("FRACPSEUDO_LOG", "warn")).try_init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("fracpseudo: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}

pub fn run(cli: Cli) -> Result<(), Failure> {
    let common = match &cli.command {
        Command::Direct(c) | Command::Verify(c) => c,
        Command::Inverse { common, .. } | Command::MlEval { common, .. } => common,
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(cli_error("--threads must be at least 1"));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Failure::Io(e.to_string()))?;
    let threads = pool.current_num_threads();
    let start = Instant::now();
    let out = pool.install(|| match &cli.command {
        Command::Direct(c) => run_direct(c),
        Command::Inverse { common, from_direct } => run_inverse(common, from_direct.as_deref()),
        Command::Verify(c) => run_verify(c),
        Command::MlEval { common, alpha, beta, z } => run_ml_eval(common, *alpha, *beta, z),
    })?;
    if let Some(dir) = out {
        // wall time lives outside the JSON so reruns stay byte-identical
        let timing = format!("wall_seconds = {}\nthreads = {threads}\n", start.elapsed().as_secs_f64());
        output::write(&dir, "timing.txt", &timing)?;
        info!("wrote results to {}", dir.display());
    }
    Ok(())
}

fn cli_error(message: &str) -> Failure {
    Failure::Config(ConfigError { file: "<command line>".into(), line: None, message: message.into() })
}

fn load(common: &Common, subcommand: &str) -> Result<Loaded, Failure> {
    let path = common.config.as_ref().ok_or_else(|| cli_error("--config is required"))?;
    let loaded = Loaded::from_path(path)?;
    loaded.check_mode(subcommand)?;
    Ok(loaded)
}

fn prepare_dir(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))
}

#[derive(Serialize)]
struct Meta<'a> {
    program: &'static str,
    version: &'static str,
    subcommand: &'a str,
    config_file: Option<String>,
    config: &'a Config,
}

fn meta(subcommand: &str, loaded: &Loaded) -> String {
    json(&Meta {
        program: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        subcommand,
        config_file: loaded.path.file_name().map(|f| f.to_string_lossy().into_owned()),
        config: &loaded.config,
    })
}

#[derive(Serialize)]
struct DirectLedger<'a> {
    representation: &'static str,
    #[serde(flatten)]
    ledger: &'a NormLedger,
}

fn run_direct(common: &Common) -> Result<Option<PathBuf>, Failure> {
    let loaded = load(common, "direct")?;
    let alpha = loaded.alpha()?;
    let t_end = loaded.t_end()?;
    let spectrum = loaded.spectrum()?;
    let grid = loaded.grid(t_end)?;
    let (quad, representation) = loaded.quad(common.tol)?;
    let phi = loaded.coeffs("phi", &spectrum)?;
    let sources = loaded.sources(spectrum.len(), &grid)?;
    let (csv, js) = loaded.formats()?;
    let dir = loaded.output_dir(common.out.as_deref());

    let problem = DirectProblem::new(phi, sources, alpha).map_err(|e| classify(e, &loaded.path))?;
    // regime checks before any computation
    problem.resolve(representation).map_err(|e| {
        Failure::Config(match e {
            Error::RegimeMismatch(_) => loaded.err(
                Some("quad"),
                "representation",
                format!(
                    "the convolution (case I) representation requires the hypothesis 1/2 < alpha <= 1, \
                     got alpha = {}; supply a source derivative and use case_ii or auto",
                    alpha.alpha()
                ),
            ),
            e => loaded.err(Some("data.source"), "derivative", e.to_string()),
        })
    })?;
    let opts = SolverOptions { quad, representation, ml: MLAccuracy::default() };
    let report = solve_direct(&problem, &grid, &opts).map_err(|e| classify(e, &loaded.path))?;
    info!("direct: {} modes, {} steps, {:?}", spectrum.len(), grid.steps(), report.representation);
    if report.differenced_derivative {
        warn!("source derivative taken by finite differences; quadrature estimate is advisory");
    }

    let Some(dir) = dir else { return Ok(None) };
    prepare_dir(&dir)?;
    if csv {
        let mut r = Report::new();
        r.series("u", &report.time_grid, &report.modal_solutions);
        for d in Derived::ALL {
            r.series(d.tag(), &report.time_grid, &derived_series(&report, d));
        }
        r.series("f", &report.time_grid, &report.source_values);
        output::write(&dir, "report.csv", &r.into_string())?;
        output::write(&dir, "phi.csv", &coefficients_csv(problem.phi.coeffs()))?;
        if let Some(c) = constant_source(&report.source_values) {
            output::write(&dir, "source.csv", &coefficients_csv(&c))?;
        }
    }
    if js {
        let repr = match report.representation {
            Representation::CaseII => "case_ii",
            _ => "case_i",
        };
        output::write(&dir, "ledger.json", &json(&DirectLedger { representation: repr, ledger: &report.ledger }))?;
    }
    output::write(&dir, "meta.json", &meta("direct", &loaded))?;
    Ok(Some(dir))
}

/// The per-mode values when every source is constant in time.
fn constant_source(rows: &[Vec<f64>]) -> Option<Vec<f64>> {
    rows.iter().map(|r| r.iter().all(|&v| v == r[0]).then_some(r[0])).collect()
}

#[derive(Serialize)]
struct Certificate<'a> {
    denominator_floor: f64,
    weighted_floor: f64,
    denominators: &'a [f64],
    c: &'a [f64],
    discarded: &'a [usize],
}

#[derive(Serialize)]
struct InverseLedger<'a> {
    #[serde(flatten)]
    ledger: &'a NormLedger,
    certificate: Certificate<'a>,
}

fn run_inverse(common: &Common, from_direct: Option<&Path>) -> Result<Option<PathBuf>, Failure> {
    // With --from-direct the problem comes from the earlier run; a config,
    // if given, only supplies the [inverse] and [output] tables.
    let (loaded, data, grid, reference) = match from_direct {
        Some(src) => {
            let own = common.config.as_ref().map(|p| Loaded::from_path(p)).transpose()?;
            let (loaded, data, grid, f_star) = from_direct_run(src)?;
            (own.unwrap_or(loaded), data, grid, Some(f_star))
        }
        None => {
            let loaded = load(common, "inverse")?;
            let alpha = loaded.alpha()?;
            let t_end = loaded.t_end()?;
            let spectrum = loaded.spectrum()?;
            let grid = loaded.grid(t_end)?;
            let phi = loaded.coeffs("phi", &spectrum)?;
            let psi = loaded.coeffs("psi", &spectrum)?;
            let data = InverseProblemData::new(phi, psi, alpha, t_end).map_err(|e| classify(e, &loaded.path))?;
            (loaded, data, grid, None)
        }
    };
    let icfg = loaded.config.inverse.clone().unwrap_or_default();
    if icfg.denom_floor.is_nan() || icfg.denom_floor < 0.0 {
        return Err(loaded.err(Some("inverse"), "denom_floor", "denom_floor must be non-negative").into());
    }
    let opts = InverseOptions { denom_floor: icfg.denom_floor, cutoff: icfg.cutoff, ml: MLAccuracy::default() };
    let oracle = L1Grid::new(icfg.oracle_steps, data.t_end)
        .map_err(|e| loaded.err(Some("inverse"), "oracle_steps", e.to_string()))?;
    let (csv, js) = loaded.formats()?;
    let dir = loaded.output_dir(common.out.as_deref());

    let sol = reconstruct(&data, &grid, &opts).map_err(|e| classify(e, &loaded.path))?;
    let mut ledger = inverse_diagnostics(&sol, &data, &oracle, &opts.ml).map_err(|e| classify(e, &loaded.path))?;
    let mu = data.spectrum().mu();
    let f_minus_mphi = sol
        .f
        .coeffs()
        .iter()
        .zip(data.phi.coeffs())
        .zip(mu)
        .map(|((f, p), m)| (f - m * p).abs())
        .fold(0.0, f64::max);
    ledger.note("f-minus-Mphi", f_minus_mphi);
    if let Some(f_star) = &reference {
        let tol = common.tol.unwrap_or(icfg.round_trip_tol);
        match f_star {
            Some(f_star) => {
                let scale = f_star.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
                let diff = sol.f.coeffs().iter().zip(f_star).fold(0.0, |m: f64, (a, b)| m.max((a - b).abs()));
                let err = if scale > 0.0 { diff / scale } else { diff };
                ledger.note("round-trip-error", err);
                ledger.note("round-trip-tol", tol);
                ledger.note("round-trip-pass", f64::from(u8::from(err <= tol)));
                if err > tol {
                    warn!("round trip error {err:e} exceeds tolerance {tol:e}");
                }
            }
            None => warn!("the direct run had a time-dependent source; no round-trip comparison"),
        }
    }

    let Some(dir) = dir else { return Ok(None) };
    prepare_dir(&dir)?;
    if csv {
        let du = sol.dalpha_u(&data, &opts.ml).map_err(|e| classify(e, &loaded.path))?;
        let s = data.spectrum();
        let scale = |rows: &[Vec<f64>], w: &dyn Fn(usize) -> f64| -> Vec<Vec<f64>> {
            rows.iter().enumerate().map(|(k, r)| r.iter().map(|v| w(k) * v).collect()).collect()
        };
        let mut r = Report::new();
        r.series("u", &sol.time_grid, &sol.u);
        r.series("Lu", &sol.time_grid, &scale(&sol.u, &|k| s.lambda()[k]));
        r.series("Mu", &sol.time_grid, &scale(&sol.u, &|k| s.mu()[k]));
        r.series("Dalpha_u", &sol.time_grid, &du);
        r.series("Dalpha_Lu", &sol.time_grid, &scale(&du, &|k| s.lambda()[k]));
        output::write(&dir, "report.csv", &r.into_string())?;
        output::write(&dir, "phi.csv", &coefficients_csv(data.phi.coeffs()))?;
        output::write(&dir, "psi.csv", &coefficients_csv(data.psi.coeffs()))?;
        output::write(&dir, "source.csv", &coefficients_csv(sol.f.coeffs()))?;
    }
    if js {
        let cert = Certificate {
            denominator_floor: sol.denom_floor,
            weighted_floor: sol.weighted_floor,
            denominators: &sol.denom,
            c: &sol.c,
            discarded: &sol.discarded,
        };
        output::write(&dir, "ledger.json", &json(&InverseLedger { ledger: &ledger, certificate: cert }))?;
    }
    output::write(&dir, "meta.json", &meta("inverse", &loaded))?;
    Ok(Some(dir))
}

#[derive(serde::Deserialize)]
struct MetaIn {
    subcommand: String,
    config: Config,
}

type FromDirect = (Loaded, InverseProblemData, TimeGrid, Option<Vec<f64>>);

/// Rebuild the inverse data from a `direct` output directory: the config
/// echo in `meta.json`, `phi.csv`, and the `u` and `f` rows of `report.csv`.
fn from_direct_run(dir: &Path) -> Result<FromDirect, Failure> {
    let meta_path = dir.join("meta.json");
    let text = std::fs::read_to_string(&meta_path).map_err(|e| Failure::Io(format!("{}: {e}", meta_path.display())))?;
    let bad = |m: String| ConfigError { file: meta_path.display().to_string(), line: None, message: m };
    let meta: MetaIn = serde_json::from_str(&text).map_err(|e| bad(format!("line {}: {e}", e.line())))?;
    if meta.subcommand != "direct" {
        return Err(bad(format!("written by `{}`, expected `direct`", meta.subcommand)).into());
    }
    let loaded = Loaded { config: meta.config, raw: String::new(), path: meta_path.clone() };
    let alpha = loaded.alpha()?;
    let t_end = loaded.t_end()?;
    let spectrum = loaded.spectrum()?;
    let n = spectrum.len();
    let report = dir.join("report.csv");
    let anchored = |p: &Path, m: String| ConfigError { file: p.display().to_string(), line: None, message: m };
    let phi = output::read_coefficients(&dir.join("phi.csv"), n).map_err(|m| anchored(&dir.join("phi.csv"), m))?;
    let (times, u) = output::read_report_series(&report, n, "u").map_err(|m| anchored(&report, m))?;
    let (_, f) = output::read_report_series(&report, n, "f").map_err(|m| anchored(&report, m))?;
    let psi: Vec<f64> = u.iter().map(|r| r[r.len() - 1]).collect();
    let grid = TimeGrid::from_nodes(times).map_err(|e| anchored(&report, e.to_string()))?;
    let field = |v: Vec<f64>| SpectralField::new(v, spectrum.clone()).map_err(|e| anchored(&report, e.to_string()));
    let data =
        InverseProblemData::new(field(phi)?, field(psi)?, alpha, t_end).map_err(|e| classify(e, &meta_path))?;
    Ok((loaded, data, grid, constant_source(&f)))
}

#[derive(Serialize)]
struct ModeCheck {
    mode_index: usize,
    closed_form: f64,
    richardson: f64,
    rel_error: f64,
}

#[derive(Serialize)]
struct VerifyLedger<'a> {
    tol: f64,
    pass: bool,
    #[serde(flatten)]
    ledger: &'a NormLedger,
    modes: &'a [ModeCheck],
}

fn run_verify(common: &Common) -> Result<Option<PathBuf>, Failure> {
    let loaded = load(common, "verify")?;
    let alpha = loaded.alpha()?;
    if alpha.alpha() >= 1.0 {
        return Err(loaded.err(None, "alpha", "verify needs 0 < alpha < 1, the range of the L1 scheme").into());
    }
    let t_end = loaded.t_end()?;
    let spectrum = loaded.spectrum()?;
    let grid = match loaded.config.grid {
        Some(_) => loaded.grid(t_end)?,
        None => TimeGrid::uniform(t_end, 16).expect("valid"),
    };
    let (quad, representation) = loaded.quad(None)?;
    let phi = loaded.coeffs("phi", &spectrum)?;
    let sources = loaded.sources(spectrum.len(), &grid)?;
    let vcfg = loaded.config.verify.clone().unwrap_or_default();
    if vcfg.steps.len() < 3 || vcfg.steps[0] < 2 || vcfg.steps.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(loaded.err(Some("verify"), "steps", "need at least 3 doubling step counts, each >= 2").into());
    }
    let modes = vcfg.modes.clone().unwrap_or_else(|| (1..=spectrum.len()).collect());
    if let Some(&k) = modes.iter().find(|&&k| k == 0 || k > spectrum.len()) {
        return Err(loaded.err(Some("verify"), "modes", format!("mode {k} outside 1..={}", spectrum.len())).into());
    }
    let tol = common.tol.unwrap_or(1e-6);
    let (csv, js) = loaded.formats()?;
    let dir = loaded.output_dir(common.out.as_deref());

    let problem = DirectProblem::new(phi, sources, alpha).map_err(|e| classify(e, &loaded.path))?;
    problem.resolve(representation).map_err(|e| loaded.err(Some("quad"), "representation", e.to_string()))?;
    let opts = SolverOptions { quad, representation, ml: MLAccuracy::default() };
    let closed = solve_direct(&problem, &grid, &opts).map_err(|e| classify(e, &loaded.path))?;

    let per_mode: Vec<Result<Vec<f64>, Error>> = modes
        .par_iter()
        .map(|&k| {
            let p = problem.modal(k - 1)?;
            vcfg.steps
                .iter()
                .map(|&j| Ok(l1_solve_modal(&p, &L1Grid::new(j, t_end)?)?[j]))
                .collect::<Result<Vec<f64>, Error>>()
                .map_err(|e| e.at_mode(k))
        })
        .collect();
    let exps = l1_error_exponents(alpha.alpha());
    let mut table = String::from("mode_index,steps,value,error,rate\n");
    let mut checks = Vec::with_capacity(modes.len());
    for (&k, finals) in modes.iter().zip(per_mode) {
        let finals = finals.map_err(|e| classify(e, &loaded.path))?;
        let exact = *closed.modal_solutions[k - 1].last().unwrap();
        let mut prev: Option<f64> = None;
        for (&j, &v) in vcfg.steps.iter().zip(&finals) {
            let err = (v - exact).abs();
            let rate = prev.filter(|&p| p > 0.0 && err > 0.0).map(|p| fmt_f64((p / err).log2())).unwrap_or_default();
            table.push_str(&format!("{k},{j},{},{},{rate}\n", fmt_f64(v), fmt_f64(err)));
            prev = Some(err);
        }
        let extrapolated = richardson(&finals, &exps);
        let scale = exact.abs().max(f64::MIN_POSITIVE);
        checks.push(ModeCheck {
            mode_index: k,
            closed_form: exact,
            richardson: extrapolated,
            rel_error: (extrapolated - exact).abs() / scale,
        });
    }
    let worst = checks.iter().map(|c| c.rel_error).fold(0.0, f64::max);
    let pass = worst <= tol;
    let mut ledger = NormLedger::default();
    ledger.note("max-richardson-rel-error", worst);
    ledger.note("quadrature-estimate", closed.quad_estimate);
    if !pass {
        warn!("oracle disagreement {worst:e} exceeds {tol:e}");
    }
    println!("max relative error {} ({})", fmt_f64(worst), if pass { "pass" } else { "fail" });

    let Some(dir) = dir else { return Ok(None) };
    prepare_dir(&dir)?;
    if csv {
        output::write(&dir, "convergence.csv", &table)?;
    }
    if js {
        output::write(&dir, "ledger.json", &json(&VerifyLedger { tol, pass, ledger: &ledger, modes: &checks }))?;
    }
    output::write(&dir, "meta.json", &meta("verify", &loaded))?;
    Ok(Some(dir))
}

fn run_ml_eval(common: &Common, alpha: Option<f64>, beta: Option<f64>, z: &[f64]) -> Result<Option<PathBuf>, Failure> {
    let loaded = common.config.as_ref().map(|_| load(common, "ml-eval")).transpose()?;
    let from_file = loaded.as_ref().and_then(|l| l.config.ml_eval.clone());
    if let (Some(l), None) = (&loaded, &from_file) {
        return Err(l.err(None, "ml_eval", "missing table [ml_eval]").into());
    }
    let alpha = alpha.or(from_file.as_ref().map(|m| m.alpha)).ok_or_else(|| cli_error("--alpha is required"))?;
    let beta = beta.or(from_file.as_ref().map(|m| m.beta)).unwrap_or(1.0);
    let z: Vec<f64> = if z.is_empty() { from_file.map(|m| m.z).unwrap_or_default() } else { z.to_vec() };
    if z.is_empty() {
        return Err(cli_error("give at least one --z"));
    }
    let params = MLParams::new(alpha, beta).map_err(|e| match &loaded {
        Some(l) => Failure::Config(l.err(Some("ml_eval"), "alpha", e.to_string())),
        None => cli_error(&e.to_string()),
    })?;
    let acc = match common.tol {
        Some(t) => MLAccuracy::new(t, MLAccuracy::default().max_terms).map_err(|e| cli_error(&e.to_string()))?,
        None => MLAccuracy::default(),
    };
    let values: Vec<f64> = z
        .iter()
        .map(|&x| ml_eval(params, x, &acc).map_err(Failure::Numerical))
        .collect::<Result<_, _>>()?;
    for v in &values {
        println!("{}", fmt_f64(*v));
    }
    let dir = match &loaded {
        Some(l) => l.output_dir(common.out.as_deref()),
        None => common.out.clone(),
    };
    let Some(dir) = dir else { return Ok(None) };
    prepare_dir(&dir)?;
    let mut s = String::from("alpha,beta,z,value\n");
    for (x, v) in z.iter().zip(&values) {
        s.push_str(&format!("{},{},{},{}\n", fmt_f64(alpha), fmt_f64(beta), fmt_f64(*x), fmt_f64(*v)));
    }
    output::write(&dir, "ml_eval.csv", &s)?;
    if let Some(l) = &loaded {
        output::write(&dir, "meta.json", &meta("ml-eval", l))?;
    }
    Ok(Some(dir))
}
