//! Config-driven command-line front end.
//!
//! Exit statuses (stable):
//!
//! | code | meaning                                  |
//! |------|------------------------------------------|
//! | 0    | success                                  |
//! | 2    | bad command-line usage                   |
//! | 3    | config file unreadable or unparseable    |
//! | 4    | unknown system label                     |
//! | 5    | output directory or file not writable    |
//! | 6    | experiment failed (divergence, no fit, non-commutative noise) |
//! | 7    | invalid numeric input                    |

pub mod config;
pub mod csv;
pub mod plot;

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};

use crate::brownian::sample_grid;
use crate::error::Error;
use crate::experiments::{
    moment_exponent, strong_error, Component, ConvergenceConfig, Reference, StabilityConfig,
    DEFAULT_CONVERGENCE_PATHS, DEFAULT_STABILITY_PATHS,
};
use crate::integrators::{simulate, Scheme};
use crate::registry::{self, BuiltinParams, Problem, LABELS};
use crate::sampling::{uniform_box, DEFAULT_RADIUS, DEFAULT_SAMPLES};
use crate::system::{check_commutativity, check_dissipativity, check_khasminskii, AssumptionParams};
use crate::truncation::TruncationPolicy;

pub use config::{parse_number, Command, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Config,
    UnknownSystem,
    Output,
    Experiment,
    Input,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Usage => 2,
            ErrorKind::Config => 3,
            ErrorKind::UnknownSystem => 4,
            ErrorKind::Output => 5,
            ErrorKind::Experiment => 6,
            ErrorKind::Input => 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Config, message)
    }

    pub fn input(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Input, message)
    }

    pub fn output(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Output, message)
    }

    pub fn exit_code(&self) -> i32 {
        self.kind.exit_code()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let kind = match e {
            Error::UnknownSystem(_) => ErrorKind::UnknownSystem,
            Error::Diverged { .. }
            | Error::AllPathsDiverged { .. }
            | Error::Fit(_)
            | Error::NonCommutative { .. }
            | Error::NoSolution(_) => ErrorKind::Experiment,
            _ => ErrorKind::Input,
        };
        CliError::new(kind, e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CommandArg {
    Simulate,
    Convergence,
    Stability,
    Check,
    ListSystems,
    /// Take the command from the config file's `command` key.
    Run,
}

/// Truncated Milstein experiments for SDEs with commutative noise.
#[derive(Debug, Parser)]
#[command(name = "mtm-sde", version)]
struct Args {
    #[arg(value_enum)]
    command: CommandArg,
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed for all Brownian paths.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: ./out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override a config key, e.g. `--set n_paths=200`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

/// What a successful run produced.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub stdout: Vec<String>,
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

/// Parses `args` (including the program name), runs, and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { ErrorKind::Usage.exit_code() } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match configure(&args).and_then(|cfg| run(&cfg)) {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            for line in &outcome.stdout {
                println!("{line}");
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn configure(args: &Args) -> Result<RunConfig, CliError> {
    let text = match &args.config {
        Some(path) => fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?,
        None => String::new(),
    };
    let command = match args.command {
        CommandArg::Simulate => Some(Command::Simulate),
        CommandArg::Convergence => Some(Command::Convergence),
        CommandArg::Stability => Some(Command::Stability),
        CommandArg::Check => Some(Command::Check),
        CommandArg::ListSystems => Some(Command::ListSystems),
        CommandArg::Run => None,
    };
    RunConfig::build(command, &text, &args.overrides, args.seed, args.out.clone())
}

/// Reads a config file and runs it.
pub fn run_file(path: &Path) -> Result<Outcome, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    run(&RunConfig::from_text(&text)?)
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match cfg.command {
        Command::ListSystems => Ok(list_systems()),
        Command::Simulate => run_simulate(cfg),
        Command::Convergence => run_convergence(cfg),
        Command::Stability => run_stability(cfg),
        Command::Check => run_check(cfg),
    }
}

fn list_systems() -> Outcome {
    let params = BuiltinParams::default();
    let stdout = LABELS
        .iter()
        .map(|label| match registry::lookup(label, &params) {
            Ok(p) => format!(
                "{label}\td={} m={}\t{}",
                p.system.dim(),
                p.system.noise_dim(),
                p.policy.description()
            ),
            Err(_) => label.to_string(),
        })
        .collect();
    Outcome {
        stdout,
        ..Outcome::default()
    }
}

fn problem(cfg: &RunConfig) -> Result<Problem, CliError> {
    let defaults = BuiltinParams::default();
    let params = BuiltinParams {
        mu: cfg.number_or("mu", defaults.mu)?,
        sigma: cfg.number_or("sigma", defaults.sigma)?,
        epsilon: cfg.number_or("epsilon", defaults.epsilon)?,
    };
    let mut problem = registry::lookup(cfg.require("system")?, &params)?;
    if let Some(policy) = policy_from(cfg, &params)? {
        problem.policy = policy;
    }
    if let Some(x0) = cfg.numbers("x0")? {
        if x0.len() != problem.system.dim() {
            return Err(CliError::input(format!(
                "x0 has {} entries, system dimension is {}",
                x0.len(),
                problem.system.dim()
            )));
        }
        problem.x0 = x0;
    }
    Ok(problem)
}

fn policy_from(cfg: &RunConfig, params: &BuiltinParams) -> Result<Option<TruncationPolicy>, CliError> {
    match cfg.raw("h") {
        None | Some("default") => Ok(None),
        Some("pow") => {
            let exponent = cfg
                .number("exponent")?
                .ok_or_else(|| CliError::config("h = pow needs 'exponent'"))?;
            Ok(Some(TruncationPolicy::power(exponent)?))
        }
        Some("inverse") => match cfg.raw("l") {
            Some("example1") => Ok(Some(registry::example1_policy(params.epsilon)?)),
            Some(other) => Err(CliError::config(format!("unknown growth function l = {other}"))),
            None => Err(CliError::config("h = inverse needs 'l'")),
        },
        Some(other) => Err(CliError::config(format!(
            "unknown policy h = {other} (expected default, pow or inverse)"
        ))),
    }
}

fn scheme(cfg: &RunConfig) -> Result<Scheme, CliError> {
    match cfg.raw("scheme") {
        None => Ok(Scheme::Mtm),
        Some(s) => s.parse::<Scheme>().map_err(CliError::from),
    }
}

fn prepare_out(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::output(format!("cannot create {}: {e}", dir.display())))
}

fn write_file(outcome: &mut Outcome, path: PathBuf, contents: &str) -> Result<(), CliError> {
    fs::write(&path, contents)
        .map_err(|e| CliError::output(format!("cannot write {}: {e}", path.display())))?;
    outcome.files.push(path);
    Ok(())
}

fn run_simulate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = problem(cfg)?;
    let scheme = scheme(cfg)?;
    let delta = cfg.number_or("delta", 2f64.powi(-10))?;
    let horizon = cfg.number_or("horizon", 1.0)?;
    let steps = horizon / delta;
    if !(steps >= 1.0 && (steps - steps.round()).abs() < 1e-9 * steps) {
        return Err(CliError::input(format!("T = {horizon} is not a multiple of delta = {delta}")));
    }
    let path = cfg.count_or("path", 0)? as u64;
    let grid = sample_grid(cfg.seed, path, p.system.noise_dim(), steps.round() as usize, delta)?;
    let traj = simulate(&p.system, &p.policy, scheme, delta, &p.x0, grid.fine())?;

    prepare_out(&cfg.out_dir)?;
    let mut text = String::from("k,t");
    for i in 1..=traj.dim() {
        text.push_str(&format!(",y{i}"));
    }
    text.push('\n');
    for (k, (t, y)) in traj.times().iter().zip(traj.states()).enumerate() {
        text.push_str(&format!("{k},{}", csv::fmt_f64(*t)));
        for v in y {
            text.push(',');
            text.push_str(&csv::fmt_f64(*v));
        }
        text.push('\n');
    }
    let mut outcome = Outcome::default();
    write_file(&mut outcome, cfg.out_dir.join("trajectory.csv"), &text)?;
    let last: Vec<String> = traj.final_state().iter().map(|v| format!("{v:.6e}")).collect();
    outcome.stdout.push(format!("final_state = {}", last.join(", ")));
    Ok(outcome)
}

fn run_convergence(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = problem(cfg)?;
    let reference = match cfg.raw("reference") {
        None | Some("numerical") => Reference::Numerical,
        Some("exact") => Reference::Exact,
        Some(other) => {
            return Err(CliError::config(format!(
                "unknown reference '{other}' (expected numerical or exact)"
            )))
        }
    };
    let deltas = match cfg.numbers("deltas")? {
        Some(d) => d,
        None => (8..=11).rev().map(|k| 2f64.powi(-k)).collect(),
    };
    let conv = ConvergenceConfig {
        scheme: scheme(cfg)?,
        x0: p.x0,
        q: cfg.number_or("q", 2.0)?,
        horizon: cfg.number_or("horizon", 1.0)?,
        delta_ref: cfg.number_or("delta_ref", 2f64.powi(-15))?,
        deltas,
        n_paths: cfg.count_or("n_paths", DEFAULT_CONVERGENCE_PATHS)?,
        master_seed: cfg.seed,
        reference,
        workers: cfg.count("workers")?,
        system: p.system,
        policy: p.policy,
    };
    let report = strong_error(&conv)?;

    prepare_out(&cfg.out_dir)?;
    let mut outcome = Outcome::default();
    write_file(&mut outcome, cfg.out_dir.join("convergence.csv"), &csv::convergence_csv(&report))?;
    let svg = cfg.out_dir.join("convergence.svg");
    match plot::emit_plot(plot::PlotData::Convergence(&report), &svg) {
        Ok(()) => outcome.files.push(svg),
        Err(e) => outcome.warnings.push(format!("plot skipped: {e}")),
    }
    match report.fit {
        Some(fit) => outcome
            .stdout
            .push(format!("slope = {:.6} (intercept {:.6})", fit.slope, fit.intercept)),
        None => outcome.stdout.push("slope = unavailable (no positive errors to fit)".into()),
    }
    let diverged: usize = report.n_diverged.iter().sum();
    if diverged > 0 {
        outcome
            .warnings
            .push(format!("{diverged} path evaluations diverged and were excluded"));
    }
    Ok(outcome)
}

fn run_stability(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = problem(cfg)?;
    let component = match cfg.raw("component") {
        None => Component::Coordinate(0),
        Some("norm") => Component::Norm,
        Some(s) => {
            let i = config::parse_number(s)?;
            if !(i >= 1.0 && i.fract() == 0.0) {
                return Err(CliError::config(format!(
                    "component must be 'norm' or a 1-based index, got '{s}'"
                )));
            }
            Component::Coordinate(i as usize - 1)
        }
    };
    let moment = cfg.number("p")?.or(p.dissipativity.map(|a| a.p)).unwrap_or(2.0);
    let lambda = cfg.number("lambda")?.or(p.dissipativity.and_then(|a| a.lambda));
    let n_steps = cfg.count_or("n_steps", 5 << 12)?;
    let stab = StabilityConfig {
        scheme: scheme(cfg)?,
        x0: p.x0,
        p: moment,
        delta: cfg.number_or("delta", 2f64.powi(-10))?,
        n_steps,
        n_paths: cfg.count_or("n_paths", DEFAULT_STABILITY_PATHS)?,
        master_seed: cfg.seed,
        component,
        sample_every: cfg.count_or("sample_every", (n_steps / 1024).max(1))?,
        workers: cfg.count("workers")?,
        system: p.system,
        policy: p.policy,
    };
    let report = moment_exponent(&stab)?;

    prepare_out(&cfg.out_dir)?;
    let mut outcome = Outcome::default();
    write_file(&mut outcome, cfg.out_dir.join("stability.csv"), &csv::stability_csv(&report))?;
    let svg = cfg.out_dir.join("stability.svg");
    let reference = lambda.map(|l| -moment * l);
    match plot::emit_plot(plot::PlotData::Stability(&report, reference), &svg) {
        Ok(()) => outcome.files.push(svg),
        Err(e) => outcome.warnings.push(format!("plot skipped: {e}")),
    }
    match report.tail_exponent {
        Some(e) => outcome.stdout.push(format!("tail_exponent = {e:.6}")),
        None => outcome.stdout.push("tail_exponent = unavailable".into()),
    }
    if report.n_diverged > 0 {
        outcome
            .warnings
            .push(format!("{} of {} paths diverged and were excluded", report.n_diverged, report.n_paths));
    }
    Ok(outcome)
}

fn run_check(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = problem(cfg)?;
    let n = cfg.count_or("samples", DEFAULT_SAMPLES)?;
    let radius = cfg.number_or("radius", DEFAULT_RADIUS)?;
    let tol = cfg.number_or("tol", 1e-10)?;
    let samples = uniform_box(n, p.system.dim(), radius, cfg.seed);

    let mut checks = vec![(
        "commutativity".to_string(),
        check_commutativity(&p.system, &samples, tol)?,
    )];
    let moment = cfg.number("p")?;
    let khasminskii = match (cfg.number("k")?, p.khasminskii) {
        (Some(k), base) => Some(AssumptionParams::khasminskii(
            moment.or(base.map(|b| b.p)).unwrap_or(3.0),
            k,
        )?),
        (None, Some(base)) => Some(match moment {
            Some(m) => AssumptionParams::khasminskii(m, base.k.unwrap_or(1.0))?,
            None => base,
        }),
        (None, None) => None,
    };
    if let Some(params) = khasminskii {
        checks.push(("khasminskii".into(), check_khasminskii(&p.system, &params, &samples)?));
    }
    let dissipativity = match (cfg.number("lambda")?, p.dissipativity) {
        (Some(l), base) => Some(AssumptionParams::dissipative(
            moment.or(base.map(|b| b.p)).unwrap_or(3.0),
            l,
        )?),
        (None, Some(base)) => Some(match moment {
            Some(m) => AssumptionParams::dissipative(m, base.lambda.unwrap_or(1.0))?,
            None => base,
        }),
        (None, None) => None,
    };
    if let Some(params) = dissipativity {
        checks.push(("dissipativity".into(), check_dissipativity(&p.system, &params, &samples)?));
    }

    prepare_out(&cfg.out_dir)?;
    let mut outcome = Outcome::default();
    write_file(&mut outcome, cfg.out_dir.join("check.csv"), &csv::check_csv(p.system.dim(), &checks))?;
    for (name, r) in &checks {
        outcome.stdout.push(format!(
            "{name}: {} (worst margin {:.6e} over {} samples)",
            if r.passed { "pass" } else { "FAIL" },
            r.worst_margin,
            r.samples_tested
        ));
    }
    Ok(outcome)
}
