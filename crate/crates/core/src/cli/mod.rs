//! Command-line front end: argument parsing, run configuration and the
//! five subcommands. The `min-energy` binary is a thin wrapper around
//! [`main_with_args`].

mod commands;
pub mod io;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::fixtures;
use crate::linalg::{CMat, CVec};
use crate::model::LtiSystem;

pub use commands::{cmd_asymptotics, cmd_classify, cmd_limit, cmd_selftest, cmd_solve, Outcome};

#[derive(Debug, Parser)]
#[command(
    name = "min-energy",
    version,
    about = "Minimum-energy control of linear time-invariant systems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Controllability, spectral partition and existence verdict.
    Classify(CommonArgs),
    /// Convergence of W(T)^-1 to its limit K.
    Limit(CommonArgs),
    /// Finite-horizon (with --T) or infinite-horizon minimum-energy control.
    Solve(CommonArgs),
    /// Scaled Gramian limit and buffered divergence-rate probes.
    Asymptotics(CommonArgs),
    /// Runs the built-in acceptance checks.
    Selftest(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// System JSON file.
    #[arg(long, value_name = "PATH", conflicts_with = "fixture")]
    pub input: Option<PathBuf>,
    /// Built-in system: fig1, fig2:<eps>, scalar:<a>, doubleint, buffer3, ...
    #[arg(long, value_name = "NAME")]
    pub fixture: Option<String>,
    /// Horizon grid `start:stop:count:{lin|geo}`.
    #[arg(long, value_name = "SPEC")]
    pub tgrid: Option<String>,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = "min-energy-out")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Tolerance override `name=value`; repeatable.
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    pub tol: Vec<String>,
    /// Initial state as a JSON vector.
    #[arg(long, value_name = "JSON")]
    pub x0: Option<String>,
    /// Target state as a JSON vector (finite horizon; defaults to zero).
    #[arg(long, value_name = "JSON")]
    pub x1: Option<String>,
    /// Finite horizon.
    #[arg(long = "T", value_name = "REAL")]
    pub horizon: Option<f64>,
    /// Input weight as a JSON matrix.
    #[arg(long = "R", value_name = "JSON")]
    pub weight: Option<String>,
    /// Compare the three Gramian methods at every horizon.
    #[arg(long)]
    pub cross_validate: bool,
    #[arg(long, hide = true)]
    pub corrupt_fixture: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Classify,
    Limit,
    Solve,
    Asymptotics,
    Selftest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Geometric,
}

/// Horizon grid `start:stop:count:{lin|geo}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TGrid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl TGrid {
    pub fn parse(spec: &str) -> Result<TGrid> {
        let bad = |why: &str| Error::Input(format!("--tgrid '{spec}': {why}"));
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 4 {
            return Err(bad("expected start:stop:count:{lin|geo}"));
        }
        let start: f64 = parts[0].parse().map_err(|_| bad("bad start"))?;
        let stop: f64 = parts[1].parse().map_err(|_| bad("bad stop"))?;
        let count: usize = parts[2].parse().map_err(|_| bad("bad count"))?;
        let spacing = match parts[3] {
            "lin" => Spacing::Linear,
            "geo" => Spacing::Geometric,
            _ => return Err(bad("spacing must be lin or geo")),
        };
        if !(start.is_finite() && stop.is_finite() && start > 0.0 && stop > start) {
            return Err(bad("need 0 < start < stop"));
        }
        if count < 2 {
            return Err(bad("need at least 2 points"));
        }
        Ok(TGrid {
            start,
            stop,
            count,
            spacing,
        })
    }

    pub fn points(&self) -> Vec<f64> {
        let k = (self.count - 1) as f64;
        let mut pts: Vec<f64> = (0..self.count)
            .map(|i| {
                let s = i as f64 / k;
                match self.spacing {
                    Spacing::Linear => self.start + s * (self.stop - self.start),
                    Spacing::Geometric => self.start * (self.stop / self.start).powf(s),
                }
            })
            .collect();
        pts[self.count - 1] = self.stop;
        pts
    }
}

/// Tolerances that `--tol name=value` may override.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative residual for `x0 ∈ V_a`.
    pub tau_mem: f64,
    /// Terminal-state admissibility bound; `None` means `1e-5 ||x0||`.
    pub delta_adm: Option<f64>,
    /// Tail-energy admissibility fraction.
    pub eps_tail: f64,
    /// Agreement required between Gramian methods.
    pub xval_rtol: f64,
    /// Simulated against predicted finite-horizon cost.
    pub cost_rtol: f64,
    /// Endpoint `|x(T) - x1| / (1 + |x1|)`.
    pub endpoint_rtol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tau_mem: crate::limitk::TAU_MEM,
            delta_adm: None,
            eps_tail: 1e-6,
            xval_rtol: 1e-8,
            cost_rtol: 1e-6,
            endpoint_rtol: 1e-6,
        }
    }
}

pub const TOLERANCE_NAMES: [&str; 6] = [
    "tau_mem",
    "delta_adm",
    "eps_tail",
    "xval_rtol",
    "cost_rtol",
    "endpoint_rtol",
];

impl Tolerances {
    pub fn apply(&mut self, setting: &str) -> Result<()> {
        let (name, value) = setting
            .split_once('=')
            .ok_or_else(|| Error::Input(format!("--tol '{setting}': expected name=value")))?;
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Input(format!("--tol '{setting}': bad number")))?;
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Input(format!("--tol '{setting}': must be positive")));
        }
        match name.trim() {
            "tau_mem" => self.tau_mem = v,
            "delta_adm" => self.delta_adm = Some(v),
            "eps_tail" => self.eps_tail = v,
            "xval_rtol" => self.xval_rtol = v,
            "cost_rtol" => self.cost_rtol = v,
            "endpoint_rtol" => self.endpoint_rtol = v,
            other => {
                return Err(Error::Input(format!(
                    "unknown tolerance '{other}' (known: {})",
                    TOLERANCE_NAMES.join(", ")
                )))
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub enum SystemSource {
    File(PathBuf),
    Fixture(String),
}

/// Fully parsed invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub source: Option<SystemSource>,
    pub tgrid: Option<TGrid>,
    pub tolerances: Tolerances,
    pub out: PathBuf,
    pub seed: u64,
    pub x0: Option<CVec>,
    pub x1: Option<CVec>,
    pub horizon: Option<f64>,
    pub weight: Option<CMat>,
    pub cross_validate: bool,
    pub corrupt_fixture: bool,
}

impl RunConfig {
    pub fn from_args(command: Command, args: &CommonArgs) -> Result<RunConfig> {
        let source = match (&args.input, &args.fixture) {
            (Some(p), _) => Some(SystemSource::File(p.clone())),
            (None, Some(f)) => Some(SystemSource::Fixture(f.clone())),
            (None, None) => None,
        };
        let mut tolerances = Tolerances::default();
        for t in &args.tol {
            tolerances.apply(t)?;
        }
        if let Some(t) = args.horizon {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::Input(format!("--T must be positive, got {t}")));
            }
        }
        Ok(RunConfig {
            command,
            source,
            tgrid: args.tgrid.as_deref().map(TGrid::parse).transpose()?,
            tolerances,
            out: args.out.clone(),
            seed: args.seed,
            x0: args
                .x0
                .as_deref()
                .map(|s| io::parse_vector(s, "x0"))
                .transpose()?,
            x1: args
                .x1
                .as_deref()
                .map(|s| io::parse_vector(s, "x1"))
                .transpose()?,
            horizon: args.horizon,
            weight: args
                .weight
                .as_deref()
                .map(|s| io::parse_matrix(s, "R"))
                .transpose()?,
            cross_validate: args.cross_validate,
            corrupt_fixture: args.corrupt_fixture,
        })
    }

    /// Loads the system named by `--input` or `--fixture`.
    pub fn system(&self) -> Result<LtiSystem> {
        match &self.source {
            Some(SystemSource::File(p)) => io::read_system(p),
            Some(SystemSource::Fixture(name)) => fixtures::fixture(name),
            None => Err(Error::Input(
                "one of --input or --fixture is required".into(),
            )),
        }
    }

    pub fn grid_or(&self, default: &str) -> Vec<f64> {
        self.tgrid
            .unwrap_or_else(|| TGrid::parse(default).expect("valid default grid"))
            .points()
    }
}

/// Process exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Input(_)
        | Error::Dimension(_)
        | Error::NotSquare { .. }
        | Error::InvalidJordan(_)
        | Error::Field(_)
        | Error::NegativeHorizon(_)
        | Error::Precondition(_)
        | Error::NotControllable
        | Error::NotStabilizable { .. }
        | Error::EmptyBlock(_)
        | Error::NonRational(_) => 2,
        _ => 3,
    }
}

/// Runs one parsed invocation, printing its report; returns the exit code.
pub fn run(cli: Cli) -> i32 {
    let (command, args) = match &cli.command {
        CommandArgs::Classify(a) => (Command::Classify, a),
        CommandArgs::Limit(a) => (Command::Limit, a),
        CommandArgs::Solve(a) => (Command::Solve, a),
        CommandArgs::Asymptotics(a) => (Command::Asymptotics, a),
        CommandArgs::Selftest(a) => (Command::Selftest, a),
    };
    let result = RunConfig::from_args(command, args).and_then(|config| {
        let outcome = match command {
            Command::Classify => cmd_classify(&config),
            Command::Limit => cmd_limit(&config),
            Command::Solve => cmd_solve(&config),
            Command::Asymptotics => cmd_asymptotics(&config),
            Command::Selftest => cmd_selftest(&config),
        }?;
        outcome.write(&config.out)?;
        Ok(outcome)
    });
    match result {
        Ok(outcome) => {
            use std::io::Write;
            // a closed pipe is not a failure of the analysis
            let _ = writeln!(std::io::stdout(), "{}", outcome.stdout());
            outcome.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            code
        }
    }
}
