//! Command-line front end.
//!
//! Exit codes: 0 contained (or success), 3 not contained, 1 for usage, parse,
//! schema, invariant and I/O problems, 2 for numerical failures. Every error
//! is reported as one line `error[kind]: message` on stderr.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::cone::evaluate_containment;
use crate::maneuver::{propagate_schedule, ImpulsiveSchedule};
use crate::scenario_io::{
    fy1c_scenario, load_scenario, report_to_toml, verdict_rows, write_points_csv, Body, PointRow, Scenario,
    ScenarioError,
};
use crate::twocars::{
    cockayne_check, containment_equivalence, reachable_set, CarState, EquivalenceOptions, ReachOptions,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;
pub const EXIT_NOT_CONTAINED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "futurecone", version, about = "Future-cone reachability and guaranteed-intercept analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a body's trajectory, with any scheduled shocks, as an ephemeris.
    Propagate(RunArgs),
    /// Decide whether the interceptor's cone contains the target's.
    Contain(RunArgs),
    /// Compare the Cockayne conditions with sampled cone containment.
    Twocars(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Builtin {
    Fy1c,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Report,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Scenario file (TOML).
    #[arg(long, value_name = "PATH", required_unless_present = "builtin", conflicts_with = "builtin")]
    pub scenario: Option<PathBuf>,
    /// Bundled scenario.
    #[arg(long, value_enum)]
    pub builtin: Option<Builtin>,
    /// Seed for all sampling; overrides the scenario's.
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Trajectories sampled per cone; overrides the scenario's.
    #[arg(long, value_name = "N")]
    pub samples: Option<usize>,
    /// Leaf times per window; overrides the scenario's.
    #[arg(long, value_name = "N")]
    pub grid: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// csv for point rows, report for a TOML summary. Defaults to csv for
    /// propagate and report otherwise.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Scenario(ScenarioError::Io { .. }) => "io",
            CliError::Scenario(ScenarioError::Parse { .. }) => "parse",
            CliError::Scenario(ScenarioError::Schema { .. }) => "schema",
            CliError::Scenario(ScenarioError::Invariant { .. }) => "invariant",
            CliError::Scenario(_) => "io",
            CliError::Numeric(_) => "numeric",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numeric(_) => EXIT_NUMERIC,
            _ => EXIT_INPUT,
        }
    }
}

fn numeric(e: impl std::fmt::Display) -> CliError {
    CliError::Numeric(e.to_string())
}

/// What a command produced: the bytes to write and the exit code to return.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub output: Vec<u8>,
    pub exit_code: i32,
}

impl RunArgs {
    fn scenario(&self) -> Result<Scenario, CliError> {
        match (&self.scenario, self.builtin) {
            (Some(path), _) => Ok(load_scenario(path)?),
            (None, Some(Builtin::Fy1c)) => Ok(fy1c_scenario()),
            (None, None) => Err(CliError::Usage("one of --scenario or --builtin is required".into())),
        }
    }

    fn sampling(&self, s: &Scenario) -> (usize, usize, u64) {
        (
            self.samples.unwrap_or(s.sampling.n_samples),
            self.grid.unwrap_or(s.sampling.time_grid),
            self.seed.unwrap_or(s.sampling.seed),
        )
    }
}

#[derive(Serialize)]
struct EphemerisState {
    t_s: f64,
    position_km: [f64; 3],
    velocity_km_s: [f64; 3],
}

#[derive(Serialize)]
struct Ephemeris {
    body: Body,
    state: Vec<EphemerisState>,
}

pub fn cmd_propagate(args: &RunArgs) -> Result<Outcome, CliError> {
    let scenario = args.scenario()?;
    let prop = scenario
        .propagation
        .as_ref()
        .ok_or_else(|| CliError::Usage("propagate needs a [propagation] section".into()))?;
    let body = scenario.body(prop.body).expect("validated scenario defines the propagated body");
    let origin = body.vertex();
    let schedule = scenario.schedule()?.unwrap_or_else(|| ImpulsiveSchedule::empty(body.budget_km_s));
    let env = scenario.environment();
    let traj = propagate_schedule(&origin, &schedule, prop.t_end_s, &env).map_err(numeric)?;

    let steps = ((prop.t_end_s - origin.t) / prop.step_s).ceil() as usize;
    let mut states = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let t = (origin.t + i as f64 * prop.step_s).min(prop.t_end_s);
        states.push(traj.state_at(t).map_err(numeric)?);
    }

    let output = match args.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let rows: Vec<PointRow> =
                states.iter().map(|s| PointRow::orbital(s.t, s.r, prop.body.tag(), None)).collect();
            let mut buf = Vec::new();
            write_points_csv(&rows, &mut buf)?;
            buf
        }
        Format::Report => {
            let eph = Ephemeris {
                body: prop.body,
                state: states
                    .iter()
                    .map(|s| EphemerisState { t_s: s.t, position_km: s.r.to_array(), velocity_km_s: s.v.to_array() })
                    .collect(),
            };
            toml::to_string(&eph).map_err(ScenarioError::from)?.into_bytes()
        }
    };
    Ok(Outcome { output, exit_code: EXIT_OK })
}

pub fn cmd_contain(args: &RunArgs) -> Result<Outcome, CliError> {
    let scenario = args.scenario()?;
    let interceptor = scenario.cone_spec(Body::Interceptor)?;
    let target = scenario.cone_spec(Body::Target)?;
    let (n, grid, seed) = args.sampling(&scenario);
    let (report, verdicts) = evaluate_containment(&interceptor, &target, n, grid, seed).map_err(numeric)?;
    let output = match args.format.unwrap_or(Format::Report) {
        Format::Csv => {
            let mut buf = Vec::new();
            write_points_csv(&verdict_rows(&verdicts), &mut buf)?;
            buf
        }
        Format::Report => report_to_toml(&report)?.into_bytes(),
    };
    let exit_code = if report.contained { EXIT_OK } else { EXIT_NOT_CONTAINED };
    Ok(Outcome { output, exit_code })
}

#[derive(Serialize)]
struct TwoCarsReport {
    speed_ok: bool,
    accel_ok: bool,
    cockayne_intercept: bool,
    contained: bool,
    agrees: bool,
    points_tested: usize,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<WitnessReport>,
}

#[derive(Serialize)]
struct WitnessReport {
    x_m: f64,
    y_m: f64,
    tau_s: f64,
    reason: String,
}

pub fn cmd_twocars(args: &RunArgs) -> Result<Outcome, CliError> {
    let scenario = args.scenario()?;
    let tc = scenario
        .twocars
        .as_ref()
        .ok_or_else(|| CliError::Usage("twocars needs a [twocars] section".into()))?;
    let pursuer = tc.pursuer.config().map_err(numeric)?;
    let evader = tc.evader.config().map_err(numeric)?;
    let (n, grid, seed) = args.sampling(&scenario);
    let cockayne = cockayne_check(&pursuer, &evader);
    let verdict = containment_equivalence(
        &pursuer,
        &evader,
        tc.horizon_s,
        tc.headstart_s,
        &EquivalenceOptions { samples: n, grid, seed },
    )
    .map_err(numeric)?;

    let output = match args.format.unwrap_or(Format::Report) {
        Format::Csv => {
            let origin = CarState { x: 0.0, y: 0.0, theta: 0.0, t: 0.0 };
            let opts = ReachOptions { random_laws: n, seed, ..ReachOptions::default() };
            let mut rows = Vec::new();
            for (cfg, tag) in [(&pursuer, "pursuer"), (&evader, "evader")] {
                let set = reachable_set(cfg, &origin, tc.horizon_s, &opts).map_err(numeric)?;
                rows.extend(set.points.iter().map(|&(x, y)| PointRow::planar(&CarState { x, y, theta: 0.0, t: set.t }, tag)));
            }
            let mut buf = Vec::new();
            write_points_csv(&rows, &mut buf)?;
            buf
        }
        Format::Report => {
            let report = TwoCarsReport {
                speed_ok: cockayne.speed_ok,
                accel_ok: cockayne.accel_ok,
                cockayne_intercept: cockayne.intercept(),
                contained: verdict.contained,
                agrees: verdict.agrees(),
                points_tested: verdict.points_tested,
                seed,
                witness: verdict.witness.map(|w| WitnessReport {
                    x_m: w.x,
                    y_m: w.y,
                    tau_s: w.tau,
                    reason: format!("{:?}", w.reason).to_lowercase(),
                }),
            };
            toml::to_string(&report).map_err(ScenarioError::from)?.into_bytes()
        }
    };
    let exit_code = if verdict.contained { EXIT_OK } else { EXIT_NOT_CONTAINED };
    Ok(Outcome { output, exit_code })
}

fn execute(cli: &Cli) -> Result<i32, CliError> {
    let (args, outcome) = match &cli.command {
        Command::Propagate(a) => (a, cmd_propagate(a)?),
        Command::Contain(a) => (a, cmd_contain(a)?),
        Command::Twocars(a) => (a, cmd_twocars(a)?),
    };
    match &args.out {
        Some(path) => fs::write(path, &outcome.output)
            .map_err(|source| ScenarioError::Io { path: path.clone(), source })?,
        None => std::io::stdout()
            .write_all(&outcome.output)
            .map_err(|source| ScenarioError::Io { path: "<stdout>".into(), source })?,
    }
    Ok(outcome.exit_code)
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return EXIT_OK;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            eprintln!("error[usage]: {first}");
            return EXIT_INPUT;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error[{}]: {msg}", e.kind());
            e.exit_code()
        }
    }
}
