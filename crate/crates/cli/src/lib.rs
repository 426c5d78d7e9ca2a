//! Command-line harness: `simulate`, `ode`, `lowerbound` and `verify`.
//!
//! Every run writes its outputs, a `summary.json` and an atomically written
//! `manifest.json` into `--out`. Passing a manifest back through `--config`
//! repeats the run with the same resolved flags.

pub mod config;
pub mod lowerbound;
pub mod ode_cmd;
pub mod output;
pub mod simulate;
pub mod verify;

#[cfg(test)]
mod cli_tests;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::ffi::OsString;
use std::path::PathBuf;

#[derive(Parser, Debug, Clone, Serialize)]
#[command(name = "semiham", version, about = "Semi-random graph process experiments")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub cmd: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Common {
    /// Number of vertices.
    #[arg(long, global = true, default_value_t = 100_000)]
    pub n: usize,
    /// Master seed; run `k` of a batch uses stream `k` of this seed.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Number of independent runs.
    #[arg(long, global = true, default_value_t = 1)]
    pub seeds: u64,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// TOML file of `key = value` flags, or a manifest from an earlier run.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Log more (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    #[serde(skip)]
    pub verbose: u8,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Run a strategy and record its trajectory.
    Simulate(SimulateArgs),
    /// Integrate a trajectory system and report its constants.
    Ode(OdeArgs),
    /// Square-counting lower bound: analytic values, Monte Carlo, brute force.
    Lowerbound(LowerboundArgs),
    /// Run the self-check scorecard.
    Verify(VerifyArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Ode(_) => "ode",
            Command::Lowerbound(_) => "lowerbound",
            Command::Verify(_) => "verify",
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyId {
    Fr,
    Dg,
    Cleanup,
    Full,
    ThreeOut,
    Uniform,
}

#[derive(Args, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub strategy: StrategyId,
    /// Degree-greedy phases (`dg` and `full`).
    #[arg(long = "N", default_value_t = 100)]
    #[serde(rename = "N")]
    pub phases: u32,
    /// Off-path fraction at which `cleanup` takes over from the fully
    /// randomised stage.
    #[arg(long, default_value_t = 0.005)]
    pub eps: f64,
    /// Off-path fraction at which `full` hands over to clean-up; 0 keeps the
    /// fully randomised stage going until the path spans.
    #[arg(long, default_value_t = 0.0)]
    pub handoff: f64,
    /// Stop condition: `unsat:FRAC`, `budget:STEPS` (or `budget:Kn`),
    /// `phase:Q` or `ham`. Repeatable; the first to fire ends the run.
    #[arg(long)]
    pub stop: Vec<String>,
    /// Trace recording stride; 0 picks one from `n`.
    #[arg(long, default_value_t = 0)]
    pub stride: u64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemId {
    Fr,
    DgPipeline,
}

#[derive(Args, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct OdeArgs {
    #[arg(long, value_enum)]
    pub system: SystemId,
    #[arg(long = "N", default_value_t = 100)]
    #[serde(rename = "N")]
    pub phases: u32,
    #[arg(long, default_value_t = 1e-6)]
    pub eps_stop: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub delta_stop: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub rtol: f64,
    #[arg(long, default_value_t = 1e-14)]
    pub atol: f64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LbMode {
    Analytic,
    Montecarlo,
    ClaimCheck,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyId {
    Uniform,
    RoundRobin,
    ThreeOut,
}

#[derive(Args, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct LowerboundArgs {
    #[arg(long, value_enum)]
    pub mode: LbMode,
    /// Rounds per vertex, `t = s n`; defaults to the root of `f(s) = 1`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    /// Histories checked by `claim-check`.
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    /// History length per vertex for `claim-check`.
    #[arg(long, default_value_t = 2)]
    pub length_factor: usize,
    #[arg(long, value_enum, default_value_t = PolicyId::Uniform)]
    pub policy: PolicyId,
}

#[derive(Args, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct VerifyArgs {
    /// Add the large-`n` trajectory checks.
    #[arg(long)]
    pub full: bool,
    /// Perturb a component before checking (fault-injection self-test).
    #[arg(long, hide = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inject_fault: Option<String>,
}

/// Bad flags or values; exit code 1.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

/// A verification check failed; exit code 3.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct VerifyFailed(pub String);

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Parse (with config-file injection), execute, and map the outcome to an exit
/// code: 0 ok, 1 usage, 2 runtime failure, 3 verification failure.
pub fn main_with_args(args: Vec<OsString>) -> i32 {
    let args = match config::inject(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return 1;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let level = match cli.common.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<UsageError>() {
                1
            } else if e.is::<VerifyFailed>() {
                3
            } else {
                2
            }
        }
    }
}

pub fn execute(cli: &Cli) -> anyhow::Result<()> {
    validate(cli)?;
    match &cli.cmd {
        Command::Simulate(a) => simulate::cmd_simulate(cli, a),
        Command::Ode(a) => ode_cmd::cmd_ode(cli, a),
        Command::Lowerbound(a) => lowerbound::cmd_lowerbound(cli, a),
        Command::Verify(a) => verify::cmd_verify(a),
    }
}

fn validate(cli: &Cli) -> anyhow::Result<()> {
    let c = &cli.common;
    if c.seeds == 0 {
        return Err(usage("--seeds must be at least 1"));
    }
    let min_n = match &cli.cmd {
        Command::Lowerbound(a) if a.mode == LbMode::ClaimCheck => 3,
        Command::Lowerbound(_) => 2,
        _ => 10,
    };
    if c.n < min_n || c.n > u32::MAX as usize / 2 {
        return Err(usage(format!("--n must lie in [{min_n}, {}]", u32::MAX / 2)));
    }
    let positive = |name: &str, v: f64| {
        if v.is_finite() && v > 0.0 {
            Ok(())
        } else {
            Err(usage(format!("--{name} must be positive, got {v}")))
        }
    };
    match &cli.cmd {
        Command::Simulate(a) => {
            if !(a.eps > 0.0 && a.eps < 1.0) {
                return Err(usage("--eps must lie in (0, 1)"));
            }
            if !(0.0..=1e-3).contains(&a.handoff) {
                return Err(usage("--handoff must lie in [0, 0.001]"));
            }
            for s in &a.stop {
                simulate::parse_stop(s, c.n)?;
            }
        }
        Command::Ode(a) => {
            positive("eps-stop", a.eps_stop)?;
            positive("delta-stop", a.delta_stop)?;
            positive("rtol", a.rtol)?;
            positive("atol", a.atol)?;
        }
        Command::Lowerbound(a) => {
            if let Some(s) = a.s {
                positive("s", s)?;
            }
            if a.mode == LbMode::ClaimCheck && c.n > 10 {
                return Err(usage("claim-check enumerates cycles; use --n 10 or less"));
            }
            if a.length_factor == 0 || a.trials == 0 {
                return Err(usage("--length-factor and --trials must be positive"));
            }
        }
        Command::Verify(_) => {}
    }
    Ok(())
}
