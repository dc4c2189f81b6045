//! `critwave` command-line tool.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug)]
pub enum CliError {
    /// Unreadable or invalid configuration (exit 2).
    Config(String),
    /// Failure while running (exit 3).
    Runtime(String),
    /// A channel-of-energy check fell below one half (exit 4).
    Channel(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
            CliError::Channel(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Runtime(m) => write!(f, "runtime error: {m}"),
            CliError::Channel(m) => write!(f, "channel check failed: {m}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<critwave::Error> for CliError {
    fn from(e: critwave::Error) -> Self {
        match e {
            critwave::Error::InvalidConfig(m) => CliError::Config(m),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "critwave", version, about = "Radial energy-critical wave laboratory")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Configuration file (key = value lines or a JSON object).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (default: $CRITWAVE_OUT, else ./critwave_out).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Seed for every stochastic operation.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub quiet: bool,
}

impl Global {
    pub fn out_dir(&self) -> PathBuf {
        self.out
            .clone()
            .or_else(|| std::env::var_os("CRITWAVE_OUT").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("critwave_out"))
    }

    pub fn say(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", msg.as_ref());
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the solver from --config; writes snapshots/, series.csv, report.json, manifest.json.
    Simulate,
    /// Exact linear evolution and channel-of-energy checks.
    Dalembert {
        #[command(subcommand)]
        action: DalembertAction,
    },
    /// Diagnostics series for a directory of snapshots.
    Analyze(AnalyzeArgs),
    /// Profile decomposition of one snapshot.
    Profiles(ProfilesArgs),
    /// Parallel solver runs over a parameter grid applied to --config.
    Sweep(SweepArgs),
}

#[derive(Debug, Subcommand)]
pub enum DalembertAction {
    /// Random channel verifications; prints the worst ratio.
    Check {
        #[arg(long, default_value_t = 1000)]
        n: usize,
    },
    /// Evolve breakpoint data `(s, f0, f1)` to time `t`; writes evolved.csv.
    Evolve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        t: f64,
    },
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// A simulate output directory or its snapshots/ directory.
    pub snapshots: PathBuf,
    /// Radii for g_R columns (comma separated).
    #[arg(long, default_value = "")]
    pub g_radii: String,
    /// Radii for ball-energy columns (comma separated).
    #[arg(long, default_value = "")]
    pub ball_radii: String,
    /// Treat the data as linear (no potential term).
    #[arg(long)]
    pub linear: bool,
}

#[derive(Debug, Args)]
pub struct ProfilesArgs {
    /// Snapshot CSV with header r,u,ut.
    #[arg(long, conflicts_with = "synthetic")]
    pub snapshot: Option<PathBuf>,
    /// Generate the snapshot instead: `iota:lambda` pairs, e.g. "1:1,-1:0.001".
    #[arg(long)]
    pub synthetic: Option<String>,
    /// Relative noise level for --synthetic.
    #[arg(long, default_value_t = 1e-3)]
    pub noise: f64,
    #[arg(long, default_value_t = 6)]
    pub max_profiles: usize,
    #[arg(long, default_value_t = 0.3)]
    pub floor: f64,
    #[arg(long, default_value_t = 10.0)]
    pub separation: f64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// `key=v1,v2,...`; repeat for a Cartesian grid.
    #[arg(long = "grid", required = true)]
    pub grid: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("critwave: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
