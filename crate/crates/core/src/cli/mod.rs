//! Command-line front end: `poisson-mobility <command> [--preset NAME | --config FILE]`.
//!
//! Exit codes: 0 when every check passes, 1 on a statistical failure, 2 on a
//! configuration or parameter error, 3 on any other runtime error.

pub mod commands;
pub mod config;
pub mod presets;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use commands::{Context, Status};
use config::ExperimentConfig;

/// Environment variable with the worker-thread count.
pub const THREADS_ENV: &str = "POISSON_MOBILITY_THREADS";
pub const DEFAULT_PRESET: &str = "paper-sec6-default";

#[derive(Debug, Parser)]
#[command(
    name = "poisson-mobility",
    version,
    about = "Mobility processes in a Poisson field of wireless nodes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write SNR, crossing, handoff, sharing and shared-rate traces of one trajectory.
    Trace(Common),
    /// Check every closed form against Monte Carlo.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Scale one closed form by 1.25 to check that failures are detected.
        #[arg(long, hide = true)]
        perturb: Option<String>,
    },
    /// K-S tests of rescaled up-crossing interarrivals.
    Asymptotics(Common),
    /// Streaming load factor, optimal threshold and the ρ = 1 level set.
    Streaming(Common),
    /// Tail, zero-sharing and variance statistics of the stationary shared rate.
    Sharedrate(Common),
    /// Download-time and fluid busy-period transforms against simulation.
    Download(Common),
    /// Mean sharing number of users on a Poisson line process.
    Cox(Common),
    /// Two-tier network coverage statistics and optimal threshold.
    Hetnet(Common),
    /// List presets, or print one as a config file.
    Presets { name: Option<String> },
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Config file (TOML with dotted keys).
    #[arg(long, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Named preset; see `presets`.
    #[arg(long)]
    pub preset: Option<String>,
    /// Override the master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the replication count.
    #[arg(long)]
    pub reps: Option<u64>,
    /// Override the output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Common {
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), _) => ExperimentConfig::load(path)?,
            (None, Some(name)) => presets::load(name)?,
            (None, None) => presets::load(DEFAULT_PRESET)?,
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(reps) = self.reps {
            cfg.replications = reps;
        }
        if let Some(out) = &self.out {
            cfg.output = out.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Error::Config(format!(
            "{THREADS_ENV} must be a positive integer, got `{v}`"
        ))
    })?;
    // A pool that is already built keeps its size.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

pub fn run(cli: Cli) -> Result<Status> {
    configure_threads()?;
    let (common, command) = match &cli.command {
        Command::Presets { name } => {
            match name {
                Some(n) => print!("{}", presets::text(n)?),
                None => {
                    for (n, d) in presets::list() {
                        println!("{n:<20} {d}");
                    }
                }
            }
            return Ok(Status::Pass);
        }
        Command::Validate { common, .. } => (common, "validate"),
        Command::Trace(c) => (c, "trace"),
        Command::Asymptotics(c) => (c, "asymptotics"),
        Command::Streaming(c) => (c, "streaming"),
        Command::Sharedrate(c) => (c, "sharedrate"),
        Command::Download(c) => (c, "download"),
        Command::Cox(c) => (c, "cox"),
        Command::Hetnet(c) => (c, "hetnet"),
    };
    let ctx = Context::new(common.resolve()?)?;
    commands::ensure_output(&ctx.out)?;
    match (command, &cli.command) {
        ("validate", Command::Validate { perturb, .. }) => {
            commands::validate(&ctx, perturb.as_deref())
        }
        ("trace", _) => commands::trace(&ctx),
        ("asymptotics", _) => commands::asymptotics(&ctx),
        ("streaming", _) => commands::streaming(&ctx),
        ("sharedrate", _) => commands::sharedrate(&ctx),
        ("download", _) => commands::download(&ctx),
        ("cox", _) => commands::cox(&ctx),
        ("hetnet", _) => commands::hetnet(&ctx),
        _ => unreachable!(),
    }
}

/// Exit code for an error.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::InvalidParameter { .. } => 2,
        _ => 3,
    }
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Status::Pass) => ExitCode::SUCCESS,
        Ok(Status::Fail) => {
            eprintln!("statistical check failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
