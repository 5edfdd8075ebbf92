//! `quantevo`: backtest, calibrate and evolve minute-bar passive execution
//! strategies.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use quantevo_core::market_data::SplitLabel;
use quantevo_core::Jobs;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or missing inputs; exit code 2.
    Usage(String),
    /// Failure while running a command; exit code 1.
    Runtime(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

/// Runtime failures from core operations.
pub fn runtime<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Runtime(e.to_string())
}

#[derive(Debug, Parser)]
#[command(
    name = "quantevo",
    version,
    about = "Minute-bar execution backtests, TPE calibration and evolutionary search"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// JSON or TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// RNG seed; required by stochastic commands.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    /// Comma-separated splits to report (validation, test).
    #[arg(long, global = true, value_delimiter = ',', value_parser = parse_split)]
    pub splits: Option<Vec<SplitLabel>>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

impl GlobalArgs {
    pub fn jobs(&self) -> Jobs {
        Jobs(self.jobs)
    }

    pub fn require_seed(&self, command: &str) -> Result<u64, CliError> {
        self.seed.ok_or_else(|| {
            CliError::Usage(format!("`{command}` is stochastic and requires --seed"))
        })
    }
}

fn parse_split(s: &str) -> Result<SplitLabel, String> {
    match SplitLabel::parse(s.trim()) {
        Some(l @ (SplitLabel::Validation | SplitLabel::Test)) => Ok(l),
        Some(SplitLabel::Train) => {
            Err("the train split is only used for fitting the forecaster".into())
        }
        _ => Err(format!("unknown split `{s}`")),
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the configured strategy on the requested splits.
    Backtest,
    /// TPE search over the strategy parameter space.
    Calibrate,
    /// MAP-Elites / island evolution of strategy genomes.
    Evolve {
        /// Overrides `evolution.generations`.
        #[arg(long)]
        generations: Option<u32>,
    },
    /// Greedy correlation-filtered selection of EMA features.
    SelectFeatures,
    /// Stats report for an evolution run record.
    Analyze {
        /// Run record written by `evolve`.
        run_record: PathBuf,
    },
    /// Write a synthetic minute-bar CSV.
    SynthData,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = config::load(cli.global.config.as_deref())?;
    if let Some(out) = &cli.global.out {
        cfg.output.dir = out.clone();
    }
    let g = &cli.global;
    match cli.command {
        Command::Backtest => commands::backtest(&cfg, g),
        Command::Calibrate => commands::calibrate(&cfg, g),
        Command::Evolve { generations } => commands::evolve(&cfg, g, generations),
        Command::SelectFeatures => commands::select_features(&cfg, g),
        Command::Analyze { run_record } => commands::analyze(&cfg, g, &run_record),
        Command::SynthData => commands::synth_data(&cfg, g),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
