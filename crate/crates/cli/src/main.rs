mod commands;
mod config;
mod failure;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::failure::Failure;

#[derive(Debug, Parser)]
#[command(name = "bayesel", version, about = "Bayesian empirical likelihood sampler and model selection")]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the seed in the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Independent chains to run concurrently.
    #[arg(long, global = true, default_value_t = 1)]
    chains: usize,
    /// Skip SVG output.
    #[arg(long, global = true)]
    no_plot: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the EL problem at one parameter value and print the solution as JSON.
    SolveEl,
    /// Evaluate the log posterior on a grid over a two-parameter model.
    Grid,
    /// Run the two-step Metropolis-Hastings sampler.
    Sample,
    /// Reversible-jump variable selection, for one regression or a whole network.
    Select,
    /// Summaries and Heidelberger-Welch tests for an existing trace CSV.
    Diagnose {
        /// Trace CSV; taken from the configuration when absent.
        trace: Option<PathBuf>,
        #[arg(long)]
        burn_in: Option<usize>,
    },
}

pub struct Globals {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub chains: usize,
    pub plot: bool,
}

impl Globals {
    pub fn config_path(&self) -> Result<&std::path::Path, Failure> {
        self.config.as_deref().ok_or_else(|| Failure::input("--config is required for this command"))
    }

    pub fn out_dir(&self) -> Result<&std::path::Path, Failure> {
        std::fs::create_dir_all(&self.out).map_err(|e| Failure::io(&self.out, e))?;
        Ok(&self.out)
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if cli.chains == 0 {
        return Err(Failure::input("--chains must be at least 1"));
    }
    let g = Globals { config: cli.config, seed: cli.seed, out: cli.out, chains: cli.chains, plot: !cli.no_plot };
    match cli.command {
        Command::SolveEl => commands::solve::run(&g),
        Command::Grid => commands::grid::run(&g),
        Command::Sample => commands::sample::run(&g),
        Command::Select => commands::select::run(&g),
        Command::Diagnose { trace, burn_in } => commands::diagnose::run(&g, trace, burn_in),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(failure::INPUT) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
