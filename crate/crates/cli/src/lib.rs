//! Command-line workflow: describe, preprocess, compare, tune, ensemble and
//! explain, each writing a self-describing output directory.

pub mod commands;
pub mod config;
pub mod error;
pub mod session;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use crate::config::{Config, Overrides};
pub use crate::error::{CliError, Result};
pub use crate::session::Session;

/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "CIRCLOSS_OUT";
pub const DEFAULT_OUT: &str = "circloss-out";

#[derive(Debug, Parser)]
#[command(name = "circloss", version, about = "Severity-classification workbench")]
pub struct Cli {
    /// TOML workflow configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed; overrides the config file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output root.
    #[arg(long, global = true, env = OUT_ENV)]
    pub out: Option<PathBuf>,
    /// Worker threads (defaults to all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Use the 2,000-row synthetic preset.
    #[arg(long, global = true)]
    pub small: bool,
    /// Input CSV; overrides the config file.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Label column of the input CSV.
    #[arg(long, global = true)]
    pub label: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Column summaries, correlations, histograms and class distribution.
    Describe,
    /// Outlier capping, correlation pruning and the hold-out split.
    Preprocess,
    /// Hold-out split of the raw input only.
    Split,
    /// Cross-validated comparison of the base models.
    Compare,
    /// Grid searches, with the winners evaluated on the hold-out set.
    Tune,
    /// Cross-validated comparison and hold-out reports of the ensembles.
    Ensemble,
    /// Drop-column and permutation feature importance.
    Importance,
    /// Write the synthetic dataset and its sidecar.
    Synth,
    /// Gather the text reports of a run directory into report.txt.
    Report {
        /// Run directory; defaults to the output root.
        dir: Option<PathBuf>,
    },
    /// The whole workflow end to end.
    Reproduce,
}

impl Cli {
    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
    }

    fn overrides(&self) -> Overrides {
        Overrides { seed: self.seed, small: self.small, input: self.input.clone(), label: self.label.clone() }
    }
}

/// Runs one parsed invocation inside a thread pool of the requested size.
pub fn run(cli: Cli) -> Result<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::invalid("--threads must be >= 1"));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build()?;
    pool.install(|| dispatch(&cli))
}

fn dispatch(cli: &Cli) -> Result<()> {
    if let Command::Report { dir } = &cli.command {
        commands::report(dir.as_deref().unwrap_or(&cli.out_dir()))?;
        return Ok(());
    }
    let cfg = Config::load(cli.config.as_deref(), &cli.overrides())?;
    let session = Session::new(cfg, cli.out_dir())?;
    match cli.command {
        Command::Describe => drop(commands::describe(&session)?),
        Command::Preprocess => drop(commands::preprocess(&session)?),
        Command::Split => drop(commands::split(&session)?),
        Command::Compare => drop(commands::compare(&session)?),
        Command::Tune => drop(commands::tune(&session)?),
        Command::Ensemble => drop(commands::ensemble(&session)?),
        Command::Importance => drop(commands::importance(&session)?),
        Command::Synth => drop(commands::synth(&session)?),
        Command::Reproduce => drop(commands::reproduce(&session)?),
        Command::Report { .. } => unreachable!(),
    }
    Ok(())
}
