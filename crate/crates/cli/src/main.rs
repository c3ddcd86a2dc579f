mod commands;
mod config;
mod error;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::{FamilyArgs, Outcome};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::report::Format;

/// Closed-form versus numerical Laplacians and bilaplacians on vector bundles.
///
/// Exit status: 0 all rows pass, 1 comparison failure, 2 configuration error,
/// 3 domain or numeric error.
#[derive(Parser)]
#[command(name = "bihar", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write rows here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Overrides the config seed for random grids.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides every tolerance in the config.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Compare closed forms with the numerical oracle on a sampled grid.
    Verify,
    /// Print the exact exponents of the radial power solutions.
    Roots {
        #[arg(long)]
        k: usize,
    },
    /// Tabulate a radial family under Sasaki weights.
    Families {
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        case: Option<String>,
        #[arg(long, allow_negative_numbers = true)]
        beta: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        gamma: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        delta: Option<f64>,
        /// Base dimension.
        #[arg(long)]
        m: Option<usize>,
    },
    /// Evaluate residuals over rank, dimension and radius.
    Sweep,
    /// Check weight derivatives and their limits at r = 0.
    Regularity {
        #[arg(long)]
        preset: Option<String>,
    },
}

pub struct Globals {
    pub out: Option<PathBuf>,
    pub format: Format,
    pub seed: Option<u64>,
    pub tolerance: Option<f64>,
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    let cfg = cli.config.as_deref().map(RunConfig::load).transpose()?;
    let g = Globals { out: cli.out, format: cli.format, seed: cli.seed, tolerance: cli.tolerance };
    let need = |what: &str| {
        cfg.as_ref().ok_or_else(|| CliError::Config(format!("{what} needs --config")))
    };
    match cli.command {
        Command::Verify => commands::verify(need("verify")?, &g),
        Command::Roots { k } => commands::roots(k),
        Command::Families { k, case, beta, gamma, delta, m } => {
            commands::families(cfg.as_ref(), FamilyArgs { k, case, beta, gamma, delta, m }, &g)
        }
        Command::Sweep => commands::sweep(need("sweep")?, &g),
        Command::Regularity { preset } => commands::regularity(cfg.as_ref(), preset.as_deref(), &g),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    // Rows own stdout unless they go to a file.
    let to_file = cli.out.is_some();
    match run(cli) {
        Ok(outcome) => {
            for line in &outcome.summary {
                if to_file || !outcome.wrote_rows {
                    println!("{line}");
                } else {
                    eprintln!("{line}");
                }
            }
            ExitCode::from(if outcome.pass { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
