mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use commands::{run, CliError, Command, Options};
use hodge_wp::model_io::{load_model, LoadedModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

/// Weil-Petersson geometry and period-domain checks for polarized VHS models.
#[derive(Debug, Parser)]
#[command(name = "hodge-wp", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Model file (JSON, schema_version 1).
    model: PathBuf,
    /// Truncation order; overrides the file.
    #[arg(long)]
    order: Option<usize>,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Tolerance for finite-difference oracles.
    #[arg(long, default_value_t = 1e-6)]
    fd_tol: f64,
    /// Evaluation point, e.g. `1/2,0.1+0.3i`.
    #[arg(long)]
    at: Option<String>,
    /// Sample count, or a list of points separated by `;`.
    #[arg(long)]
    points: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Exit with status 3 when a verdict fails.
    #[arg(long)]
    strict: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok((text, passed)) => {
            print!("{text}");
            if cli.strict && !passed {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn execute(cli: &Cli) -> Result<(String, bool), CliError> {
    let (mut file, _) = load_model(&cli.model)?;
    if let Some(order) = cli.order {
        file.order = order;
    }
    let opts = Options {
        tol: cli.tol,
        fd_tol: cli.fd_tol,
        at: cli.at.clone(),
        points: cli.points.clone(),
        seed: cli.seed,
    };
    let report = match file.load()? {
        LoadedModel::Rational(m) => run(cli.command, &file, &m, &opts)?,
        LoadedModel::Float(m) => run(cli.command, &file, &m, &opts)?,
    };
    let text = match cli.format {
        Format::Text => report.to_text(),
        Format::Json => report.to_json() + "\n",
    };
    Ok((text, report.passed))
}
