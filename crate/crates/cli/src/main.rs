use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ergolab::{cmd_cesaro, cmd_matrix, cmd_simulate, cmd_verify, CliError, ExperimentConfig};
use ergolab_core::diagnostics::Subject;

#[derive(Parser)]
#[command(name = "ergolab", version, about = "Truncated semigroup experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON experiment config; defaults apply to missing fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    subject: Option<SubjectArg>,
    /// Truncation dimension N.
    #[arg(long, global = true)]
    dim: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Trajectory CSV of U(t)x over the t grid.
    Simulate,
    /// Cesaro mean curve and convergence verdict over the r grid.
    Cesaro,
    /// Run the invariant suite at the configured N.
    Verify,
    /// Write the generator matrix of T.
    Matrix,
}

#[derive(Clone, Copy, ValueEnum)]
enum SubjectArg {
    #[value(name = "M", alias = "m")]
    M,
    #[value(name = "T", alias = "t")]
    T,
    #[value(name = "S", alias = "s")]
    S,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(out) = cli.out {
        config.output_dir = out;
    }
    if let Some(s) = cli.subject {
        config.subject = match s {
            SubjectArg::M => Subject::M,
            SubjectArg::T => Subject::T,
            SubjectArg::S => Subject::S,
        };
    }
    if let Some(dim) = cli.dim {
        config.dim = dim;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    let files = match cli.command {
        Command::Simulate => cmd_simulate(&config)?,
        Command::Cesaro => cmd_cesaro(&config)?.0,
        Command::Verify => {
            let (outputs, report) = cmd_verify(&config)?;
            println!(
                "{} checks passed at N = {}",
                report.checks.len(),
                report.dim
            );
            outputs
        }
        Command::Matrix => cmd_matrix(&config)?,
    };
    for f in files.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
