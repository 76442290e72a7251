use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use anticanon::commands;

/// Decomposition and canonical forms for anti-commuting operator families.
#[derive(Parser)]
#[command(name = "anticanon", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a family file: anti-commutation, diagonalizability,
    /// linear independence. Exit 0 ok, 2 degenerate regime, 1 violations.
    Check {
        /// Family file (anticanon/1 JSON).
        input: PathBuf,
        /// Override the relative zero threshold (cluster radius keeps its
        /// 100x ratio).
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Decompose a family into its invariant blocks and write a report.
    Decompose {
        /// Family file (anticanon/1 JSON).
        input: PathBuf,
        /// Report output path.
        #[arg(short, long)]
        output: PathBuf,
        /// Also construct canonical forms per block.
        #[arg(long)]
        canon: bool,
        /// Override the relative zero threshold.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Build a family file (plus expected-skeleton sidecar) from a
    /// generation spec.
    Generate {
        /// Generation spec (anticanon-genspec/1 JSON).
        spec: PathBuf,
        /// Family file output path.
        #[arg(short, long)]
        output: PathBuf,
        /// Override the spec's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Check { input, tol } => commands::cmd_check(&input, tol),
        Command::Decompose {
            input,
            output,
            canon,
            tol,
        } => commands::cmd_decompose(&input, &output, canon, tol),
        Command::Generate { spec, output, seed } => commands::cmd_generate(&spec, &output, seed),
    };
    if outcome.exit_code == 0 || outcome.exit_code == 2 {
        print!("{}", outcome.summary);
        if !outcome.summary.ends_with('\n') {
            println!();
        }
    } else {
        eprint!("{}", outcome.summary);
        if !outcome.summary.ends_with('\n') {
            eprintln!();
        }
    }
    ExitCode::from(outcome.exit_code as u8)
}
