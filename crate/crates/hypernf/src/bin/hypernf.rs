//! Command-line front end: `normalize`, `verify`, and `rank`.
//!
//! Exit status is 0 only when the requested workflow succeeds *and* its
//! verification (where one applies) passes.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hypernf::cli::{parse_input, resolve_settings, run_pipeline, run_rank, run_verify};
use hypernf::hyper::{ComplementStyle, LevelSpec};

#[derive(Parser)]
#[command(name = "hypernf", version, about = "Exact double-Hopf normal forms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Normalize an input document and print the full run report.
    Normalize {
        /// Input document (JSON, `pr` or `complex` mode).
        #[arg(long)]
        input: PathBuf,
        /// Simplification depth: a positive integer or `inf`.
        #[arg(long)]
        level: Option<LevelSpec>,
        /// Grade cap.
        #[arg(long)]
        grade: Option<u32>,
        /// Survivor style: `paper` (documented tables) or `lex`.
        #[arg(long)]
        style: Option<ComplementStyle>,
        /// Proceed on uncovered or degenerate coefficient patterns.
        #[arg(long)]
        force: bool,
        /// Write the report here as well as to stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Replay a stored report against its input document.
    Verify {
        /// The original input document.
        #[arg(long)]
        input: PathBuf,
        /// The report to replay.
        #[arg(long)]
        report: PathBuf,
    },
    /// Rank of the grade-`n` matrix for four amplitude coefficients.
    Rank {
        /// The grade.
        #[arg(long)]
        n: u32,
        /// Comma-separated `a01_1,a01_2,a10_1,a10_2`.
        #[arg(long)]
        coeffs: String,
    },
}

fn read(path: &PathBuf) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn run() -> Result<bool, String> {
    match Cli::parse().command {
        Command::Normalize { input, level, grade, style, force, output } => {
            let text = read(&input)?;
            let parsed = parse_input(&text).map_err(|e| e.to_string())?;
            let settings = resolve_settings(&parsed, grade, level, style, force)
                .map_err(|e| e.to_string())?;
            let out = run_pipeline(&parsed, &settings).map_err(|e| e.to_string())?;
            let json = out.report.to_json().map_err(|e| e.to_string())?;
            if let Some(path) = output {
                fs::write(&path, &json).map_err(|e| format!("{}: {e}", path.display()))?;
            }
            print!("{json}");
            Ok(out.passed)
        }
        Command::Verify { input, report } => {
            let outcome = run_verify(&read(&input)?, &read(&report)?).map_err(|e| e.to_string())?;
            let verdict = serde_json::json!({
                "status": if outcome.matches { "passed" } else { "failed" },
                "mismatches": outcome.mismatches,
            });
            println!("{}", serde_json::to_string_pretty(&verdict).expect("verdict serializes"));
            Ok(outcome.matches)
        }
        Command::Rank { n, coeffs } => {
            let value = run_rank(n, &coeffs).map_err(|e| e.to_string())?;
            println!("{}", serde_json::to_string_pretty(&value).expect("rank output serializes"));
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}
