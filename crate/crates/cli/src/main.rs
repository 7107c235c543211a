//! `embezzle-lab`: demos, sweeps and certification runs with JSON reports.
//!
//! Exit status: 0 when every check passes, 1 when a check fails or a
//! pipeline errors, 2 for usage and configuration errors.

mod commands;
mod config;
mod plot;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use config::{Flags, RunConfig, SEED_VAR};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("{0}")]
    Core(#[from] embezzle_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(_) => 1,
            _ => 2,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Parse { .. } => "parse",
            CliError::Core(_) => "pipeline",
            CliError::Io { .. } => "io",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "embezzle-lab", version, about = "Embezzlement protocol demos, sweeps and certification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// One hotel step on a catalyst with explicit copies and a lazy tail
    DemoHotel(Flags),
    /// Standard/no-input conversions of the hotel protocol
    Convert(Flags),
    /// Commuting-copy certification of the hotel catalyst
    Certify(Flags),
    /// van Dam-Hayden fidelity over a range of catalyst sizes
    VdhSweep(Flags),
    /// Simultaneous containment for a composite catalyst
    Universal(Flags),
    /// Isometry battery for the factory maps and conversion composites
    VerifyIsometries(Flags),
    /// Flat x,y,series CSV from a saved report
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
struct PlotArgs {
    report: PathBuf,
    /// CSV path; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io { path: p.to_path_buf(), source }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run_pipeline(name: &str, flags: &Flags) -> Result<bool, CliError> {
    let cfg = RunConfig::resolve(name, flags, std::env::var(SEED_VAR).ok())?;
    let out = match name {
        "demo-hotel" => commands::demo_hotel(&cfg)?,
        "convert" => commands::convert(&cfg)?,
        "certify" => commands::certify(&cfg)?,
        "vdh-sweep" => commands::vdh_sweep(&cfg)?,
        "universal" => commands::universal(&cfg)?,
        "verify-isometries" => commands::verify_isometries(&cfg)?,
        other => unreachable!("unknown pipeline {other}"),
    };
    let json = serde_json::to_string_pretty(&out.report).expect("report serializes") + "\n";
    write_or_print(cfg.out.as_deref(), &json)?;
    if let (Some(path), Some(csv)) = (cfg.csv.as_deref(), &out.csv) {
        write_or_print(Some(path), csv)?;
    }
    if let Some(f) = &out.report.failure {
        eprintln!("{}", json!({ "tool": report::TOOL, "failure": f }));
    }
    Ok(out.report.pass)
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let (name, flags) = match &cli.command {
        Command::Plot(args) => {
            let text = std::fs::read_to_string(&args.report)
                .map_err(|source| CliError::Io { path: args.report.clone(), source })?;
            write_or_print(args.out.as_deref(), &plot::emit_plot_data(&text)?)?;
            return Ok(true);
        }
        Command::DemoHotel(f) => ("demo-hotel", f),
        Command::Convert(f) => ("convert", f),
        Command::Certify(f) => ("certify", f),
        Command::VdhSweep(f) => ("vdh-sweep", f),
        Command::Universal(f) => ("universal", f),
        Command::VerifyIsometries(f) => ("verify-isometries", f),
    };
    run_pipeline(name, flags)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{}", json!({ "tool": report::TOOL, "error": e.kind(), "message": e.to_string() }));
            ExitCode::from(e.exit_code())
        }
    }
}
