//! `zuslab`: checks, analyses and constructions for zero-uncertainty states.
//!
//! Exit codes: 0 when the checked property holds, 1 when it fails on
//! well-formed input, 2 on input or validation errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

mod commands;
mod construct;
mod report;

use commands::{resolve_seed, Common};
use construct::ConstructArgs;
use report::{Failure, Report, Sink};

#[derive(Debug, Parser)]
#[command(name = "zuslab", version, about = "Zero-uncertainty states of bipartite quantum systems")]
struct Cli {
    /// Equality tolerance, overriding the problem file.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Probe seed; falls back to the problem file, then ZUSLAB_SEED.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Machine-readable report.
    #[arg(long, global = true)]
    json: bool,
    /// Write the report (or constructed file) to this path.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Per-measurement ZUS verdicts; exit 0 iff the state is a common ZUS.
    CheckZus {
        file: PathBuf,
        #[arg(long)]
        family: Option<String>,
    },
    /// Generated algebra, block structure and the rigidity checks.
    Analyze {
        file: PathBuf,
        #[arg(long)]
        family: Option<String>,
    },
    /// Normal form of an 𝒜-ZUS; exit 1 when the state is not one.
    NormalForm {
        file: PathBuf,
        #[arg(long)]
        family: Option<String>,
        /// Include gauge unitaries and memory states.
        #[arg(long)]
        full_output: bool,
    },
    /// Write a problem file for one of the example families.
    Construct(ConstructArgs),
    /// Steering assemblage, per-setting distinguishability and decoders.
    Steering {
        file: PathBuf,
        #[arg(long)]
        family: Option<String>,
    },
}

fn run_construct(cli: &Cli, args: &ConstructArgs, sink: &Sink) -> u8 {
    let result = resolve_seed(cli.seed, None).and_then(|seed| construct::build(args, seed));
    let file = match result {
        Ok(f) => f,
        Err(f) => return Sink { json: sink.json, out: None }.emit(&Report::failure("construct", &f)),
    };
    let text = file.to_json_string() + "\n";
    match &cli.out {
        None => {
            print!("{text}");
            0
        }
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                let f = Failure::new("Io", format!("cannot write {}: {e}", path.display()));
                return Sink { json: sink.json, out: None }.emit(&Report::failure("construct", &f));
            }
            let mut r = Report::new("construct");
            r.set("path", path.display().to_string());
            r.set("d_a", file.state.d_a);
            r.set("d_b", file.state.d_b);
            r.set("metadata", file.metadata.clone());
            r.set("seed", json!(file.seed));
            r.line(format!(
                "wrote {} (d_a = {}, d_b = {})",
                path.display(),
                file.state.d_a,
                file.state.d_b
            ));
            Sink { json: sink.json, out: None }.emit(&r)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let sink = Sink {
        json: cli.json,
        out: cli.out.clone(),
    };
    fn common<'a>(cli: &Cli, family: &'a Option<String>) -> Common<'a> {
        Common {
            tol: cli.tol,
            seed: cli.seed,
            family: family.as_deref(),
        }
    }
    let (name, result) = match &cli.command {
        Command::CheckZus { file, family } => ("check-zus", commands::check_zus(file, &common(&cli, family))),
        Command::Analyze { file, family } => ("analyze", commands::analyze(file, &common(&cli, family))),
        Command::NormalForm {
            file,
            family,
            full_output,
        } => ("normal-form", commands::normal_form(file, &common(&cli, family), *full_output)),
        Command::Steering { file, family } => ("steering", commands::steering(file, &common(&cli, family))),
        Command::Construct(args) => return ExitCode::from(run_construct(&cli, args, &sink)),
    };
    let report = result.unwrap_or_else(|f| Report::failure(name, &f));
    ExitCode::from(sink.emit(&report))
}
