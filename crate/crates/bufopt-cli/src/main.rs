//! Command-line surface: solve or verify a net, generate calibrated random
//! nets, and run scaling benchmarks.
//!
//! Exit codes: 0 success, 1 parse/validation failure (including benchmark
//! differential mismatches), 2 I/O failure, 3 brute-force cap exceeded.

mod bench;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use bufopt::oracle::OracleError;
use bufopt::solver::{Kernel, PruneMode};
use bufopt::{
    brute_force, evaluate, gen_net, load_assignment, load_library, load_net, save_library,
    save_net, solve, ModelError,
};

#[derive(Parser)]
#[command(name = "bufopt", version, about = "Optimal buffer insertion on RC routing trees")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve a net: choose buffer placements maximizing the source slack.
    Solve(SolveArgs),
    /// Evaluate an assignment file against a net.
    Verify(VerifyArgs),
    /// Generate a seeded random net and matching buffer library.
    Gen(GenArgs),
    /// Sweep (m, n, b, kernel) configurations and report median solve times.
    Bench(bench::BenchArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelArg {
    Fast,
    Baseline,
    Brute,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Destructive,
    Copy,
}

impl ModeArg {
    pub fn to_mode(self) -> PruneMode {
        match self {
            ModeArg::Destructive => PruneMode::Destructive,
            ModeArg::Copy => PruneMode::Copy,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Net file (JSON).
    #[arg(long)]
    net: PathBuf,
    /// Buffer library file (JSON).
    #[arg(long)]
    lib: PathBuf,
    /// Solver kernel; `brute` runs the exhaustive oracle instead of the DP.
    #[arg(long, value_enum, default_value = "fast")]
    kernel: KernelArg,
    /// Convex-pruning mode. `copy` preserves optimality on multi-sink
    /// nets; `destructive` mutates the shared list in place.
    #[arg(long, value_enum, default_value = "copy")]
    mode: ModeArg,
    /// Emit the report as JSON.
    #[arg(long, conflicts_with = "csv")]
    json: bool,
    /// Emit the report as CSV.
    #[arg(long)]
    csv: bool,
    /// Report destination (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the winning assignment to this file (verify input format).
    #[arg(long)]
    emit_assignment: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    net: PathBuf,
    #[arg(long)]
    lib: PathBuf,
    /// Assignment file to evaluate.
    #[arg(long)]
    assignment: PathBuf,
    #[arg(long)]
    json: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    /// Number of sinks.
    #[arg(long)]
    sinks: usize,
    /// Number of buffer positions.
    #[arg(long)]
    positions: usize,
    /// Library size.
    #[arg(long, default_value = "8")]
    buffers: usize,
    #[arg(long, default_value = "1")]
    seed: u64,
    #[arg(long)]
    out_net: PathBuf,
    #[arg(long)]
    out_lib: PathBuf,
}

/// Errors with their process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Malformed or inconsistent inputs, and failed result checks. Exit 1.
    Validation(String),
    /// Filesystem trouble. Exit 2.
    Io(String),
    /// Brute force refused: too many combinations. Exit 3.
    CapExceeded(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io(_) => 2,
            CliError::CapExceeded(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Io(m) | CliError::CapExceeded(m) => m,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Io { .. } => CliError::Io(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Model(m) => m.into(),
            OracleError::CapExceeded { .. } => CliError::CapExceeded(e.to_string()),
        }
    }
}

pub fn write_output(out: &Option<PathBuf>, body: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, body)
            .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display()))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn cmd_solve(args: &SolveArgs) -> Result<(), CliError> {
    let tree = load_net(&args.net)?;
    let lib = load_library(&args.lib)?;

    let rpt = match args.kernel {
        KernelArg::Brute => {
            let start = Instant::now();
            let (slack, assignment) = brute_force(&tree, &lib)?;
            report::SolveReport::from_brute(slack, assignment, start.elapsed().as_secs_f64())
        }
        fast_or_baseline => {
            let kernel = if fast_or_baseline == KernelArg::Fast {
                Kernel::Fast
            } else {
                Kernel::Baseline
            };
            let start = Instant::now();
            let res = solve(&tree, &lib, kernel, args.mode.to_mode())?;
            report::SolveReport::from_solve(kernel, args.mode, res, start.elapsed().as_secs_f64())
        }
    };

    if let Some(path) = &args.emit_assignment {
        bufopt::save_assignment(&rpt.assignment, path)?;
    }
    let body = if args.json {
        rpt.to_json()
    } else if args.csv {
        rpt.to_csv()
    } else {
        rpt.to_text()
    };
    write_output(&args.out, &body)
}

fn cmd_verify(args: &VerifyArgs) -> Result<(), CliError> {
    let tree = load_net(&args.net)?;
    let lib = load_library(&args.lib)?;
    let assignment = load_assignment(&args.assignment)?;
    let report = evaluate(&tree, &lib, &assignment)?;
    let body = if args.json {
        report::verify_json(&report)
    } else {
        report::verify_text(&report)
    };
    write_output(&args.out, &body)
}

fn cmd_gen(args: &GenArgs) -> Result<(), CliError> {
    if args.sinks == 0 {
        return Err(CliError::Validation("--sinks must be at least 1".into()));
    }
    if args.buffers == 0 {
        return Err(CliError::Validation("--buffers must be at least 1".into()));
    }
    let (tree, lib) = gen_net(args.sinks, args.positions, args.buffers, args.seed);
    save_net(&tree, &args.out_net)?;
    save_library(&lib, &args.out_lib)?;
    eprintln!(
        "wrote {} ({} sinks, {} positions) and {} ({} buffers)",
        args.out_net.display(),
        args.sinks,
        args.positions,
        args.out_lib.display(),
        args.buffers
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Solve(a) => cmd_solve(a),
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::Gen(a) => cmd_gen(a),
        Cmd::Bench(a) => bench::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
