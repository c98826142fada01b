//! `tirc` — driver for the TIR toolchain.
//!
//! Exit codes: 0 success, 1 semantic or model error (diagnostics, uncosted
//! opcodes, parameter extraction failures), 2 I/O failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tirc::analysis::validate;
use tirc::device::{load_device_profile, DeviceProfile, ProfileError};
use tirc::diag::Diagnostic;
use tirc::interp::{run, to_csv, DataSet};
use tirc::ir::Program;
use tirc::parser::parse_program;
use tirc::report::{
    estimate_program, human_compare, human_estimate, json_compare, json_estimate, Estimate,
};

const DEFAULT_DEVICE: &str = "stratix-like.dev";
const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(
    name = "tirc",
    version,
    about = "TIR toolchain: check, estimate, compare, and run TIR kernel programs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a program
    Check {
        /// TIR source file
        file: PathBuf,
    },
    /// Estimate resources and throughput against a device profile
    Estimate {
        /// TIR source file
        file: PathBuf,
        /// Device profile (default: stratix-like.dev via TIRC_DEVICE_DIR,
        /// the executable's directory, or the working directory)
        #[arg(long)]
        device: Option<PathBuf>,
        /// Emit the machine-readable JSON document
        #[arg(long)]
        json: bool,
    },
    /// Estimate two programs and report B/A ratios per metric
    Compare {
        /// Program A
        file_a: PathBuf,
        /// Program B
        file_b: PathBuf,
        #[arg(long)]
        device: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Execute a program on concrete data
    Run {
        /// TIR source file
        file: PathBuf,
        /// Input CSV (header row of memory names, one value row per element)
        #[arg(long)]
        data: Option<PathBuf>,
        /// Output CSV path (default: stdout)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    /// Semantic, model, or data error: exit 1.
    Semantic,
    /// Filesystem-level problem: exit 2.
    Io(String),
}

impl Failure {
    fn semantic(message: impl std::fmt::Display) -> Failure {
        eprintln!("tirc: error: {message}");
        Failure::Semantic
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check { file } => cmd_check(&file),
        Command::Estimate { file, device, json } => cmd_estimate(&file, device.as_deref(), json),
        Command::Compare { file_a, file_b, device, json } => {
            cmd_compare(&file_a, &file_b, device.as_deref(), json)
        }
        Command::Run { file, data, out } => cmd_run(&file, data.as_deref(), out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Semantic) => ExitCode::from(1),
        Err(Failure::Io(message)) => {
            eprintln!("tirc: error: {message}");
            ExitCode::from(2)
        }
    }
}

fn read_source(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))
}

fn print_diagnostics(diags: &[Diagnostic]) {
    for d in diags {
        eprintln!("{d}");
    }
}

/// Parses and validates; prints every diagnostic, fails on errors.
fn load_program(path: &Path) -> Result<Program, Failure> {
    let source = read_source(path)?;
    let name = path.display().to_string();
    let program = parse_program(&name, &source).map_err(|diags| {
        print_diagnostics(&diags);
        Failure::Semantic
    })?;
    match validate(&program) {
        Ok(warnings) => {
            print_diagnostics(&warnings);
            Ok(program)
        }
        Err(diags) => {
            print_diagnostics(&diags);
            Err(Failure::Semantic)
        }
    }
}

/// Resolves the device profile: an explicit path, or the default profile
/// name searched through TIRC_DEVICE_DIR, the executable's directory, and
/// the working directory.
fn load_device(explicit: Option<&Path>) -> Result<DeviceProfile, Failure> {
    let path = match explicit {
        Some(p) => p.to_path_buf(),
        None => find_default_device().ok_or_else(|| {
            Failure::Io(format!(
                "cannot find `{DEFAULT_DEVICE}`: pass --device or set TIRC_DEVICE_DIR"
            ))
        })?,
    };
    load_device_profile(&path).map_err(|e| match e {
        ProfileError::Io(io) => Failure::Io(format!("cannot read {}: {io}", path.display())),
        other => Failure::semantic(format!("{}: {other}", path.display())),
    })
}

fn find_default_device() -> Option<PathBuf> {
    let mut dirs: Vec<PathBuf> = Vec::new();
    if let Some(paths) = std::env::var_os("TIRC_DEVICE_DIR") {
        dirs.extend(std::env::split_paths(&paths));
    }
    if let Ok(exe) = std::env::current_exe() {
        if let Some(dir) = exe.parent() {
            dirs.push(dir.to_path_buf());
        }
    }
    dirs.push(PathBuf::from("."));
    dirs.into_iter().map(|d| d.join(DEFAULT_DEVICE)).find(|p| p.is_file())
}

fn cmd_check(file: &Path) -> Result<(), Failure> {
    load_program(file)?;
    Ok(())
}

fn estimate_file(file: &Path, device: &DeviceProfile) -> Result<Estimate, Failure> {
    let program = load_program(file)?;
    estimate_program(&file.display().to_string(), &program, device).map_err(Failure::semantic)
}

fn cmd_estimate(file: &Path, device: Option<&Path>, json: bool) -> Result<(), Failure> {
    let device = load_device(device)?;
    let estimate = estimate_file(file, &device)?;
    if json {
        print!("{}", json_estimate(TOOL_VERSION, &estimate));
    } else {
        print!("{}", human_estimate(&estimate, &device));
    }
    Ok(())
}

fn cmd_compare(
    file_a: &Path,
    file_b: &Path,
    device: Option<&Path>,
    json: bool,
) -> Result<(), Failure> {
    let device = load_device(device)?;
    let a = estimate_file(file_a, &device)?;
    let b = estimate_file(file_b, &device)?;
    if json {
        print!("{}", json_compare(TOOL_VERSION, &a, &b));
    } else {
        print!("{}", human_compare(&a, &b, &device));
    }
    Ok(())
}

fn cmd_run(file: &Path, data: Option<&Path>, out: Option<&Path>) -> Result<(), Failure> {
    let program = load_program(file)?;
    let dataset = match data {
        Some(path) => {
            let text = read_source(path)?;
            DataSet::from_csv(&text).map_err(Failure::semantic)?
        }
        None => DataSet::new(),
    };
    let result = run(&program, &dataset).map_err(|e| {
        if let tirc::interp::RunError::Diagnostics(diags) = &e {
            print_diagnostics(diags);
        }
        Failure::semantic(e)
    })?;
    let csv = to_csv(&result.outputs);
    let summary = format!(
        "cycles: {} ({} iterations, {} cycles/iteration)",
        result.cycles,
        result.repeats_executed,
        result.cycles_per_iteration()
    );
    match out {
        Some(path) => {
            std::fs::write(path, csv)
                .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))?;
            println!("{summary}");
        }
        None => {
            print!("{csv}");
            eprintln!("{summary}");
        }
    }
    Ok(())
}
