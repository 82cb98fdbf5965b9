//! The `qcqp` command-line tool.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::bnb::{check_boundedness, solve, SolveStatus, SolverParams};
use crate::error::{Error, Result};
use crate::instance::{validate_instance, BoundednessCheck};
use crate::io::{
    emit_instance, generate, parse_instance, parse_instance_file, report_text, GenParams,
    OracleFile, ReportFile,
};
use crate::oracle::OracleRegistry;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_LIMIT: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "qcqp", version, about = "Global solver for non-convex QCQPs with few negative eigenvalues")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Output {
    Json,
    Text,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve an instance to epsilon-optimality
    Solve {
        file: PathBuf,
        #[arg(long, default_value_t = 1e-4)]
        epsilon: f64,
        #[arg(long = "max-iter")]
        max_iter: Option<u64>,
        /// Seconds
        #[arg(long = "time-limit")]
        time_limit: Option<f64>,
        #[arg(long, value_enum, default_value_t = Output::Text)]
        output: Output,
        /// Include the per-iteration bounds
        #[arg(long)]
        trace: bool,
    },
    /// Check an instance file against the model assumptions
    Validate { file: PathBuf },
    /// Brute-force reference minimum (n <= 4)
    Oracle {
        file: PathBuf,
        #[arg(long, default_value_t = 0.01)]
        resolution: f64,
        #[arg(long, default_value = "grid", value_parser = ["grid", "vertex"])]
        method: String,
    },
    /// Write a seeded random instance
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: usize,
        #[arg(long, default_value_t = 0)]
        p: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Defaults to stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn status_code(status: SolveStatus) -> i32 {
    match status {
        SolveStatus::EpsOptimal => EXIT_OK,
        SolveStatus::IterLimit | SolveStatus::TimeLimit => EXIT_LIMIT,
        SolveStatus::Infeasible | SolveStatus::UnboundedSet => EXIT_INFEASIBLE,
        SolveStatus::AlreadyConvex | SolveStatus::NumericFailure => EXIT_ERROR,
    }
}

fn describe(e: &Error) -> String {
    match e {
        Error::Validation(v) => {
            let mut s = String::from("invalid instance:");
            for x in v {
                s.push_str(&format!("\n  {}: {}", x.code.as_str(), x.message));
            }
            s
        }
        other => other.to_string(),
    }
}

/// Runs the tool on `args` (program name first) and returns the exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_ERROR
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, String> {
    let io = |e: std::io::Error| e.to_string();
    match command {
        Command::Solve {
            file,
            epsilon,
            max_iter,
            time_limit,
            output,
            trace,
        } => {
            if !(epsilon > 0.0) {
                let _ = writeln!(err, "error: --epsilon must be positive");
                return Ok(EXIT_USAGE);
            }
            let inst = parse_instance(&read(&file)?).map_err(|e| describe(&e))?;
            let params = SolverParams {
                epsilon,
                max_iters: max_iter,
                time_limit_seconds: time_limit,
            };
            let rep = solve(&inst, params).map_err(|e| describe(&e))?;
            match output {
                Output::Json => {
                    write!(out, "{}", ReportFile::from_report(&rep, trace).to_json()).map_err(io)?;
                    if let Some(msg) = &rep.message {
                        let _ = writeln!(err, "{}: {msg}", rep.status.as_str());
                    }
                }
                Output::Text => write!(out, "{}", report_text(&rep, trace)).map_err(io)?,
            }
            Ok(status_code(rep.status))
        }
        Command::Validate { file } => {
            let text = read(&file)?;
            let inst = match parse_instance_file(&text).and_then(|f| f.to_instance()) {
                Ok(inst) => inst,
                Err(e) => {
                    writeln!(out, "{}", describe(&e)).map_err(io)?;
                    return Ok(EXIT_ERROR);
                }
            };
            let mut report = validate_instance(&inst);
            if report.valid && report.r_detected > 0 {
                match check_boundedness(&inst) {
                    Ok(check) => report.boundedness_check = check,
                    Err(e) => {
                        report.boundedness_check = BoundednessCheck::NotVerified;
                        let _ = writeln!(err, "boundedness not verified: {e}");
                    }
                }
            }
            let json = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?;
            writeln!(out, "{json}").map_err(io)?;
            Ok(if report.valid { EXIT_OK } else { EXIT_ERROR })
        }
        Command::Oracle {
            file,
            resolution,
            method,
        } => {
            let inst = parse_instance(&read(&file)?).map_err(|e| describe(&e))?;
            let registry = OracleRegistry::standard(resolution);
            let res = registry.run(&method, &inst).map_err(|e| describe(&e))?;
            write!(out, "{}", OracleFile::from(&res).to_json()).map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Gen { n, r, p, seed, out: path } => {
            let inst = match generate(&GenParams { n, r, p, seed }) {
                Ok(inst) => inst,
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    return Ok(EXIT_USAGE);
                }
            };
            let text = emit_instance(&inst);
            match path {
                Some(path) => std::fs::write(&path, text)
                    .map_err(|e| format!("cannot write {}: {e}", path.display()))?,
                None => write!(out, "{text}").map_err(io)?,
            }
            Ok(EXIT_OK)
        }
    }
}
