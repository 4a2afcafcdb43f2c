//! `cigarflow` command line.
//!
//! Exit codes: 0 success, 1 invariant or hypothesis failure, 2 usage or
//! configuration error, 3 numerical abort or I/O failure.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::FlowError;

use super::check::all_passed;
use super::config::ScenarioConfig;
use super::converge::converge;
use super::oracle::oracle_suite;
use super::rundir::{report, run_scenario};
use super::verify::verify;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_ABORT: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "cigarflow",
    version,
    about = "Ricci flow on surfaces near the cigar soliton"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate a scenario and write its run directory.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        quiet: bool,
        /// Continue from the newest snapshot in the run directory.
        #[arg(long)]
        resume: bool,
    },
    /// Run the invariant suite on a scenario.
    Verify { config: PathBuf },
    /// Refinement study on N, 2N-1 and 4N-3 nodes.
    Converge { config: PathBuf },
    /// Closed-form identities of the cigar.
    Oracle,
    /// Summarise a finished run directory.
    Report { dir: PathBuf },
}

pub fn exit_code(err: &FlowError) -> i32 {
    match err {
        FlowError::Hypothesis(_) => EXIT_VIOLATION,
        FlowError::Config(_) | FlowError::Grid(_) => EXIT_USAGE,
        _ => EXIT_ABORT,
    }
}

fn report_error(err: &FlowError) -> i32 {
    eprintln!("error: {err}");
    if let FlowError::Instability {
        last_record: Some(rec),
        ..
    } = err
    {
        eprintln!(
            "last finite record: t = {:e}, sup R = {:e}, sup u_tilde = {:e}",
            rec.t, rec.sup_r, rec.sup_u_tilde
        );
    }
    exit_code(err)
}

fn execute(command: Command) -> Result<i32, FlowError> {
    match command {
        Command::Run {
            config,
            out,
            quiet,
            resume,
        } => {
            let cfg = ScenarioConfig::load(&config)?;
            let outcome = run_scenario(&cfg, out.as_deref(), quiet, resume)?;
            println!(
                "wrote {} (t = {}, {} steps)",
                outcome.directory.display(),
                outcome.final_state.t(),
                outcome.final_state.steps()
            );
            Ok(EXIT_OK)
        }
        Command::Verify { config } => {
            let cfg = ScenarioConfig::load(&config)?;
            let rep = verify(&cfg)?;
            for c in &rep.checks {
                println!("{c}");
            }
            Ok(if rep.passed() {
                EXIT_OK
            } else {
                EXIT_VIOLATION
            })
        }
        Command::Converge { config } => {
            let cfg = ScenarioConfig::load(&config)?;
            print!("{}", converge(&cfg)?.summary());
            Ok(EXIT_OK)
        }
        Command::Oracle => {
            let checks = oracle_suite()?;
            for c in &checks {
                println!("{c}");
            }
            Ok(if all_passed(&checks) {
                EXIT_OK
            } else {
                EXIT_VIOLATION
            })
        }
        Command::Report { dir } => {
            print!("{}", report(&dir)?.text());
            Ok(EXIT_OK)
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => report_error(&e),
    }
}
