//! Experiment harness: scenario files, run directories, invariant checks,
//! refinement studies and the command line.

pub mod check;
pub mod cli;
pub mod config;
pub mod converge;
pub mod diagnostics_csv;
pub mod oracle;
pub mod rundir;
pub mod scenario;
pub mod snapshot;
pub mod verify;

pub use check::{all_passed, Check};
pub use cli::{exit_code, main_with_args};
pub use config::{GridSpec, InitialSpec, OutputSpec, ScenarioConfig, SteppingSpec};
pub use converge::{converge, ConvergenceReport};
pub use diagnostics_csv::{
    emit_diagnostics, read_diagnostics, read_diagnostics_file, CsvRow, DiagnosticsWriter,
    CSV_HEADER,
};
pub use oracle::{oracle_suite, ORACLE_TOL};
pub use rundir::{report, run_scenario, RunOutcome, RunReport};
pub use scenario::{build_scenario, HypothesisReport, Scenario, TAIL_SLOPE_LIMIT};
pub use snapshot::{load_snapshot, parse_snapshot, save_snapshot, snapshot_text, SNAPSHOT_VERSION};
pub use verify::{calibrate, verify, Calibration, VerifyReport};
