//! Run directories: `scenario.toml`, a streamed `diagnostics.csv`,
//! `snapshots/`, `final.snap` and `summary.txt`.

use std::fmt::Write as _;
use std::fs::{self, File, OpenOptions};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use crate::error::{FlowError, Result};
use crate::flow::{
    cigar_profile_distance, run, DiagnosticsRecord, FlowState, DEFAULT_REPORT_WINDOW,
};

use super::config::ScenarioConfig;
use super::diagnostics_csv::{read_diagnostics_file, DiagnosticsWriter, CSV_HEADER};
use super::scenario::build_scenario;
use super::snapshot::{load_snapshot, save_snapshot};

pub const SCENARIO_FILE: &str = "scenario.toml";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
pub const SNAPSHOT_DIR: &str = "snapshots";
pub const FINAL_SNAPSHOT: &str = "final.snap";
pub const SUMMARY_FILE: &str = "summary.txt";

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub directory: PathBuf,
    pub records: Vec<DiagnosticsRecord>,
    pub final_state: FlowState,
    /// Time the run started from (non-zero after a resume).
    pub resumed_from: Option<f64>,
}

fn snapshot_name(record_index: u64) -> String {
    format!("rec_{record_index:06}.snap")
}

fn record_index(t: f64, interval: f64) -> u64 {
    (t / interval).round() as u64
}

fn on_multiple(t: f64, interval: f64) -> bool {
    let k = (t / interval).round();
    (k * interval - t).abs() <= 1e-9 * interval
}

/// Latest snapshot in `dir/snapshots`, by record index.
fn latest_snapshot(dir: &Path) -> Result<Option<PathBuf>> {
    let snaps = dir.join(SNAPSHOT_DIR);
    if !snaps.is_dir() {
        return Ok(None);
    }
    let mut names: Vec<String> = fs::read_dir(&snaps)
        .map_err(|e| FlowError::io(&snaps, e))?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.starts_with("rec_") && n.ends_with(".snap"))
        .collect();
    names.sort();
    Ok(names.pop().map(|n| snaps.join(n)))
}

/// Keeps the header and the rows with `t ≤ t_cut`.
fn truncate_csv(path: &Path, t_cut: f64) -> Result<()> {
    let text = fs::read_to_string(path).map_err(|e| FlowError::io(path, e))?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if header != CSV_HEADER.join(",") {
        return Err(FlowError::History(format!(
            "{}: unexpected header",
            path.display()
        )));
    }
    let mut out = String::new();
    out.push_str(header);
    out.push('\n');
    for line in lines {
        let t: f64 = line
            .split(',')
            .next()
            .and_then(|f| f.parse().ok())
            .ok_or_else(|| FlowError::History(format!("bad row {line:?}")))?;
        if t > t_cut * (1.0 + 1e-12) {
            break;
        }
        out.push_str(line);
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| FlowError::io(path, e))
}

fn summary_text(config: &ScenarioConfig, outcome: &RunOutcome, distance: f64) -> String {
    let st = &outcome.final_state;
    let last = outcome.records.last();
    let mut s = String::new();
    let _ = writeln!(s, "scenario {}", config.name);
    let _ = writeln!(s, "t_final {:e}", st.t());
    let _ = writeln!(s, "steps {}", st.steps());
    let _ = writeln!(s, "frame_scale {:e}", st.frame_scale());
    let _ = writeln!(s, "cigar_distance {distance:e}");
    if let Some(r) = last {
        let _ = writeln!(s, "sup_R {:e}", r.sup_r);
        let _ = writeln!(s, "width_bound {:e}", r.width_bound);
        let _ = writeln!(s, "res_poisson {:e}", r.res_poisson);
    }
    let drift = outcome
        .records
        .iter()
        .map(|r| r.w_drift)
        .fold(0.0, f64::max);
    let _ = writeln!(s, "max_w_drift {drift:e}");
    s
}

/// Runs `config` into `out` (default: the config's output directory). With
/// `resume`, restarts from the newest snapshot and continues the CSV.
pub fn run_scenario(
    config: &ScenarioConfig,
    out: Option<&Path>,
    quiet: bool,
    resume: bool,
) -> Result<RunOutcome> {
    config.validate()?;
    let dir = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| config.output_dir());
    let snaps = dir.join(SNAPSHOT_DIR);
    fs::create_dir_all(&snaps).map_err(|e| FlowError::io(&snaps, e))?;
    let csv_path = dir.join(DIAGNOSTICS_FILE);

    let resume_from = if resume { latest_snapshot(&dir)? } else { None };
    let (initial, resumed_from, sink) = match &resume_from {
        Some(path) => {
            let st = load_snapshot(path)?;
            truncate_csv(&csv_path, st.t())?;
            let f = OpenOptions::new()
                .append(true)
                .open(&csv_path)
                .map_err(|e| FlowError::io(&csv_path, e))?;
            let t0 = st.t();
            (st, Some(t0), f)
        }
        None => {
            let cfg_path = dir.join(SCENARIO_FILE);
            fs::write(&cfg_path, config.to_toml_string()?)
                .map_err(|e| FlowError::io(&cfg_path, e))?;
            let st = build_scenario(config)?.state;
            let f = File::create(&csv_path).map_err(|e| FlowError::io(&csv_path, e))?;
            (st, None, f)
        }
    };
    let mut writer = if resumed_from.is_some() {
        DiagnosticsWriter::append(BufWriter::new(sink))
    } else {
        DiagnosticsWriter::new(BufWriter::new(sink))?
    };
    let plan = config.plan();
    let snap_every = config.output.snapshot_interval;
    let mut first = true;
    let traj = run(initial, &plan, |rec, st| {
        let repeat = first && resumed_from.is_some();
        first = false;
        if repeat {
            return Ok(());
        }
        writer.write(rec)?;
        writer.flush()?;
        if !quiet {
            println!(
                "t = {:.6}  sup R = {:.6e}  width = {:.6e}  res = {:.3e}",
                rec.t, rec.sup_r, rec.width_bound, rec.res_poisson
            );
        }
        if let Some(every) = snap_every {
            if on_multiple(rec.t, every) {
                let name = snapshot_name(record_index(rec.t, plan.record_interval));
                save_snapshot(st, &snaps.join(name))?;
            }
        }
        Ok(())
    });
    let traj = match traj {
        Ok(t) => t,
        Err(e) => {
            writer.flush()?;
            return Err(e);
        }
    };
    writer.flush()?;
    save_snapshot(&traj.final_state, &dir.join(FINAL_SNAPSHOT))?;

    let mut records = traj.records;
    if resumed_from.is_some() {
        records.remove(0);
    }
    let outcome = RunOutcome {
        directory: dir.clone(),
        records,
        final_state: traj.final_state,
        resumed_from,
    };
    let distance = cigar_profile_distance(&outcome.final_state, plan.report_window)?;
    let summary = summary_text(config, &outcome, distance);
    let path = dir.join(SUMMARY_FILE);
    fs::write(&path, &summary).map_err(|e| FlowError::io(&path, e))?;
    Ok(outcome)
}

/// Digest of a finished run directory.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub t_final: f64,
    pub cigar_distance: f64,
    /// `(t, width bound)` at every record.
    pub width_trace: Vec<(f64, f64)>,
    pub max_w_drift: f64,
    pub sup_h_first: f64,
    pub sup_h_last: f64,
    /// Largest increase of `sup h` between consecutive records.
    pub sup_h_max_rise: f64,
}

impl RunReport {
    pub fn text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "t_final          {:.6}", self.t_final);
        let _ = writeln!(s, "cigar distance   {:.6e}", self.cigar_distance);
        let _ = writeln!(s, "max w drift      {:.6e}", self.max_w_drift);
        let _ = writeln!(
            s,
            "sup h            {:.6e} -> {:.6e} (max rise {:.3e})",
            self.sup_h_first, self.sup_h_last, self.sup_h_max_rise
        );
        let _ = writeln!(s, "width bound trace:");
        for (t, w) in &self.width_trace {
            let _ = writeln!(s, "  t = {t:10.4}  width = {w:.6e}");
        }
        s
    }
}

pub fn report(run_dir: &Path) -> Result<RunReport> {
    let rows = read_diagnostics_file(&run_dir.join(DIAGNOSTICS_FILE))?;
    if rows.is_empty() {
        return Err(FlowError::History("diagnostics.csv has no rows".into()));
    }
    let state = load_snapshot(&run_dir.join(FINAL_SNAPSHOT))?;
    let window = ScenarioConfig::load(&run_dir.join(SCENARIO_FILE))
        .ok()
        .and_then(|c| c.output.report_window)
        .unwrap_or(DEFAULT_REPORT_WINDOW);
    let col = |r: &super::diagnostics_csv::CsvRow, c: &str| r.get(c).unwrap_or(f64::NAN);
    let sup_h: Vec<f64> = rows.iter().map(|r| col(r, "sup_h")).collect();
    Ok(RunReport {
        t_final: state.t(),
        cigar_distance: cigar_profile_distance(&state, window)?,
        width_trace: rows
            .iter()
            .map(|r| (col(r, "t"), col(r, "width_bound")))
            .collect(),
        max_w_drift: rows.iter().map(|r| col(r, "w_drift")).fold(0.0, f64::max),
        sup_h_first: sup_h[0],
        sup_h_last: *sup_h.last().expect("non-empty"),
        sup_h_max_rise: sup_h.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridKind;
    use crate::harness::config::{GridSpec, InitialSpec, OutputSpec, SteppingSpec};

    fn config() -> ScenarioConfig {
        ScenarioConfig {
            name: "tiny".into(),
            seed: 0,
            grid: GridSpec {
                kind: GridKind::Radial,
                n: 33,
                s_max: Some(6.0),
                half_width: None,
            },
            initial: InitialSpec::PerturbedCigar {
                amplitude: 0.2,
                center: 1.5,
                width: 0.5,
            },
            stepping: SteppingSpec {
                safety: 0.9,
                t_end: 0.2,
                record_interval: 0.05,
                renormalize: None,
                dt: None,
            },
            output: OutputSpec {
                directory: None,
                snapshot_interval: Some(0.1),
                report_window: None,
            },
        }
    }

    #[test]
    fn writes_the_run_directory() {
        let tmp = tempfile::tempdir().unwrap();
        let out = run_scenario(&config(), Some(tmp.path()), true, false).unwrap();
        assert_eq!(out.records.len(), 5);
        for f in [
            SCENARIO_FILE,
            DIAGNOSTICS_FILE,
            FINAL_SNAPSHOT,
            SUMMARY_FILE,
        ] {
            assert!(tmp.path().join(f).is_file(), "{f}");
        }
        assert!(tmp
            .path()
            .join(SNAPSHOT_DIR)
            .join(snapshot_name(2))
            .is_file());
        assert!(tmp
            .path()
            .join(SNAPSHOT_DIR)
            .join(snapshot_name(4))
            .is_file());
        let rep = report(tmp.path()).unwrap();
        assert_eq!(rep.width_trace.len(), 5);
        assert!((rep.t_final - 0.2).abs() < 1e-12);
    }

    #[test]
    fn resume_reproduces_the_csv() {
        let full = tempfile::tempdir().unwrap();
        run_scenario(&config(), Some(full.path()), true, false).unwrap();
        let part = tempfile::tempdir().unwrap();
        let mut short = config();
        short.stepping.t_end = 0.1;
        run_scenario(&short, Some(part.path()), true, false).unwrap();
        let out = run_scenario(&config(), Some(part.path()), true, true).unwrap();
        assert_eq!(out.resumed_from, Some(0.1));
        let a = fs::read(full.path().join(DIAGNOSTICS_FILE)).unwrap();
        let b = fs::read(part.path().join(DIAGNOSTICS_FILE)).unwrap();
        assert_eq!(a, b);
    }
}
