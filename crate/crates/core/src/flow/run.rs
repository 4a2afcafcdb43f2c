use crate::analytics::SolitonFamily;
use crate::error::{FlowError, Result};

use super::monitor::{monitor, DiagnosticsRecord};
use super::normalize::{cigar_profile_distance, normalizing_factor};
use super::stepper::{adaptive_dt, step};
use super::FlowState;

/// Stepping policy of one integration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunPlan {
    pub t_end: f64,
    pub record_interval: f64,
    pub safety: f64,
    /// Overrides the adaptive step (still clipped to land on record times).
    pub fixed_dt: Option<f64>,
    /// Rescale the frame whenever `|ũ_frame(origin)|` exceeds this.
    pub renormalize: Option<f64>,
    pub report_window: f64,
    /// Keep a copy of the state at every record.
    pub keep_states: bool,
}

impl Default for RunPlan {
    fn default() -> Self {
        Self {
            t_end: 1.0,
            record_interval: 0.1,
            safety: 0.9,
            fixed_dt: None,
            renormalize: None,
            report_window: super::normalize::DEFAULT_REPORT_WINDOW,
            keep_states: false,
        }
    }
}

impl RunPlan {
    fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(FlowError::Config(format!(
                "t_end must be non-negative, got {}",
                self.t_end
            )));
        }
        if !ok(self.record_interval) {
            return Err(FlowError::Config("record_interval must be positive".into()));
        }
        if !ok(self.safety) {
            return Err(FlowError::Config("safety must be positive".into()));
        }
        if let Some(dt) = self.fixed_dt {
            if !ok(dt) {
                return Err(FlowError::Config("dt must be positive".into()));
            }
        }
        if let Some(th) = self.renormalize {
            if !ok(th) {
                return Err(FlowError::Config(
                    "renormalize threshold must be positive".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub records: Vec<DiagnosticsRecord>,
    pub final_state: FlowState,
    /// States at the record times, when requested.
    pub states: Vec<FlowState>,
}

impl Trajectory {
    /// Normalised profile distance to the cigar at the final time.
    pub fn final_distance(&self, window: f64) -> Result<f64> {
        cigar_profile_distance(&self.final_state, window)
    }
}

/// Index of the next record time `k·interval` strictly after `t`.
fn next_record_index(t: f64, interval: f64) -> u64 {
    let k = (t / interval).round();
    let k = if (k * interval - t).abs() <= 1e-12 * interval.max(t) {
        k
    } else {
        (t / interval).floor()
    };
    k as u64 + 1
}

/// Integrates `initial` to `plan.t_end`, recording at every multiple of the
/// record interval (and at the start). `observer` sees each record with its
/// state; an error from it stops the run.
pub fn run<F>(initial: FlowState, plan: &RunPlan, mut observer: F) -> Result<Trajectory>
where
    F: FnMut(&DiagnosticsRecord, &FlowState) -> Result<()>,
{
    plan.validate()?;
    let mut state = initial;
    let mut records = Vec::new();
    let mut states = Vec::new();
    let first = monitor(&state)?;
    observer(&first, &state)?;
    records.push(first);
    if plan.keep_states {
        states.push(state.clone());
    }
    let mut k = next_record_index(state.t(), plan.record_interval);
    let end_tol = 1e-12 * plan.t_end.max(1.0);
    while state.t() < plan.t_end - end_tol {
        let target = (k as f64 * plan.record_interval).min(plan.t_end);
        let abort = |e: FlowError, records: &[DiagnosticsRecord]| match e {
            FlowError::Instability { t, reason, .. } => FlowError::Instability {
                t,
                reason,
                last_record: records.last().cloned().map(Box::new),
            },
            other => other,
        };
        while state.t() < target - end_tol {
            let mut dt = match plan.fixed_dt {
                Some(dt) => dt,
                None => adaptive_dt(&state, plan.safety).map_err(|e| abort(e, &records))?,
            };
            let landing = dt >= target - state.t() - end_tol;
            if landing {
                dt = target - state.t();
            }
            let mut next = step(&state, dt).map_err(|e| abort(e, &records))?;
            if landing {
                next.t = target;
            }
            if let Some(threshold) = plan.renormalize {
                if next.u_tilde()[next.grid().origin()].abs() > threshold {
                    next = next.rescaled(normalizing_factor(&next))?;
                }
            }
            state = next;
        }
        let rec = monitor(&state)?;
        if !rec.is_finite() {
            return Err(FlowError::Instability {
                t: state.t(),
                reason: "non-finite diagnostics".into(),
                last_record: records.last().cloned().map(Box::new),
            });
        }
        observer(&rec, &state)?;
        records.push(rec);
        if plan.keep_states {
            states.push(state.clone());
        }
        k += 1;
    }
    Ok(Trajectory {
        records,
        final_state: state,
        states,
    })
}

/// `max |ũ - ũ_exact|` against the soliton family at the state's time, in
/// physical coordinates, over every node.
pub fn manufactured_error(state: &FlowState) -> Result<f64> {
    let fam = SolitonFamily::new(state.t())?;
    let u = state.physical_u_tilde();
    let radii = state.physical_radii();
    let mut worst: f64 = 0.0;
    for (k, (u, r)) in u.iter().zip(radii).enumerate() {
        if !state.grid().is_active(k) {
            continue;
        }
        worst = worst.max((u - fam.log_factor(r)?).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConformalState;
    use crate::grid::Grid;

    fn cigar(n: usize) -> FlowState {
        let grid = Grid::radial(n, 8.0).unwrap();
        let m = ConformalState::over_cigar(grid, vec![0.0; n], 0.0).unwrap();
        FlowState::from_initial_metric(&m).unwrap()
    }

    #[test]
    fn records_land_on_interval_multiples() {
        let plan = RunPlan {
            t_end: 0.25,
            record_interval: 0.1,
            ..RunPlan::default()
        };
        let traj = run(cigar(33), &plan, |_, _| Ok(())).unwrap();
        let times: Vec<f64> = traj.records.iter().map(|r| r.t).collect();
        assert_eq!(times.len(), 4);
        assert_eq!(times[1], 0.1);
        assert_eq!(times[2], 0.2);
        assert_eq!(times[3], 0.25);
    }

    #[test]
    fn next_record_index_after_resume() {
        assert_eq!(next_record_index(0.0, 0.1), 1);
        assert_eq!(next_record_index(0.5, 0.1), 6);
        assert_eq!(next_record_index(0.55, 0.1), 6);
    }

    #[test]
    fn soliton_error_is_second_order() {
        let mut errs = Vec::new();
        for n in [65, 129] {
            let plan = RunPlan {
                t_end: 0.2,
                record_interval: 0.2,
                ..RunPlan::default()
            };
            let traj = run(cigar(n), &plan, |_, _| Ok(())).unwrap();
            errs.push(manufactured_error(&traj.final_state).unwrap());
        }
        let order = (errs[0] / errs[1]).log2();
        assert!((1.8..=2.2).contains(&order), "{errs:?} order {order}");
    }

    #[test]
    fn renormalised_soliton_stays_on_the_family() {
        let plan = RunPlan {
            t_end: 0.5,
            record_interval: 0.25,
            renormalize: Some(0.5),
            ..RunPlan::default()
        };
        let traj = run(cigar(129), &plan, |_, _| Ok(())).unwrap();
        assert!(traj.final_state.frame_scale() > 0.0);
        assert!(manufactured_error(&traj.final_state).unwrap() < 1e-2);
        assert!(traj.records.iter().all(|r| r.w_drift < 1e-10));
    }

    #[test]
    fn unstable_safety_aborts_with_record() {
        let plan = RunPlan {
            t_end: 1.0,
            record_interval: 0.01,
            safety: 4.0,
            ..RunPlan::default()
        };
        match run(cigar(65), &plan, |_, _| Ok(())) {
            Err(FlowError::Instability { last_record, .. }) => assert!(last_record.is_some()),
            other => panic!(
                "expected instability, got {:?}",
                other.map(|t| t.records.len())
            ),
        }
    }
}
