//! Invariant suite run against one scenario.

use crate::error::Result;
use crate::flow::{manufactured_error, run, FlowState, RunPlan, Trajectory};
use crate::geometry::ConformalState;
use crate::grid::{Grid, GridKind};

use super::check::{all_passed, Check};
use super::config::{InitialSpec, ScenarioConfig};
use super::scenario::build_scenario;

/// Horizon of the calibration run against the exact soliton.
pub const CALIBRATION_T: f64 = 0.5;
/// Slack for `sup ũ(t) ≤ sup ũ(0)`.
pub const SUP_U_TOL: f64 = 1e-8;
/// Slack per unit time for `sup h` being non-increasing.
pub const SUP_H_RATE_TOL: f64 = 1e-8;

/// Error levels of the exact-soliton run at a given resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    /// `max |ũ - ũ_exact|` at `CALIBRATION_T`; the O(h²) scale of the
    /// resolution.
    pub manufactured_error: f64,
    /// `‖Δ_g f - R‖_∞` at `CALIBRATION_T`.
    pub poisson_residual: f64,
}

/// Runs the exact cigar (the t = 0 soliton) on a radial grid with `n` nodes.
pub fn calibrate(n: usize, s_max: f64, safety: f64) -> Result<Calibration> {
    let grid = Grid::radial(n, s_max)?;
    let m = ConformalState::over_cigar(grid, vec![0.0; n], 0.0)?;
    let plan = RunPlan {
        t_end: CALIBRATION_T,
        record_interval: CALIBRATION_T,
        safety,
        ..RunPlan::default()
    };
    let traj = run(FlowState::from_initial_metric(&m)?, &plan, |_, _| Ok(()))?;
    let last = traj.records.last().expect("run records the end");
    Ok(Calibration {
        manufactured_error: manufactured_error(&traj.final_state)?,
        poisson_residual: last.res_poisson,
    })
}

pub fn calibration_for(config: &ScenarioConfig) -> Result<Calibration> {
    let s_max = match config.grid.kind {
        GridKind::Radial => config.grid.s_max.unwrap_or(8.0),
        GridKind::Cartesian => 8.0,
    };
    calibrate(config.grid.n, s_max, config.stepping.safety.min(0.9))
}

/// Invariant checks over a finished trajectory.
pub fn trajectory_checks(
    traj: &Trajectory,
    initial_sup_u: f64,
    calibration: &Calibration,
    flat: bool,
) -> Vec<Check> {
    let recs = &traj.records;
    let first = &recs[0];
    let last = recs.last().expect("non-empty trajectory");
    let mut checks = vec![
        Check::flag("all diagnostics finite", recs.iter().all(|r| r.is_finite())),
        Check::at_most("initial Poisson residual", first.res_poisson, 1e-10),
        Check::at_most(
            "w drift vs 5x manufactured error",
            recs.iter().map(|r| r.w_drift).fold(0.0, f64::max),
            5.0 * calibration.manufactured_error,
        ),
        Check::at_most(
            "sup u_tilde(t) - sup u_tilde(0)",
            recs.iter()
                .map(|r| r.sup_u_tilde)
                .fold(f64::NEG_INFINITY, f64::max)
                - initial_sup_u,
            SUP_U_TOL,
        ),
        Check::at_most(
            "sup h increase per unit time",
            recs.windows(2)
                .map(|w| (w[1].sup_h - w[0].sup_h) / (w[1].t - w[0].t))
                .fold(f64::NEG_INFINITY, f64::max)
                .max(0.0),
            SUP_H_RATE_TOL,
        ),
        Check::at_most(
            "final Poisson residual",
            last.res_poisson,
            10.0 * first.res_poisson + calibration.manufactured_error,
        ),
    ];
    if flat {
        let sup_r = recs
            .iter()
            .map(|r| r.sup_r.abs().max(r.inf_r.abs()))
            .fold(0.0, f64::max);
        checks.push(Check::at_most(
            "flat data stay flat (sup |R|)",
            sup_r,
            1e-12,
        ));
    }
    checks
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub calibration: Calibration,
    pub trajectory: Trajectory,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        all_passed(&self.checks)
    }
}

pub fn verify(config: &ScenarioConfig) -> Result<VerifyReport> {
    let scenario = build_scenario(config)?;
    let sup_u0 = scenario.state.initial().sup_u_tilde;
    let mut checks = Vec::new();
    if let Some(h) = &scenario.hypothesis {
        checks.push(Check::flag(
            "hypothesis values finite",
            h.sup_log_u0.is_finite()
                && h.sup_grad_log_u0.is_finite()
                && h.sup_potential_gap.is_finite(),
        ));
    }
    let calibration = calibration_for(config)?;
    let trajectory = run(scenario.state, &config.plan(), |_, _| Ok(()))?;
    let flat = matches!(config.initial, InitialSpec::Flat { .. });
    checks.extend(trajectory_checks(&trajectory, sup_u0, &calibration, flat));
    Ok(VerifyReport {
        checks,
        calibration,
        trajectory,
    })
}
