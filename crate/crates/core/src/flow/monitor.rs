use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};
use crate::geometry::{max_abs_diff, metric_laplacian, width_report, OuterBc};
use crate::grid::GridKind;

use super::normalize::{cigar_profile_distance, DEFAULT_REPORT_WINDOW};
use super::stepper::{adaptive_dt, rk4};
use super::FlowState;

/// Safety factor of the probe steps behind `res_curv_evo`.
const PROBE_SAFETY: f64 = 0.25;

/// Scalar monitors of one instant. The first twelve fields are the CSV
/// columns, in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub dt: f64,
    pub sup_r: f64,
    pub inf_r: f64,
    /// `sup ũ` in physical coordinates.
    pub sup_u_tilde: f64,
    /// `sup |∇ũ|²_g`.
    pub sup_grad_sq: f64,
    /// `max |w(·,t) - w(·,0)|`.
    pub w_drift: f64,
    pub sup_h: f64,
    pub width_bound: f64,
    pub cinf_est: f64,
    /// `‖Δ_g f - R‖_∞`.
    pub res_poisson: f64,
    /// `‖R_t - Δ_g R - R²‖_∞` from a probe triple.
    pub res_curv_evo: f64,
    pub bounded: bool,
    /// `|v(origin) + ∫₀^t R(origin)|`.
    pub v_consistency: f64,
    pub cigar_distance: Option<f64>,
    pub frame_scale: f64,
}

impl DiagnosticsRecord {
    pub fn is_finite(&self) -> bool {
        [
            self.t,
            self.dt,
            self.sup_r,
            self.inf_r,
            self.sup_u_tilde,
            self.sup_grad_sq,
            self.w_drift,
            self.sup_h,
            self.width_bound,
            self.cinf_est,
            self.res_poisson,
            self.res_curv_evo,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

fn sup(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(f64::NEG_INFINITY, f64::max)
}

/// `‖Δ_g f - R‖_∞` over active nodes.
pub fn poisson_residual(state: &FlowState) -> Result<f64> {
    let lap = metric_laplacian(state.potential(), state.conformal(), state.potential_bc())?;
    Ok(max_abs_diff(state.grid(), &lap, state.curvature()))
}

/// `e^{-ũ}|dũ|²_E` at every node (zero on Dirichlet rows).
pub fn gradient_norm_sq(state: &FlowState) -> Vec<f64> {
    let grid = state.grid();
    let u = state.u_tilde();
    let h = grid.spacing();
    match grid.kind() {
        GridKind::Radial => {
            let n = u.len();
            let s = grid.arc_lengths();
            (0..n)
                .map(|i| {
                    let du = if i == 0 {
                        0.0
                    } else if i == n - 1 {
                        state.conformal().outer_slope()
                    } else {
                        (u[i + 1] - u[i - 1]) / (2.0 * h)
                    };
                    let dr = du / s[i].cosh();
                    (-u[i]).exp() * dr * dr
                })
                .collect()
        }
        GridKind::Cartesian => {
            let n = grid.nodes_per_axis();
            (0..u.len())
                .map(|k| {
                    if !grid.is_active(k) {
                        return 0.0;
                    }
                    let dx = (u[k + 1] - u[k - 1]) / (2.0 * h);
                    let dy = (u[k + n] - u[k - n]) / (2.0 * h);
                    (-u[k]).exp() * (dx * dx + dy * dy)
                })
                .collect()
        }
    }
}

/// Centered-difference residual of `R_t = Δ_g R + R²` at the middle state of
/// a uniformly spaced triple. `Δ_g R` uses a zero far-field slope, the
/// condition inherited by `R` from a fixed `ũ` slope.
pub fn curvature_evolution_residual(history: [&FlowState; 3]) -> Result<Vec<f64>> {
    let [a, b, c] = history;
    if a.grid() != b.grid() || b.grid() != c.grid() {
        return Err(FlowError::History("states live on different grids".into()));
    }
    if a.frame_scale() != b.frame_scale() || b.frame_scale() != c.frame_scale() {
        return Err(FlowError::History("states live in different frames".into()));
    }
    let d1 = b.t() - a.t();
    let d2 = c.t() - b.t();
    if !(d1 > 0.0 && d2 > 0.0) || (d1 - d2).abs() > 1e-9 * d1.max(d2) {
        return Err(FlowError::History(format!(
            "triple is not uniformly spaced in time ({d1:e}, {d2:e})"
        )));
    }
    let dt = 0.5 * (d1 + d2);
    let r = b.curvature();
    let lap = metric_laplacian(r, b.conformal(), OuterBc::Slope(0.0))?;
    let grid = b.grid();
    Ok((0..r.len())
        .map(|k| {
            if !grid.is_active(k) {
                return 0.0;
            }
            (c.curvature()[k] - a.curvature()[k]) / (2.0 * dt) - lap[k] - r[k] * r[k]
        })
        .collect())
}

fn probe_curvature_residual(state: &FlowState) -> Result<f64> {
    let delta = adaptive_dt(state, PROBE_SAFETY)?.min(1e-3);
    let b = rk4(state, delta)?;
    let c = rk4(&b, delta)?;
    let res = curvature_evolution_residual([state, &b, &c])?;
    Ok(res.into_iter().map(f64::abs).fold(0.0, f64::max))
}

/// Computes every monitored quantity for `state`.
pub fn monitor(state: &FlowState) -> Result<DiagnosticsRecord> {
    let grid = state.grid();
    let r = state.curvature();
    let active = || grid.active_indices();
    let sup_r = sup(active().map(|k| r[k]));
    let inf_r = -sup(active().map(|k| -r[k]));
    let sup_u_tilde = sup(state.physical_u_tilde().into_iter());
    let grad = gradient_norm_sq(state);
    let sup_grad_sq = sup(active().map(|k| grad[k]));
    let w = state.w();
    let w_drift = max_abs_diff(grid, &w, &state.initial().conserved);
    let h = state.h();
    let sup_h = sup(h.into_iter());
    let widths = width_report(state.conformal())?;
    let v_origin = state.v()[grid.origin()];
    let cigar_distance = match grid.kind() {
        GridKind::Radial => Some(cigar_profile_distance(state, DEFAULT_REPORT_WINDOW)?),
        GridKind::Cartesian => None,
    };
    Ok(DiagnosticsRecord {
        t: state.t(),
        dt: state.last_dt(),
        sup_r,
        inf_r,
        sup_u_tilde,
        sup_grad_sq,
        w_drift,
        sup_h,
        width_bound: widths.width_bound,
        cinf_est: widths.circumference_estimate,
        res_poisson: poisson_residual(state)?,
        res_curv_evo: probe_curvature_residual(state)?,
        bounded: widths.bounded,
        v_consistency: (v_origin + state.origin_curvature_integral()).abs(),
        cigar_distance,
        frame_scale: state.frame_scale(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::SolitonFamily;
    use crate::geometry::ConformalState;
    use crate::grid::Grid;

    fn cigar_state(n: usize) -> FlowState {
        let grid = Grid::radial(n, 8.0).unwrap();
        let m = ConformalState::over_cigar(grid, vec![0.0; n], 0.0).unwrap();
        FlowState::from_initial_metric(&m).unwrap()
    }

    fn soliton_at(n: usize, t: f64) -> FlowState {
        let mut st = cigar_state(n);
        let fam = SolitonFamily::new(t).unwrap();
        let u: Vec<f64> = st
            .grid()
            .radii()
            .iter()
            .map(|&r| fam.log_factor(r).unwrap())
            .collect();
        st.conformal =
            ConformalState::euclidean(st.grid().clone(), u, fam.log_factor_slope_s(8.0).unwrap())
                .unwrap();
        st.t = t;
        st
    }

    #[test]
    fn cigar_initial_record() {
        let rec = monitor(&cigar_state(129)).unwrap();
        assert!((rec.sup_r - 4.0).abs() < 1e-2);
        assert!(rec.sup_u_tilde.abs() < 1e-15);
        assert!(rec.w_drift < 1e-12);
        assert!(rec.res_poisson < 1e-10);
        assert!(rec.bounded);
        assert!((rec.width_bound - 2.0 * std::f64::consts::PI).abs() < 0.002 * 6.3);
        assert!(rec.is_finite());
        assert!(rec.cigar_distance.unwrap() < 1e-15);
    }

    #[test]
    fn flat_residual_vanishes() {
        let grid = Grid::cartesian(33, 2.0).unwrap();
        let m = ConformalState::euclidean(grid, vec![0.3; 33 * 33], 0.0).unwrap();
        let st = FlowState::from_initial_metric(&m).unwrap();
        let b = rk4(&st, 1e-3).unwrap();
        let c = rk4(&b, 1e-3).unwrap();
        let res = curvature_evolution_residual([&st, &b, &c]).unwrap();
        assert!(res.iter().all(|v| v.abs() < 1e-13));
        assert!(!monitor(&st).unwrap().bounded);
    }

    #[test]
    fn exact_soliton_triple_refines_away_from_the_tip() {
        // sampled exact fields: consistent except in the first cells, where
        // the discrete Laplacian of the discrete curvature is O(1) off
        let mut errs = Vec::new();
        for (n, dt) in [(257, 1e-3), (513, 5e-4)] {
            let t = 0.2;
            let triple = [
                soliton_at(n, t - dt),
                soliton_at(n, t),
                soliton_at(n, t + dt),
            ];
            let res = curvature_evolution_residual([&triple[0], &triple[1], &triple[2]]).unwrap();
            let s = triple[1].grid().arc_lengths();
            errs.push(
                res.iter()
                    .zip(s)
                    .filter(|(_, &s)| s >= 0.5)
                    .map(|(v, _)| v.abs())
                    .fold(0.0, f64::max),
            );
        }
        assert!(errs[0] <= 1e-2, "{errs:?}");
        let ratio = errs[0] / errs[1];
        assert!(ratio > 3.4 && ratio < 4.6, "{errs:?}");
    }

    #[test]
    fn solver_triple_satisfies_the_evolution_equation() {
        let mut errs = Vec::new();
        for (n, dt) in [(129, 1e-3), (257, 5e-4)] {
            let mut st = cigar_state(n);
            while st.t() < 0.2 - 1e-12 {
                let dt = adaptive_dt(&st, 0.9).unwrap().min(0.2 - st.t());
                st = rk4(&st, dt).unwrap();
            }
            let b = rk4(&st, dt).unwrap();
            let c = rk4(&b, dt).unwrap();
            let res = curvature_evolution_residual([&st, &b, &c]).unwrap();
            errs.push(res.iter().map(|v| v.abs()).fold(0.0, f64::max));
        }
        assert!(errs[0] <= 1e-2, "{errs:?}");
        let ratio = errs[0] / errs[1];
        assert!(ratio > 3.4 && ratio < 4.6, "{errs:?}");
    }

    #[test]
    fn rejects_uneven_triple() {
        let a = soliton_at(65, 0.0);
        let b = soliton_at(65, 0.1);
        let c = soliton_at(65, 0.3);
        assert!(curvature_evolution_residual([&a, &b, &c]).is_err());
        let other = soliton_at(33, 0.2);
        assert!(curvature_evolution_residual([&a, &b, &other]).is_err());
    }
}
