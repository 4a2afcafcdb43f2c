//! Explicit RK4 for the coupled system `ũ_t = e^{-ũ} Δ_E ũ = -R`,
//! `f_t = Δ_g f`, both driven by the same metric at each stage.

use crate::error::{FlowError, Result};
use crate::geometry::{metric_laplacian, ConformalState, OuterBc};
use crate::grid::GridKind;

use super::FlowState;

/// Allowed growth of `sup ũ` over its initial value before a step is
/// declared unstable.
pub const SUP_GROWTH_TOL: f64 = 1e-6;

/// `∂_t ũ = -R`, zero on Dirichlet nodes.
pub fn flow_rhs(state: &FlowState) -> Vec<f64> {
    let grid = state.grid();
    state
        .curvature()
        .iter()
        .enumerate()
        .map(|(k, r)| if grid.is_active(k) { -r } else { 0.0 })
        .collect()
}

/// The same right-hand side written as `e^{-ũ} Δ_E ũ`.
pub fn flow_rhs_laplacian_form(state: &FlowState) -> Result<Vec<f64>> {
    let c = state.conformal();
    metric_laplacian(c.log_factor(), c, OuterBc::Slope(c.outer_slope()))
}

/// Stage derivatives of `(ũ, f)`; also returns the stage metric.
fn stage(
    template: &ConformalState,
    u: Vec<f64>,
    f: &[f64],
    f_bc: OuterBc,
) -> Result<(ConformalState, Vec<f64>, Vec<f64>)> {
    let cs = ConformalState::euclidean(template.grid().clone(), u, template.outer_slope())?;
    let grid = cs.grid();
    let ku: Vec<f64> = cs
        .curvature()
        .iter()
        .enumerate()
        .map(|(k, r)| if grid.is_active(k) { -r } else { 0.0 })
        .collect();
    let kf = metric_laplacian(f, &cs, f_bc)?;
    Ok((cs, ku, kf))
}

fn axpy(base: &[f64], a: f64, k: &[f64]) -> Vec<f64> {
    base.iter().zip(k).map(|(b, k)| b + a * k).collect()
}

/// One classical RK4 step without the stability checks of [`step`].
pub(crate) fn rk4(state: &FlowState, dt: f64) -> Result<FlowState> {
    let f_bc = state.potential_bc();
    let u0 = state.u_tilde();
    let f0 = &state.potential;
    let c = &state.conformal;
    let (_, k1u, k1f) = stage(c, u0.to_vec(), f0, f_bc)?;
    let (_, k2u, k2f) = stage(c, axpy(u0, 0.5 * dt, &k1u), &axpy(f0, 0.5 * dt, &k1f), f_bc)?;
    let (_, k3u, k3f) = stage(c, axpy(u0, 0.5 * dt, &k2u), &axpy(f0, 0.5 * dt, &k2f), f_bc)?;
    let (_, k4u, k4f) = stage(c, axpy(u0, dt, &k3u), &axpy(f0, dt, &k3f), f_bc)?;
    let combine = |y: &[f64], k1: &[f64], k2: &[f64], k3: &[f64], k4: &[f64]| -> Vec<f64> {
        (0..y.len())
            .map(|i| y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect()
    };
    let u1 = combine(u0, &k1u, &k2u, &k3u, &k4u);
    let f1 = combine(f0, &k1f, &k2f, &k3f, &k4f);
    let conformal = ConformalState::euclidean(c.grid().clone(), u1, c.outer_slope())?;
    let origin = conformal.grid().origin();
    let trapezoid = 0.5 * dt * (state.curvature()[origin] + conformal.curvature()[origin]);
    Ok(FlowState {
        conformal,
        potential: f1,
        potential_slope: state.potential_slope,
        t: state.t + dt,
        frame_scale: state.frame_scale,
        initial: state.initial.clone(),
        origin_curvature_integral: state.origin_curvature_integral + trapezoid,
        steps: state.steps + 1,
        last_dt: dt,
    })
}

/// Advances `(ũ, f)` by `dt` and enforces the maximum principle
/// `sup ũ(t) ≤ sup ũ(0)` as a blow-up detector.
pub fn step(state: &FlowState, dt: f64) -> Result<FlowState> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(FlowError::DegenerateStep(format!(
            "dt must be positive, got {dt}"
        )));
    }
    let next = rk4(state, dt).map_err(|e| match e {
        FlowError::NonFinite { field, index } => FlowError::Instability {
            t: state.t + dt,
            reason: format!("non-finite {field} at node {index}"),
            last_record: None,
        },
        other => other,
    })?;
    if let Some(k) = next.potential.iter().position(|v| !v.is_finite()) {
        return Err(FlowError::Instability {
            t: next.t,
            reason: format!("non-finite potential at node {k}"),
            last_record: None,
        });
    }
    let sup = next
        .physical_u_tilde()
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    let bound = next.initial.sup_u_tilde + SUP_GROWTH_TOL;
    if sup > bound {
        return Err(FlowError::Instability {
            t: next.t,
            reason: format!("sup ũ = {sup} exceeds its initial bound {bound}"),
            last_record: None,
        });
    }
    Ok(next)
}

/// Largest diffusivity of the stepped equation in grid coordinates:
/// `e^{-ũ} w₀` (radial, in s) or `e^{-ũ}` (cartesian).
fn max_diffusivity(state: &FlowState) -> f64 {
    let grid = state.grid();
    let u = state.u_tilde();
    match grid.kind() {
        GridKind::Radial => u
            .iter()
            .zip(&grid.cells().w0)
            .map(|(u, w)| (-u).exp() * w)
            .fold(0.0, f64::max),
        GridKind::Cartesian => grid
            .active_indices()
            .map(|k| (-u[k]).exp())
            .fold(0.0, f64::max),
    }
}

/// `safety · h² / (4 · max diffusivity)`.
pub fn adaptive_dt(state: &FlowState, safety: f64) -> Result<f64> {
    if !(safety.is_finite() && safety > 0.0) {
        return Err(FlowError::DegenerateStep(format!(
            "safety factor must be positive, got {safety}"
        )));
    }
    let d = max_diffusivity(state);
    let h = state.grid().spacing();
    let dt = safety * h * h / (4.0 * d);
    if !d.is_finite() || !(dt.is_finite() && dt > 0.0) {
        return Err(FlowError::DegenerateStep(format!(
            "diffusivity {d:e} gives no usable step; rescale the frame (normalize) first"
        )));
    }
    Ok(dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::SolitonFamily;
    use crate::geometry::ConformalState;
    use crate::grid::Grid;

    fn soliton_state(n: usize) -> FlowState {
        let grid = Grid::radial(n, 8.0).unwrap();
        let m = ConformalState::over_cigar(grid, vec![0.0; n], 0.0).unwrap();
        FlowState::from_initial_metric(&m).unwrap()
    }

    #[test]
    fn flat_state_is_stationary() {
        let grid = Grid::cartesian(33, 2.0).unwrap();
        let m = ConformalState::euclidean(grid, vec![0.7; 33 * 33], 0.0).unwrap();
        let st = FlowState::from_initial_metric(&m).unwrap();
        assert!(flow_rhs(&st).iter().all(|&v| v == 0.0));
        let next = step(&st, 1e-3).unwrap();
        assert_eq!(next.u_tilde(), st.u_tilde());
    }

    #[test]
    fn rhs_forms_agree() {
        let st = soliton_state(129);
        let a = flow_rhs(&st);
        let b = flow_rhs_laplacian_form(&st).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-15 * x.abs().max(1.0));
        }
        assert!((a[0] + 4.0).abs() < 1e-2);
    }

    #[test]
    fn one_small_step_from_the_soliton() {
        let st = soliton_state(257);
        let dt = 1e-4;
        let next = step(&st, dt).unwrap();
        let exact = SolitonFamily::new(dt).unwrap().log_factor(0.0).unwrap();
        assert!((exact + 4e-4).abs() < 1e-11);
        // Taylor prediction from the semi-discrete rates: ũ_t = -R and
        // ũ_tt = -R_t = -(Δ_g R + R²), with R_t taken from the discrete operator
        let r0 = st.curvature()[0];
        let lap_r = metric_laplacian(st.curvature(), st.conformal(), OuterBc::Slope(0.0)).unwrap();
        let r_t = lap_r[0] + r0 * r0;
        let predicted = st.u_tilde()[0] - dt * r0 - 0.5 * dt * dt * r_t;
        // the remainder is the dt³ term of the fast tip transient, about 1.4e-9
        assert!(
            (next.u_tilde()[0] - predicted).abs() < 2e-9,
            "{}",
            next.u_tilde()[0] - predicted
        );
        // R_h(0) = 4(1 - 5h²/24) + O(h⁴) at the tip: the first-order gap to
        // the exact value is dt·5h²/6
        let h = st.grid().spacing();
        let tip_gap = dt * 5.0 * h * h / 6.0;
        assert!(((4.0 - r0) * dt - tip_gap).abs() < 0.05 * tip_gap);
        assert!((next.u_tilde()[0] - exact).abs() <= tip_gap + dt * dt * r_t.abs());
        let df = next.potential()[0] - st.potential()[0];
        assert!((df - 4.0 * dt).abs() < 1e-6, "{df}");
        assert_eq!(next.t(), dt);
        let drift = next
            .w()
            .iter()
            .zip(&st.initial().conserved)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(drift < 1e-12);
    }

    #[test]
    fn adaptive_dt_formula() {
        let grid = Grid::cartesian(21, 1.0).unwrap();
        let m = ConformalState::euclidean(grid.clone(), vec![0.0; 441], 0.0).unwrap();
        let st = FlowState::from_initial_metric(&m).unwrap();
        assert!((adaptive_dt(&st, 0.5).unwrap() - 1.25e-3).abs() < 1e-15);
        let m4 = ConformalState::euclidean(grid, vec![-(4f64.ln()); 441], 0.0).unwrap();
        let st4 = FlowState::from_initial_metric(&m4).unwrap();
        let ratio = adaptive_dt(&st4, 0.5).unwrap() / adaptive_dt(&st, 0.5).unwrap();
        assert!((ratio - 0.25).abs() < 1e-12);
        assert!(adaptive_dt(&st, 0.0).is_err());
        assert!(adaptive_dt(&st, f64::NAN).is_err());
    }

    #[test]
    fn rejects_bad_dt() {
        let st = soliton_state(33);
        assert!(step(&st, 0.0).is_err());
        assert!(step(&st, -1.0).is_err());
    }
}
