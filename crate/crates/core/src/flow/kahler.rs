//! Kähler cross-check: `φ(t) = -∫₀^t f dτ` and the density
//! `ρ(t) = ρ(0) + c·Δ_E φ(t)`, compared with the evolved `e^{ũ}`.

use crate::error::{FlowError, Result};
use crate::geometry::{background_laplacian, Background, OuterBc};

use super::FlowState;

/// `c` in the reconstruction. The complex Hessian `∂∂̄ = Δ/4` cancels the
/// factor 4 of the potential equation, leaving 1; [`calibrate_kahler_scale`]
/// recovers it from a soliton trajectory.
pub const KAHLER_SCALE: f64 = 1.0;

fn check_history(history: &[FlowState]) -> Result<()> {
    let first = history
        .first()
        .ok_or_else(|| FlowError::History("empty trajectory".into()))?;
    for pair in history.windows(2) {
        if pair[1].grid() != first.grid() {
            return Err(FlowError::History("trajectory changes grid".into()));
        }
        if pair[1].frame_scale() != first.frame_scale() {
            return Err(FlowError::History(
                "trajectory was rescaled; run without renormalisation".into(),
            ));
        }
        if pair[1].t() <= pair[0].t() {
            return Err(FlowError::History("times must increase".into()));
        }
    }
    Ok(())
}

/// `(Δ_E φ(t_end), e^{ũ(t_end)} - e^{ũ(t_0)})` from the trapezoid rule.
fn increments(history: &[FlowState]) -> Result<(Vec<f64>, Vec<f64>)> {
    check_history(history)?;
    let first = &history[0];
    let last = history.last().expect("checked non-empty");
    let n = first.grid().len();
    let mut phi = vec![0.0; n];
    let mut phi_slope = 0.0;
    for pair in history.windows(2) {
        let dt = pair[1].t() - pair[0].t();
        for (k, p) in phi.iter_mut().enumerate() {
            *p -= 0.5 * dt * (pair[0].potential()[k] + pair[1].potential()[k]);
        }
        phi_slope -= 0.5 * dt * (pair[0].potential_slope + pair[1].potential_slope);
    }
    let lap = background_laplacian(
        &phi,
        first.grid(),
        Background::Euclidean,
        OuterBc::Slope(phi_slope),
    )?;
    let drho = last
        .u_tilde()
        .iter()
        .zip(first.u_tilde())
        .map(|(b, a)| b.exp() - a.exp())
        .collect();
    Ok((lap, drho))
}

/// `max |ρ(t_0) + c·Δ_E φ - e^{ũ}|` at the final state, over active nodes.
pub fn kahler_cross_check(history: &[FlowState]) -> Result<f64> {
    let (lap, drho) = increments(history)?;
    let grid = history[0].grid();
    Ok(grid
        .active_indices()
        .map(|k| (KAHLER_SCALE * lap[k] - drho[k]).abs())
        .fold(0.0, f64::max))
}

/// Least-squares `c` with `c·Δ_E φ ≈ Δρ` over the trajectory's active nodes.
pub fn calibrate_kahler_scale(history: &[FlowState]) -> Result<f64> {
    let (lap, drho) = increments(history)?;
    let grid = history[0].grid();
    let (num, den) = grid.active_indices().fold((0.0, 0.0), |(n, d), k| {
        (n + lap[k] * drho[k], d + lap[k] * lap[k])
    });
    if den == 0.0 {
        return Err(FlowError::History("trajectory does not move".into()));
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::stepper::step;
    use crate::geometry::ConformalState;
    use crate::grid::Grid;

    fn soliton_history(n: usize, dt: f64, steps: usize) -> Vec<FlowState> {
        let grid = Grid::radial(n, 8.0).unwrap();
        let m = ConformalState::over_cigar(grid, vec![0.0; n], 0.0).unwrap();
        let mut hist = vec![FlowState::from_initial_metric(&m).unwrap()];
        for _ in 0..steps {
            let next = step(hist.last().unwrap(), dt).unwrap();
            hist.push(next);
        }
        hist
    }

    #[test]
    fn zero_at_start() {
        let h = soliton_history(33, 1e-3, 0);
        assert_eq!(kahler_cross_check(&h).unwrap(), 0.0);
    }

    #[test]
    fn calibrated_scale_is_one() {
        let h = soliton_history(65, 2e-3, 50);
        let c = calibrate_kahler_scale(&h).unwrap();
        assert!((c - 1.0).abs() < 1e-4, "{c}");
    }

    #[test]
    fn residual_quarters_with_dt() {
        let a = kahler_cross_check(&soliton_history(65, 2e-3, 50)).unwrap();
        let b = kahler_cross_check(&soliton_history(65, 1e-3, 100)).unwrap();
        assert!(a > 0.0 && (a / b - 4.0).abs() < 0.4, "{a} {b}");
    }

    #[test]
    fn empty_history_is_an_error() {
        assert!(kahler_cross_check(&[]).is_err());
    }
}
