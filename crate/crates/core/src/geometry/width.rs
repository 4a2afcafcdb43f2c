//! Width and circumference-at-infinity estimators using the radial proper
//! function `F = |x|`. The width of `F` is an upper bound for the width of
//! the metric; the tail mean of level lengths estimates `C∞` for metrics that
//! are radial near infinity.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::analytics::arc_length;
use crate::error::{FlowError, Result};
use crate::grid::GridKind;

use super::ConformalState;

/// Quadrature points on a circle for cartesian level lengths.
const CIRCLE_SAMPLES: usize = 512;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthReport {
    /// Level values `c` (Euclidean radii in the state's coordinates).
    pub levels: Vec<f64>,
    /// `L(F = c)` in the metric `g`.
    pub lengths: Vec<f64>,
    /// `max_c L(c)`, an upper bound for `w(g)`.
    pub width_bound: f64,
    /// Mean of `L` over the outermost 5% of levels.
    pub circumference_estimate: f64,
    /// False while lengths still grow by more than 1% across the outermost 10%.
    pub bounded: bool,
}

/// Length of the circle `|x| = c` in the metric of `state`.
pub fn level_length(state: &ConformalState, c: f64) -> Result<f64> {
    if !(c.is_finite() && c >= 0.0) {
        return Err(FlowError::Domain(format!(
            "level must be non-negative, got {c}"
        )));
    }
    let grid = state.grid();
    let ut = state.euclidean_log_factor();
    match grid.kind() {
        GridKind::Radial => {
            let s = arc_length(c)?;
            let s_max = grid.extent();
            if s > s_max * (1.0 + 1e-14) {
                return Err(FlowError::OutsideGrid {
                    point: c,
                    extent: s_max.sinh(),
                });
            }
            let h = grid.spacing();
            let n = grid.nodes_per_axis();
            let j = ((s / h).floor() as usize).min(n - 2);
            let frac = (s - j as f64 * h) / h;
            let u = ut[j] * (1.0 - frac) + ut[j + 1] * frac;
            Ok(2.0 * PI * c * (0.5 * u).exp())
        }
        GridKind::Cartesian => {
            let l = grid.extent();
            if c > l {
                return Err(FlowError::OutsideGrid {
                    point: c,
                    extent: l,
                });
            }
            let n = grid.nodes_per_axis();
            let h = grid.spacing();
            let sample = |x: f64, y: f64| {
                let fx = ((x + l) / h).clamp(0.0, (n - 1) as f64);
                let fy = ((y + l) / h).clamp(0.0, (n - 1) as f64);
                let i = (fx.floor() as usize).min(n - 2);
                let j = (fy.floor() as usize).min(n - 2);
                let (ax, ay) = (fx - i as f64, fy - j as f64);
                let at = |ii: usize, jj: usize| ut[jj * n + ii];
                (1.0 - ax) * (1.0 - ay) * at(i, j)
                    + ax * (1.0 - ay) * at(i + 1, j)
                    + (1.0 - ax) * ay * at(i, j + 1)
                    + ax * ay * at(i + 1, j + 1)
            };
            let dtheta = 2.0 * PI / CIRCLE_SAMPLES as f64;
            let total: f64 = (0..CIRCLE_SAMPLES)
                .map(|k| {
                    let th = k as f64 * dtheta;
                    (0.5 * sample(c * th.cos(), c * th.sin())).exp()
                })
                .sum();
            Ok(c * total * dtheta)
        }
    }
}

fn level_radii(state: &ConformalState) -> Vec<f64> {
    let grid = state.grid();
    match grid.kind() {
        GridKind::Radial => grid.radii(),
        GridKind::Cartesian => {
            let half = grid.nodes_per_axis() / 2;
            (0..=half).map(|k| k as f64 * grid.spacing()).collect()
        }
    }
}

pub fn width_report(state: &ConformalState) -> Result<WidthReport> {
    let levels = level_radii(state);
    let lengths = match state.grid().kind() {
        // exact at nodes: no interpolation needed
        GridKind::Radial => levels
            .iter()
            .zip(state.euclidean_log_factor())
            .map(|(&r, u)| 2.0 * PI * r * (0.5 * u).exp())
            .collect(),
        GridKind::Cartesian => levels
            .iter()
            .map(|&c| level_length(state, c))
            .collect::<Result<Vec<_>>>()?,
    };
    let n = lengths.len();
    let width_bound = lengths.iter().copied().fold(0.0, f64::max);
    let tail5 = ((n as f64 * 0.05).ceil() as usize).max(1);
    let circumference_estimate = lengths[n - tail5..].iter().sum::<f64>() / tail5 as f64;
    let tail10 = ((n as f64 * 0.10).ceil() as usize).max(2);
    let outer = &lengths[n - tail10..];
    let increasing = outer.windows(2).all(|w| w[1] > w[0]);
    let growth = (outer[outer.len() - 1] - outer[0]) / outer[0].max(f64::MIN_POSITIVE);
    let bounded = !(increasing && growth > 0.01);
    Ok(WidthReport {
        levels,
        lengths,
        width_bound,
        circumference_estimate,
        bounded,
    })
}
