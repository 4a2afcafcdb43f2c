//! Refinement studies on `N`, `2N-1`, `4N-3` nodes (h, h/2, h/4), with the
//! step refined through the CFL limit.

use std::thread;

use crate::error::{FlowError, Result};
use crate::flow::{manufactured_error, normalize, run, FlowState};
use crate::grid::GridKind;

use super::config::{InitialSpec, ScenarioConfig};
use super::scenario::build_scenario;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub nodes: [usize; 3],
    /// Errors against the exact soliton, or successive differences for a
    /// self-convergence study.
    pub errors: Vec<f64>,
    pub orders: Vec<f64>,
    pub exact: bool,
}

impl ConvergenceReport {
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let kind = if self.exact {
            "error vs exact soliton"
        } else {
            "self-convergence difference"
        };
        s.push_str(&format!("quantity: u_tilde, {kind}\n"));
        if self.exact {
            for (n, e) in self.nodes.iter().zip(&self.errors) {
                s.push_str(&format!("N = {n:5}  error = {e:.6e}\n"));
            }
        } else {
            for (w, e) in self.nodes.windows(2).zip(&self.errors) {
                s.push_str(&format!("N = {:5} vs {:5}  diff = {e:.6e}\n", w[0], w[1]));
            }
        }
        for o in &self.orders {
            s.push_str(&format!("observed order = {o:.4}\n"));
        }
        s
    }
}

fn final_state(config: ScenarioConfig) -> Result<FlowState> {
    let sc = build_scenario(&config)?;
    Ok(run(sc.state, &config.plan(), |_, _| Ok(()))?.final_state)
}

/// Frame-free profile on the coarse nodes: the normalised log factor
/// (radial) or `ũ` itself (cartesian, never rescaled).
fn profile(state: &FlowState, stride: usize) -> Result<Vec<f64>> {
    let values = match state.grid().kind() {
        GridKind::Radial => normalize(state)?.log_factor().to_vec(),
        GridKind::Cartesian => state.u_tilde().to_vec(),
    };
    Ok(match state.grid().kind() {
        GridKind::Radial => values.iter().step_by(stride).copied().collect(),
        GridKind::Cartesian => {
            let n = state.grid().nodes_per_axis();
            (0..n)
                .step_by(stride)
                .flat_map(|j| (0..n).step_by(stride).map(move |i| (j, i)))
                .map(|(j, i)| values[j * n + i])
                .collect()
        }
    })
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn converge(config: &ScenarioConfig) -> Result<ConvergenceReport> {
    config.validate()?;
    let n = config.grid.n;
    let nodes = [n, 2 * n - 1, 4 * n - 3];
    let states: Vec<Result<FlowState>> = thread::scope(|scope| {
        let handles: Vec<_> = nodes
            .iter()
            .map(|&m| {
                let cfg = config.with_nodes(m);
                scope.spawn(move || final_state(cfg))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .unwrap_or_else(|_| Err(FlowError::History("refinement run panicked".into())))
            })
            .collect()
    });
    let states = states.into_iter().collect::<Result<Vec<_>>>()?;
    let exact =
        matches!(config.initial, InitialSpec::ExactCigar) && config.grid.kind == GridKind::Radial;
    let errors = if exact {
        states
            .iter()
            .map(manufactured_error)
            .collect::<Result<Vec<_>>>()?
    } else {
        let p: Vec<Vec<f64>> = states
            .iter()
            .zip([1, 2, 4])
            .map(|(s, stride)| profile(s, stride))
            .collect::<Result<_>>()?;
        vec![max_diff(&p[0], &p[1]), max_diff(&p[1], &p[2])]
    };
    let orders = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    Ok(ConvergenceReport {
        nodes,
        errors,
        orders,
        exact,
    })
}
