//! Ricci potential of the initial metric: solve `Δ_{g(0)} f = R(0)`.

use crate::analytics::cigar_potential;
use crate::error::{FlowError, Result};
use crate::grid::{Grid, GridKind};

use super::laplacian::euclidean_cartesian;
use super::{metric_laplacian, ConformalState, OuterBc};

/// Maximum allowed `‖Δ_g f - R‖_∞` after a solve.
pub const POTENTIAL_RESIDUAL_TOL: f64 = 1e-10;

/// A potential field with its far-field Neumann data (radial grids; zero on
/// cartesian grids, which carry Dirichlet data instead).
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    pub values: Vec<f64>,
    pub outer_slope: f64,
}

impl Potential {
    pub fn bc(&self) -> OuterBc {
        OuterBc::Slope(self.outer_slope)
    }

    /// `‖Δ_g f - R‖_∞` over active nodes.
    pub fn residual(&self, state: &ConformalState) -> Result<f64> {
        let lap = metric_laplacian(&self.values, state, self.bc())?;
        Ok(super::max_abs_diff(state.grid(), &lap, state.curvature()))
    }
}

/// Solves for `f(0)` with the gauge `f(0)(origin) = 0`.
///
/// Radial grids integrate the flux balance `tanh s f'(s) = ∫₀^s u R tanh σ dσ`
/// cell by cell, which is the exact discrete inverse of the finite-volume
/// operator. Cartesian grids run conjugate gradients on the five-point
/// operator with `f = f₀` on the boundary.
pub fn solve_initial_potential(state: &ConformalState) -> Result<Potential> {
    crate::error::ensure_finite("initial curvature", state.curvature())?;
    let potential = match state.grid().kind() {
        GridKind::Radial => radial_potential(state),
        GridKind::Cartesian => cartesian_potential(state)?,
    };
    crate::error::ensure_finite("initial potential", &potential.values)?;
    let res = potential.residual(state)?;
    if !(res <= POTENTIAL_RESIDUAL_TOL) {
        return Err(FlowError::Solve(format!(
            "potential residual {res:e} exceeds {POTENTIAL_RESIDUAL_TOL:e}"
        )));
    }
    Ok(potential)
}

fn radial_potential(state: &ConformalState) -> Potential {
    let grid = state.grid();
    let cells = grid.cells();
    let h = grid.spacing();
    let source: Vec<f64> = state
        .density_vs_cigar()
        .iter()
        .zip(state.curvature())
        .map(|(u, r)| u * r)
        .collect();
    let n = source.len();
    let mut f = vec![0.0; n];
    let mut enclosed = 0.0;
    for i in 0..n - 1 {
        enclosed += cells.measure[i] * source[i];
        f[i + 1] = f[i] + h * enclosed / cells.face[i];
    }
    enclosed += cells.measure[n - 1] * source[n - 1];
    Potential {
        values: f,
        outer_slope: enclosed / cells.outer_face,
    }
}

fn cartesian_potential(state: &ConformalState) -> Result<Potential> {
    let grid = state.grid();
    let radii = grid.radii();
    let ut = state.euclidean_log_factor();
    let mut f = vec![0.0; grid.len()];
    for k in 0..grid.len() {
        if !grid.is_active(k) {
            f[k] = cigar_potential(radii[k])?;
        }
    }
    // Δ_E f = e^{ũ} R on the interior
    let rhs: Vec<f64> = (0..grid.len())
        .map(|k| {
            if grid.is_active(k) {
                ut[k].exp() * state.curvature()[k]
            } else {
                0.0
            }
        })
        .collect();
    let weight: Vec<f64> = ut.iter().map(|u| (-u).exp()).collect();
    conjugate_gradient(grid, &mut f, &rhs, &weight)?;
    let pin = f[grid.origin()];
    f.iter_mut().for_each(|v| *v -= pin);
    Ok(Potential {
        values: f,
        outer_slope: 0.0,
    })
}

fn masked_residual(grid: &Grid, f: &[f64], rhs: &[f64]) -> Vec<f64> {
    let lap = euclidean_cartesian(f, grid);
    (0..grid.len())
        .map(|k| {
            if grid.is_active(k) {
                rhs[k] - lap[k]
            } else {
                0.0
            }
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// CG on `-Δ_E` (SPD with Dirichlet rows eliminated). Stops once the
/// metric residual `max e^{-ũ}|Δ_E f - rhs|` is well below the tolerance.
fn conjugate_gradient(grid: &Grid, f: &mut [f64], rhs: &[f64], weight: &[f64]) -> Result<()> {
    let target = 0.05 * POTENTIAL_RESIDUAL_TOL;
    let metric_res = |r: &[f64]| {
        r.iter()
            .zip(weight)
            .map(|(x, w)| (x * w).abs())
            .fold(0.0, f64::max)
    };
    let max_iter = 20 * grid.len();
    // residual of -Δ x = -rhs is  -rhs + Δx = -(rhs - Δx)
    let mut r: Vec<f64> = masked_residual(grid, f, rhs).iter().map(|v| -v).collect();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let mut best = f64::INFINITY;
    for iter in 0..max_iter {
        if iter % 25 == 0 {
            let true_res = masked_residual(grid, f, rhs);
            let m = metric_res(&true_res);
            if m <= target {
                return Ok(());
            }
            // stagnation at round-off: stop and let the caller's check decide
            if iter > 0 && m >= 0.9 * best && m < POTENTIAL_RESIDUAL_TOL {
                return Ok(());
            }
            best = best.min(m);
            r = true_res.iter().map(|v| -v).collect();
            rr = dot(&r, &r);
            p = r.clone();
        }
        if rr == 0.0 {
            return Ok(());
        }
        // A p with A = -Δ restricted to the interior
        let ap: Vec<f64> = euclidean_cartesian(&p, grid)
            .iter()
            .enumerate()
            .map(|(k, v)| if grid.is_active(k) { -v } else { 0.0 })
            .collect();
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(FlowError::Solve(format!("CG breakdown (pᵀAp = {pap:e})")));
        }
        let alpha = rr / pap;
        for k in 0..f.len() {
            if grid.is_active(k) {
                f[k] += alpha * p[k];
                r[k] -= alpha * ap[k];
            }
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for k in 0..p.len() {
            p[k] = r[k] + beta * p[k];
        }
    }
    let m = metric_res(&masked_residual(grid, f, rhs));
    if m <= POTENTIAL_RESIDUAL_TOL {
        Ok(())
    } else {
        Err(FlowError::Solve(format!(
            "CG did not converge in {max_iter} iterations (residual {m:e})"
        )))
    }
}
