//! Background Laplacians `Δ_{g₀}` for `g₀ ∈ {g_E, g_c}`.
//!
//! Radial grids use a finite-volume form of the cigar operator
//! `Δ_{g_c} φ = (1/tanh s) ∂_s(tanh s ∂_s φ)` with exact cigar cell areas,
//! so the discrete operator is symmetric in the area-weighted inner product
//! and `Σ m_i (Δφ)_i` telescopes to the far-field flux. The tip row is the
//! control volume around s = 0 (limit `2 ∂²_s` as s → 0). The Euclidean radial
//! Laplacian is `w₀ Δ_{g_c}` with `w₀ = cosh⁻² s`.

use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};
use crate::grid::{Grid, GridKind, RadialCells};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Background {
    /// Flat plane `g_E`.
    Euclidean,
    /// Static cigar `g_c = w₀ g_E`.
    Cigar,
}

/// Far-field (s = S_max) condition for radial operators. Ignored on
/// cartesian grids, whose boundary rows are Dirichlet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OuterBc {
    /// Prescribed `∂_s φ` at `S_max`.
    Slope(f64),
    /// Slope from the second-order one-sided difference of the field itself.
    Extrapolate,
}

impl OuterBc {
    pub(crate) fn resolve(self, field: &[f64], h: f64) -> f64 {
        match self {
            OuterBc::Slope(v) => v,
            OuterBc::Extrapolate => extrapolated_slope(field, h),
        }
    }
}

/// `(3φ_{n-1} - 4φ_{n-2} + φ_{n-3}) / 2h`
pub fn extrapolated_slope(field: &[f64], h: f64) -> f64 {
    let n = field.len();
    (3.0 * field[n - 1] - 4.0 * field[n - 2] + field[n - 3]) / (2.0 * h)
}

pub(crate) fn cigar_radial(field: &[f64], cells: &RadialCells, h: f64, slope: f64) -> Vec<f64> {
    let n = field.len();
    let flux: Vec<f64> = (0..n - 1)
        .map(|i| cells.face[i] * (field[i + 1] - field[i]) / h)
        .collect();
    (0..n)
        .map(|i| {
            let inward = if i == 0 { 0.0 } else { flux[i - 1] };
            let outward = if i == n - 1 {
                cells.outer_face * slope
            } else {
                flux[i]
            };
            (outward - inward) / cells.measure[i]
        })
        .collect()
}

/// Five-point Euclidean Laplacian; zero on boundary rows.
pub(crate) fn euclidean_cartesian(field: &[f64], grid: &Grid) -> Vec<f64> {
    let n = grid.nodes_per_axis();
    let inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
    let mut out = vec![0.0; field.len()];
    for j in 1..n - 1 {
        for i in 1..n - 1 {
            let k = j * n + i;
            out[k] = (field[k - 1] + field[k + 1] + field[k - n] + field[k + n] - 4.0 * field[k])
                * inv_h2;
        }
    }
    out
}

/// `Δ_{g₀} field` on the grid.
pub fn background_laplacian(
    field: &[f64],
    grid: &Grid,
    background: Background,
    bc: OuterBc,
) -> Result<Vec<f64>> {
    if field.len() < 3 {
        return Err(FlowError::Grid(format!(
            "Laplacian needs at least 3 nodes, got {}",
            field.len()
        )));
    }
    grid.check_field("laplacian input", field)?;
    let out = match grid.kind() {
        GridKind::Radial => {
            let cells = grid.cells();
            let slope = bc.resolve(field, grid.spacing());
            let mut lap = cigar_radial(field, cells, grid.spacing(), slope);
            if background == Background::Euclidean {
                lap.iter_mut().zip(&cells.w0).for_each(|(v, w)| *v *= w);
            }
            lap
        }
        GridKind::Cartesian => {
            let mut lap = euclidean_cartesian(field, grid);
            if background == Background::Cigar {
                for (k, v) in lap.iter_mut().enumerate() {
                    let p = grid.point(k);
                    *v *= 1.0 + p[0] * p[0] + p[1] * p[1];
                }
            }
            lap
        }
    };
    Ok(out)
}
