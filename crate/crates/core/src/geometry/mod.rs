//! Conformal metrics on a grid and the discrete geometry built on them.

mod laplacian;
mod potential;
mod width;

pub use laplacian::{background_laplacian, extrapolated_slope, Background, OuterBc};
pub use potential::{solve_initial_potential, Potential};
pub use width::{level_length, width_report, WidthReport};

use crate::analytics::{cigar_scalar_curvature, cigar_scalar_curvature_s, ln_cosh};
use crate::error::{FlowError, Result};
use crate::grid::{Grid, GridKind};

/// `ln w₀` at every node: `-2 ln cosh s` (radial) or `-ln(1+r²)` (cartesian).
pub fn log_cigar_density(grid: &Grid) -> Vec<f64> {
    match grid.kind() {
        GridKind::Radial => grid
            .arc_lengths()
            .iter()
            .map(|&s| -2.0 * ln_cosh(s))
            .collect(),
        GridKind::Cartesian => grid.radii().iter().map(|&r| -(r * r).ln_1p()).collect(),
    }
}

fn background_curvature(grid: &Grid, background: Background) -> Vec<f64> {
    match (background, grid.kind()) {
        (Background::Euclidean, _) => vec![0.0; grid.len()],
        (Background::Cigar, GridKind::Radial) => grid
            .arc_lengths()
            .iter()
            .map(|&s| cigar_scalar_curvature_s(s))
            .collect(),
        (Background::Cigar, GridKind::Cartesian) => grid
            .radii()
            .iter()
            .map(|&r| cigar_scalar_curvature(r).expect("grid radii are finite"))
            .collect(),
    }
}

/// A metric `g = e^{logfactor} g₀` with its scalar curvature cached.
///
/// Over `g_E` the log factor is `ũ`; over `g_c` it is `ln u`. Since
/// `ln w₀ = -f₀`, switching backgrounds is `ũ = ln u - f₀`. On radial grids
/// `outer_slope` is the Neumann data `∂_s logfactor` at `S_max`.
#[derive(Debug, Clone)]
pub struct ConformalState {
    grid: Grid,
    background: Background,
    log_factor: Vec<f64>,
    outer_slope: f64,
    curvature: Vec<f64>,
}

impl ConformalState {
    pub fn new(
        grid: Grid,
        background: Background,
        log_factor: Vec<f64>,
        outer_slope: f64,
    ) -> Result<Self> {
        grid.check_field("log factor", &log_factor)?;
        if !outer_slope.is_finite() {
            return Err(FlowError::NonFinite {
                field: "outer slope",
                index: 0,
            });
        }
        let mut state = Self {
            grid,
            background,
            log_factor,
            outer_slope,
            curvature: Vec::new(),
        };
        state.curvature = state.compute_curvature()?;
        Ok(state)
    }

    pub fn euclidean(grid: Grid, u_tilde: Vec<f64>, outer_slope: f64) -> Result<Self> {
        Self::new(grid, Background::Euclidean, u_tilde, outer_slope)
    }

    pub fn over_cigar(grid: Grid, log_u: Vec<f64>, outer_slope: f64) -> Result<Self> {
        Self::new(grid, Background::Cigar, log_u, outer_slope)
    }

    fn compute_curvature(&self) -> Result<Vec<f64>> {
        let lap = background_laplacian(
            &self.log_factor,
            &self.grid,
            self.background,
            OuterBc::Slope(self.outer_slope),
        )?;
        let r0 = background_curvature(&self.grid, self.background);
        let r: Vec<f64> = self
            .log_factor
            .iter()
            .zip(lap)
            .zip(r0)
            .map(|((lf, l), r0)| (-lf).exp() * (r0 - l))
            .collect();
        crate::error::ensure_finite("scalar curvature", &r)?;
        Ok(r)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn background(&self) -> Background {
        self.background
    }

    pub fn log_factor(&self) -> &[f64] {
        &self.log_factor
    }

    pub fn outer_slope(&self) -> f64 {
        self.outer_slope
    }

    pub fn curvature(&self) -> &[f64] {
        &self.curvature
    }

    pub fn gauss_curvature(&self) -> Vec<f64> {
        self.curvature.iter().map(|r| 0.5 * r).collect()
    }

    /// Density of `g` against the Euclidean coordinate measure, `e^{ũ}`.
    pub fn area_density(&self) -> Vec<f64> {
        self.euclidean_log_factor()
            .iter()
            .map(|v| v.exp())
            .collect()
    }

    /// Density of `g` against `g_c` (the `u` of `g = u g_c`).
    pub(crate) fn density_vs_cigar(&self) -> Vec<f64> {
        match self.background {
            Background::Cigar => self.log_factor.iter().map(|v| v.exp()).collect(),
            Background::Euclidean => self
                .log_factor
                .iter()
                .zip(log_cigar_density(&self.grid))
                .map(|(u, lw)| (u - lw).exp())
                .collect(),
        }
    }

    /// `ũ` regardless of the stored background.
    pub fn euclidean_log_factor(&self) -> Vec<f64> {
        match self.background {
            Background::Euclidean => self.log_factor.clone(),
            Background::Cigar => self
                .log_factor
                .iter()
                .zip(log_cigar_density(&self.grid))
                .map(|(lu, lw)| lu + lw)
                .collect(),
        }
    }

    fn far_cigar_slope(&self) -> f64 {
        match self.grid.kind() {
            GridKind::Radial => -2.0 * self.grid.extent().tanh(),
            GridKind::Cartesian => 0.0,
        }
    }

    pub fn to_euclidean(&self) -> Result<Self> {
        match self.background {
            Background::Euclidean => Ok(self.clone()),
            Background::Cigar => Self::euclidean(
                self.grid.clone(),
                self.euclidean_log_factor(),
                self.outer_slope + self.far_cigar_slope(),
            ),
        }
    }

    pub fn to_cigar(&self) -> Result<Self> {
        match self.background {
            Background::Cigar => Ok(self.clone()),
            Background::Euclidean => {
                let log_u = self
                    .log_factor
                    .iter()
                    .zip(log_cigar_density(&self.grid))
                    .map(|(u, lw)| u - lw)
                    .collect();
                Self::over_cigar(
                    self.grid.clone(),
                    log_u,
                    self.outer_slope - self.far_cigar_slope(),
                )
            }
        }
    }
}

/// `R = u⁻¹(-Δ_{g₀} ln u + R₀)`, as cached on the state.
pub fn scalar_curvature(state: &ConformalState) -> Vec<f64> {
    state.curvature.clone()
}

/// `Δ_g field = e^{-logfactor} Δ_{g₀} field`.
pub fn metric_laplacian(field: &[f64], state: &ConformalState, bc: OuterBc) -> Result<Vec<f64>> {
    let lap = background_laplacian(field, &state.grid, state.background, bc)?;
    Ok(lap
        .into_iter()
        .zip(&state.log_factor)
        .map(|(l, lf)| (-lf).exp() * l)
        .collect())
}

/// Max of `|a - b|` over the active nodes of `grid`.
pub(crate) fn max_abs_diff(grid: &Grid, a: &[f64], b: &[f64]) -> f64 {
    grid.active_indices()
        .map(|k| (a[k] - b[k]).abs())
        .fold(0.0, f64::max)
}
