//! The normalising dilation `Φ(t)(a) = e^{-ũ(0,t)/2} a`.
//!
//! Pulling `g = e^{ũ}|dx|²` back by `x = μa` gives the log factor
//! `ũ(μa) + 2 ln μ`; with `μ = e^{-ũ(0)/2}` the pulled-back factor vanishes at
//! the origin. Radial data are resampled with four-point interpolation in `s`.
//! Points beyond `S_max` continue the solver's far-field condition: the
//! cigar-relative quantities (`ũ + f₀`, `f - f₀`, `w`, `ln u₀`) are held
//! constant, i.e. the end is continued as the cigar's cylinder.
//!
//! The evolving fields are taken relative to the cigar in frame coordinates,
//! which the frame keeps smooth at the tip. The frozen `t = 0` fields live on
//! the physical scale and are taken relative to the physical cigar.

use crate::analytics::{arc_length, cigar_log_factor_s, cigar_potential};
use crate::error::{FlowError, Result};
use crate::geometry::ConformalState;
use crate::grid::{Grid, GridKind};
use crate::interp::cubic_even;

use super::FlowState;

/// Radius of the comparison window for [`cigar_profile_distance`].
pub const DEFAULT_REPORT_WINDOW: f64 = 4.0;

struct Resampler<'a> {
    grid: &'a Grid,
    /// Arc-length of `μ a` for every node `a`.
    sources: Vec<f64>,
    /// `f₀` at every node and at its source point, in frame coordinates.
    frame_old: Vec<f64>,
    frame_src: Vec<f64>,
    /// The same at the physical locations.
    phys_old: Vec<f64>,
    phys_src: Vec<f64>,
}

impl<'a> Resampler<'a> {
    fn new(grid: &'a Grid, scale: f64, mu: f64) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(FlowError::Domain(format!(
                "dilation factor must be positive, got {mu}"
            )));
        }
        let k = scale.exp();
        let radii = grid.radii();
        let f0 = |c: f64| {
            radii
                .iter()
                .map(|&r| cigar_potential(c * r))
                .collect::<Result<Vec<_>>>()
        };
        let sources = radii
            .iter()
            .map(|&r| arc_length(mu * r))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            grid,
            sources,
            frame_old: f0(1.0)?,
            frame_src: f0(mu)?,
            phys_old: f0(k)?,
            phys_src: f0(k * mu)?,
        })
    }

    fn flat(&self, values: &[f64]) -> Vec<f64> {
        let h = self.grid.spacing();
        self.sources
            .iter()
            .map(|&s| cubic_even(values, h, s))
            .collect()
    }

    /// Resamples `values - sign·f₀` and restores `sign·f₀` at the source point.
    fn relative(&self, values: &[f64], sign: f64, old: &[f64], src: &[f64]) -> Vec<f64> {
        let q: Vec<f64> = values
            .iter()
            .zip(old)
            .map(|(v, f0)| v - sign * f0)
            .collect();
        self.flat(&q)
            .into_iter()
            .zip(src)
            .map(|(q, f0)| q + sign * f0)
            .collect()
    }

    fn frame_relative(&self, values: &[f64], sign: f64) -> Vec<f64> {
        self.relative(values, sign, &self.frame_old, &self.frame_src)
    }

    fn physical_relative(&self, values: &[f64], sign: f64) -> Vec<f64> {
        self.relative(values, sign, &self.phys_old, &self.phys_src)
    }

    /// `ũ_frame(μa) + 2 ln μ`.
    fn log_factor(&self, u_frame: &[f64], mu: f64) -> Vec<f64> {
        self.frame_relative(u_frame, -1.0)
            .into_iter()
            .map(|u| u + 2.0 * mu.ln())
            .collect()
    }
}

impl FlowState {
    /// Applies the dilation `a ↦ μa` to every field and moves the frame scale
    /// by `ln μ`. The flow commutes with this map, so stepping can continue
    /// in the new frame.
    pub fn rescaled(&self, mu: f64) -> Result<FlowState> {
        if self.grid().kind() != GridKind::Radial {
            return Err(FlowError::Grid(
                "frame rescaling needs a radial grid".into(),
            ));
        }
        let rs = Resampler::new(self.grid(), self.frame_scale, mu)?;
        let u_new = rs.log_factor(self.u_tilde(), mu);
        let potential = rs.frame_relative(&self.potential, 1.0);
        let mut initial = self.initial.clone();
        initial.potential = rs.physical_relative(&self.initial.potential, 1.0);
        initial.conserved = rs.flat(&self.initial.conserved);
        initial.log_u0 = rs.flat(&self.initial.log_u0);
        Ok(FlowState {
            conformal: ConformalState::euclidean(
                self.grid().clone(),
                u_new,
                self.conformal.outer_slope(),
            )?,
            potential,
            potential_slope: self.potential_slope,
            t: self.t,
            frame_scale: self.frame_scale + mu.ln(),
            initial,
            origin_curvature_integral: self.origin_curvature_integral,
            steps: self.steps,
            last_dt: self.last_dt,
        })
    }
}

/// `μ = e^{-ũ(origin)/2}` in the current frame.
pub fn normalizing_factor(state: &FlowState) -> f64 {
    (-0.5 * state.u_tilde()[state.grid().origin()]).exp()
}

/// The pulled-back metric `Φ(t)* g(t)`, Euclidean gauge, with `ǔ(origin) = 0`.
pub fn normalize(state: &FlowState) -> Result<ConformalState> {
    let mu = normalizing_factor(state);
    match state.grid().kind() {
        GridKind::Radial => {
            let rs = Resampler::new(state.grid(), state.frame_scale, mu)?;
            let mut u = rs.log_factor(state.u_tilde(), mu);
            // the origin maps to itself; pin it exactly
            u[0] = 0.0;
            ConformalState::euclidean(state.grid().clone(), u, state.conformal.outer_slope())
        }
        GridKind::Cartesian => normalize_cartesian(state, mu),
    }
}

fn normalize_cartesian(state: &FlowState, mu: f64) -> Result<ConformalState> {
    let grid = state.grid();
    let n = grid.nodes_per_axis();
    let l = grid.extent();
    let h = grid.spacing();
    let u = state.u_tilde();
    let mut out = vec![0.0; grid.len()];
    for (k, slot) in out.iter_mut().enumerate() {
        let p = grid.point(k);
        let (x, y) = (mu * p[0], mu * p[1]);
        if x.abs() > l * (1.0 + 1e-12) || y.abs() > l * (1.0 + 1e-12) {
            return Err(FlowError::OutsideGrid {
                point: x.abs().max(y.abs()),
                extent: l,
            });
        }
        let fx = ((x + l) / h).clamp(0.0, (n - 1) as f64);
        let fy = ((y + l) / h).clamp(0.0, (n - 1) as f64);
        let i = (fx.floor() as usize).min(n - 2);
        let j = (fy.floor() as usize).min(n - 2);
        let (ax, ay) = (fx - i as f64, fy - j as f64);
        let at = |ii: usize, jj: usize| u[jj * n + ii];
        *slot = (1.0 - ax) * (1.0 - ay) * at(i, j)
            + ax * (1.0 - ay) * at(i + 1, j)
            + (1.0 - ax) * ay * at(i, j + 1)
            + ax * ay * at(i + 1, j + 1)
            + 2.0 * mu.ln();
    }
    out[grid.origin()] = 0.0;
    ConformalState::euclidean(grid.clone(), out, 0.0)
}

/// `max_{s ≤ window} |ǔ_normalized(s) - ũ_cigar(s)|` on a radial grid.
pub fn cigar_profile_distance(state: &FlowState, window: f64) -> Result<f64> {
    if state.grid().kind() != GridKind::Radial {
        return Err(FlowError::Grid(
            "profile distance is defined on radial grids".into(),
        ));
    }
    let normalized = normalize(state)?;
    let window = window.min(state.grid().extent());
    Ok(state
        .grid()
        .arc_lengths()
        .iter()
        .zip(normalized.log_factor())
        .filter(|(&s, _)| s <= window + 1e-12)
        .map(|(&s, &u)| (u - cigar_log_factor_s(s)).abs())
        .fold(0.0, f64::max))
}
