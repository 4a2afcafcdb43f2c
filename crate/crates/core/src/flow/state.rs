use crate::analytics::cigar_potential;
use crate::error::{FlowError, Result};
use crate::geometry::{log_cigar_density, solve_initial_potential, ConformalState, OuterBc};
use crate::grid::{Grid, GridKind};

/// Fields frozen at t = 0, carried in the current frame.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialFields {
    /// `f(0)`, pinned to zero at the origin.
    pub potential: Vec<f64>,
    /// `w(·,0) = ln u₀ - f₀ + f(0)`.
    pub conserved: Vec<f64>,
    /// `ln u₀`, the log factor against the cigar.
    pub log_u0: Vec<f64>,
    /// `sup ũ(0)` in physical coordinates.
    pub sup_u_tilde: f64,
    /// `‖Δ_{g(0)} f(0) - R(0)‖_∞`.
    pub poisson_residual: f64,
}

/// One instant of the flow.
///
/// The evolved variable is the Euclidean-gauge log factor `ũ`, stored in a
/// frame dilated by `e^{frame_scale}` against the physical plane: the frame
/// point `a` is the physical point `x = e^{ℓ} a` and
/// `ũ_frame(a) = ũ(x) + 2ℓ`. Ricci flow commutes with dilations, so the
/// frame only changes through [`FlowState::rescaled`].
#[derive(Debug, Clone)]
pub struct FlowState {
    pub(crate) conformal: ConformalState,
    pub(crate) potential: Vec<f64>,
    pub(crate) potential_slope: f64,
    pub(crate) t: f64,
    pub(crate) frame_scale: f64,
    pub(crate) initial: InitialFields,
    /// Trapezoidal `∫₀^t R(origin) dτ`, accumulated step by step.
    pub(crate) origin_curvature_integral: f64,
    pub(crate) steps: u64,
    pub(crate) last_dt: f64,
}

impl FlowState {
    /// Builds the t = 0 state: solves for `f(0)` and freezes `w(·,0)`, `ln u₀`.
    pub fn from_initial_metric(metric: &ConformalState) -> Result<Self> {
        let conformal = metric.to_euclidean()?;
        let potential = solve_initial_potential(&conformal)?;
        let poisson_residual = potential.residual(&conformal)?;
        let ut = conformal.log_factor();
        let log_w0 = log_cigar_density(conformal.grid());
        let log_u0: Vec<f64> = ut.iter().zip(&log_w0).map(|(u, lw)| u - lw).collect();
        // ln u₀ - f₀ + f(0) with ln u₀ - f₀ = ũ
        let conserved: Vec<f64> = ut
            .iter()
            .zip(&potential.values)
            .map(|(u, f)| u + f)
            .collect();
        let sup_u_tilde = ut.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            potential: potential.values.clone(),
            potential_slope: potential.outer_slope,
            t: 0.0,
            frame_scale: 0.0,
            initial: InitialFields {
                potential: potential.values,
                conserved,
                log_u0,
                sup_u_tilde,
                poisson_residual,
            },
            origin_curvature_integral: 0.0,
            steps: 0,
            last_dt: 0.0,
            conformal,
        })
    }

    /// Reassembles a state from stored parts (snapshot loading).
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_parts(
        grid: Grid,
        u_tilde: Vec<f64>,
        u_slope: f64,
        potential: Vec<f64>,
        potential_slope: f64,
        t: f64,
        frame_scale: f64,
        initial: InitialFields,
        origin_curvature_integral: f64,
        steps: u64,
        last_dt: f64,
    ) -> Result<Self> {
        for (name, field) in [
            ("potential", &potential),
            ("initial potential", &initial.potential),
            ("conserved quantity", &initial.conserved),
            ("ln u0", &initial.log_u0),
        ] {
            grid.check_field(name, field)?;
        }
        if grid.kind() == GridKind::Cartesian && frame_scale != 0.0 {
            return Err(FlowError::Grid(
                "cartesian states cannot be rescaled".into(),
            ));
        }
        Ok(Self {
            conformal: ConformalState::euclidean(grid, u_tilde, u_slope)?,
            potential,
            potential_slope,
            t,
            frame_scale,
            initial,
            origin_curvature_integral,
            steps,
            last_dt,
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn grid(&self) -> &Grid {
        self.conformal.grid()
    }

    /// The metric in the current frame, Euclidean gauge.
    pub fn conformal(&self) -> &ConformalState {
        &self.conformal
    }

    /// `ũ` in frame coordinates.
    pub fn u_tilde(&self) -> &[f64] {
        self.conformal.log_factor()
    }

    /// `ũ` at the frame nodes expressed in physical coordinates (`ũ_frame - 2ℓ`).
    pub fn physical_u_tilde(&self) -> Vec<f64> {
        let shift = 2.0 * self.frame_scale;
        self.u_tilde().iter().map(|u| u - shift).collect()
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn potential_bc(&self) -> OuterBc {
        OuterBc::Slope(self.potential_slope)
    }

    pub fn curvature(&self) -> &[f64] {
        self.conformal.curvature()
    }

    pub fn frame_scale(&self) -> f64 {
        self.frame_scale
    }

    pub fn initial(&self) -> &InitialFields {
        &self.initial
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn last_dt(&self) -> f64 {
        self.last_dt
    }

    pub fn origin_curvature_integral(&self) -> f64 {
        self.origin_curvature_integral
    }

    /// Physical Euclidean radius of every frame node.
    pub fn physical_radii(&self) -> Vec<f64> {
        let k = self.frame_scale.exp();
        self.grid().radii().into_iter().map(|r| k * r).collect()
    }

    /// `v = f(0) - f`.
    pub fn v(&self) -> Vec<f64> {
        self.initial
            .potential
            .iter()
            .zip(&self.potential)
            .map(|(a, b)| a - b)
            .collect()
    }

    /// `w = ln u + f - f₀`, which reduces to `ũ + f` in physical coordinates.
    pub fn w(&self) -> Vec<f64> {
        let shift = 2.0 * self.frame_scale;
        self.u_tilde()
            .iter()
            .zip(&self.potential)
            .map(|(u, f)| u - shift + f)
            .collect()
    }

    /// `h = v + ln u₀`.
    pub fn h(&self) -> Vec<f64> {
        self.v()
            .iter()
            .zip(&self.initial.log_u0)
            .map(|(v, l)| v + l)
            .collect()
    }

    /// `ln u = ũ + f₀` at the physical location of each node.
    pub fn log_u(&self) -> Result<Vec<f64>> {
        self.physical_u_tilde()
            .iter()
            .zip(self.physical_radii())
            .map(|(u, r)| Ok(u + cigar_potential(r)?))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConformalState;

    #[test]
    fn cigar_initial_state_has_zero_w_and_v() {
        let grid = Grid::radial(65, 8.0).unwrap();
        let metric = ConformalState::over_cigar(grid, vec![0.0; 65], 0.0).unwrap();
        let st = FlowState::from_initial_metric(&metric).unwrap();
        assert!(st.v().iter().all(|&v| v == 0.0));
        // f(0) = -ũ exactly in the Euclidean gauge, so w vanishes to rounding
        assert!(st.w().iter().all(|w| w.abs() < 1e-12));
        assert!(st.initial().sup_u_tilde.abs() < 1e-15);
        assert!(st.h().iter().all(|h| h.abs() < 1e-13));
    }

    #[test]
    fn scaled_cigar_w_is_log_lambda() {
        let grid = Grid::radial(65, 8.0).unwrap();
        let metric = ConformalState::over_cigar(grid, vec![2f64.ln(); 65], 0.0).unwrap();
        let st = FlowState::from_initial_metric(&metric).unwrap();
        assert!(st.w().iter().all(|w| (w - 2f64.ln()).abs() < 1e-12));
    }
}
