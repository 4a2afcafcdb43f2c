use crate::analytics::{arc_length, cigar_potential};
use crate::error::{FlowError, Result};
use crate::flow::FlowState;
use crate::geometry::ConformalState;
use crate::grid::{Grid, GridKind};

use super::config::{InitialSpec, ScenarioConfig};

/// Tail slope of `ln u₀` (per unit `s`) above which the initial data are
/// treated as unbounded against the cigar.
pub const TAIL_SLOPE_LIMIT: f64 = 1e-3;

/// Numerical values behind the admissibility hypotheses on `u₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    /// `sup |ln u₀|`.
    pub sup_log_u0: f64,
    /// `sup |d ln u₀|_{g(0)}`.
    pub sup_grad_log_u0: f64,
    /// `sup |f₀ - f(0)|` on the grid.
    pub sup_potential_gap: f64,
    /// `∂_s ln u₀` at the far end of the grid.
    pub tail_slope: f64,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub state: FlowState,
    /// `None` for flat data, which are exempt.
    pub hypothesis: Option<HypothesisReport>,
}

fn bump(amplitude: f64, center: f64, width: f64) -> impl Fn(f64) -> f64 {
    let scale = 8.0 * center * center * width * width;
    move |s: f64| {
        let q = s * s - center * center;
        amplitude * (-(q * q) / scale).exp()
    }
}

fn table(points: Vec<[f64; 2]>) -> impl Fn(f64) -> f64 {
    move |s: f64| {
        let j = points
            .windows(2)
            .position(|w| s <= w[1][0])
            .unwrap_or(points.len() - 2);
        let (a, b) = (points[j], points[j + 1]);
        a[1] + (b[1] - a[1]) * (s - a[0]) / (b[0] - a[0])
    }
}

/// `ln u₀` as a function of the cigar arc length.
fn log_u0_profile(spec: &InitialSpec) -> Option<Box<dyn Fn(f64) -> f64>> {
    match spec.clone() {
        InitialSpec::ExactCigar => Some(Box::new(|_| 0.0)),
        InitialSpec::ScaledCigar { lambda } => Some(Box::new(move |_| lambda.ln())),
        InitialSpec::PerturbedCigar {
            amplitude,
            center,
            width,
        } => Some(Box::new(bump(amplitude, center, width))),
        InitialSpec::Custom { points } => Some(Box::new(table(points))),
        InitialSpec::Flat { .. } => None,
    }
}

fn centered_slope(f: &dyn Fn(f64) -> f64, s: f64) -> f64 {
    let d = 1e-4;
    (f(s + d) - f((s - d).max(0.0))) / (s + d - (s - d).max(0.0))
}

/// Farthest arc length covered by the grid.
fn far_arc_length(grid: &Grid) -> Result<f64> {
    match grid.kind() {
        GridKind::Radial => Ok(grid.extent()),
        GridKind::Cartesian => arc_length(grid.extent() * std::f64::consts::SQRT_2),
    }
}

fn initial_metric(grid: &Grid, spec: &InitialSpec) -> Result<ConformalState> {
    let profile = match log_u0_profile(spec) {
        Some(p) => p,
        None => {
            let InitialSpec::Flat { log_factor } = spec else {
                unreachable!("only flat data lack a cigar profile")
            };
            return ConformalState::euclidean(grid.clone(), vec![*log_factor; grid.len()], 0.0);
        }
    };
    let s: Vec<f64> = match grid.kind() {
        GridKind::Radial => grid.arc_lengths().to_vec(),
        GridKind::Cartesian => grid
            .radii()
            .into_iter()
            .map(arc_length)
            .collect::<Result<_>>()?,
    };
    let log_u: Vec<f64> = s.iter().map(|&s| profile(s)).collect();
    let slope = centered_slope(profile.as_ref(), grid.extent());
    let slope = if grid.kind() == GridKind::Radial {
        slope
    } else {
        0.0
    };
    ConformalState::over_cigar(grid.clone(), log_u, slope)
}

fn hypothesis_report(state: &FlowState, spec: &InitialSpec) -> Result<Option<HypothesisReport>> {
    let Some(profile) = log_u0_profile(spec) else {
        return Ok(None);
    };
    let grid = state.grid();
    let log_u0 = &state.initial().log_u0;
    let sup_log_u0 = log_u0.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let ut = state.u_tilde();
    let radii = grid.radii();
    let s: Vec<f64> = radii
        .iter()
        .map(|&r| arc_length(r))
        .collect::<Result<_>>()?;
    // |dφ|_E = |φ_s| / cosh s, then the conformal factor e^{-ũ/2}
    let sup_grad_log_u0 = s
        .iter()
        .zip(ut)
        .map(|(&s, &u)| (-0.5 * u).exp() * centered_slope(profile.as_ref(), s).abs() / s.cosh())
        .fold(0.0, f64::max);
    let f0 = state.initial().potential.iter().zip(&radii);
    let mut sup_potential_gap: f64 = 0.0;
    for (k, (f, &r)) in f0.enumerate() {
        if grid.is_active(k) || grid.kind() == GridKind::Radial {
            sup_potential_gap = sup_potential_gap.max((cigar_potential(r)? - f).abs());
        }
    }
    let tail_slope = centered_slope(profile.as_ref(), far_arc_length(grid)?);
    Ok(Some(HypothesisReport {
        sup_log_u0,
        sup_grad_log_u0,
        sup_potential_gap,
        tail_slope,
    }))
}

/// Builds the t = 0 state of a scenario and checks that `u₀` is a bounded
/// perturbation of the cigar.
pub fn build_scenario(config: &ScenarioConfig) -> Result<Scenario> {
    config.validate()?;
    let grid = config.build_grid()?;
    let metric = initial_metric(&grid, &config.initial)?;
    let state = FlowState::from_initial_metric(&metric)?;
    let hypothesis = hypothesis_report(&state, &config.initial)?;
    if let Some(h) = &hypothesis {
        let values = [h.sup_log_u0, h.sup_grad_log_u0, h.sup_potential_gap];
        if values.iter().any(|v| !v.is_finite()) {
            return Err(FlowError::Hypothesis(format!(
                "initial data are not a bounded perturbation of the cigar: {h:?}"
            )));
        }
        if h.tail_slope.abs() > TAIL_SLOPE_LIMIT {
            return Err(FlowError::Hypothesis(format!(
                "ln u0 still grows at the far end (slope {:.3e} per unit s), so \
                 sup|f0 - f(0)| = {:.3e} is not bounded as the grid grows",
                h.tail_slope, h.sup_potential_gap
            )));
        }
    }
    Ok(Scenario { state, hypothesis })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(initial: &str, n: usize) -> ScenarioConfig {
        ScenarioConfig::from_toml_str(&format!(
            "name = \"t\"\n[grid]\nkind = \"radial\"\nn = {n}\ns_max = 8.0\n\
             [initial]\n{initial}\n[stepping]\nt_end = 0.1\nrecord_interval = 0.05\n"
        ))
        .unwrap()
    }

    #[test]
    fn exact_cigar_has_zero_w() {
        let sc = build_scenario(&config("kind = \"exact_cigar\"", 129)).unwrap();
        assert!(sc.state.initial().conserved.iter().all(|w| w.abs() < 1e-12));
        let h = sc.hypothesis.unwrap();
        assert_eq!(h.sup_log_u0, 0.0);
        assert!(h.sup_potential_gap < 1e-12);
    }

    #[test]
    fn scaled_cigar_w_is_log_two() {
        let sc = build_scenario(&config("kind = \"scaled_cigar\"\nlambda = 2.0", 129)).unwrap();
        let l2 = 2f64.ln();
        assert!(sc
            .state
            .initial()
            .conserved
            .iter()
            .all(|w| (w - l2).abs() < 1e-12));
    }

    #[test]
    fn perturbed_cigar_peaks_at_amplitude() {
        let sc = build_scenario(&config(
            "kind = \"perturbed_cigar\"\namplitude = 0.3\ncenter = 2.0\nwidth = 0.5",
            129,
        ))
        .unwrap();
        let h = sc.hypothesis.unwrap();
        // s = 2 is a node at N = 129
        assert!((h.sup_log_u0 - 0.3).abs() < 1e-15);
        assert!(h.sup_grad_log_u0.is_finite() && h.sup_grad_log_u0 > 0.0);
        assert!((h.sup_potential_gap - 0.3 * (1.0 - (-2f64).exp())).abs() < 1e-9);
        assert!(sc.state.initial().poisson_residual <= 1e-10);
    }

    #[test]
    fn bump_is_a_gaussian_near_its_center() {
        let b = bump(1.0, 2.0, 0.5);
        for ds in [-0.05, 0.02, 0.05] {
            let g = (-(ds * ds) / (2.0 * 0.25f64)).exp();
            assert!((b(2.0 + ds) - g).abs() < 0.02 * g);
        }
        assert!((b(0.0) - (-2f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn unbounded_custom_tail_is_rejected() {
        let err = build_scenario(&config(
            "kind = \"custom\"\npoints = [[0.0, 0.0], [1.0, 0.5]]",
            65,
        ))
        .unwrap_err();
        assert!(matches!(err, FlowError::Hypothesis(_)), "{err}");
        let ok = build_scenario(&config(
            "kind = \"custom\"\npoints = [[0.0, 0.2], [1.0, 0.1], [2.0, 0.0], [8.0, 0.0]]",
            65,
        ));
        assert!(ok.is_ok());
    }

    #[test]
    fn flat_is_exempt() {
        let sc = build_scenario(&config("kind = \"flat\"", 65)).unwrap();
        assert!(sc.hypothesis.is_none());
        assert!(sc.state.curvature().iter().all(|&r| r == 0.0));
    }
}
