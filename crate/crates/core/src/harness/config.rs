//! Scenario files (TOML). Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};
use crate::flow::{RunPlan, DEFAULT_REPORT_WINDOW};
use crate::grid::{Grid, GridKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    /// Reserved for randomised perturbations; every shipped kind is
    /// deterministic.
    #[serde(default)]
    pub seed: u64,
    pub grid: GridSpec,
    pub initial: InitialSpec,
    pub stepping: SteppingSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub kind: GridKind,
    pub n: usize,
    /// Radial truncation `S_max`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_max: Option<f64>,
    /// Cartesian half width `L`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
}

/// Initial metric `g(0) = u₀ g_c`, described by `ln u₀` as a function of `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    ExactCigar,
    ScaledCigar {
        lambda: f64,
    },
    /// `ln u₀ = A·exp(-(s² - s₀²)² / (8 s₀² σ²))`: a Gaussian of width σ
    /// around `s₀`, even in `s` so that it is smooth at the tip.
    PerturbedCigar {
        amplitude: f64,
        center: f64,
        width: f64,
    },
    /// `g(0) = e^{c} g_E`.
    Flat {
        #[serde(default)]
        log_factor: f64,
    },
    /// `ln u₀` sampled at increasing `s`, linear in between and continued
    /// linearly past the last point.
    Custom {
        points: Vec<[f64; 2]>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteppingSpec {
    #[serde(default = "default_safety")]
    pub safety: f64,
    pub t_end: f64,
    pub record_interval: f64,
    /// Frame renormalisation threshold on `|ũ(origin)|`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub renormalize: Option<f64>,
    /// Fixed step; adaptive when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
}

fn default_safety() -> f64 {
    0.9
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directory: Option<PathBuf>,
    /// Write a snapshot at every record time that is a multiple of this.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_interval: Option<f64>,
    /// Window `|s| ≤ S_report` of the profile distance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report_window: Option<f64>,
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig =
            toml::from_str(text).map_err(|e| FlowError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| FlowError::io(path, e))?;
        Self::from_toml_str(&text)
            .map_err(|e| FlowError::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| FlowError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(FlowError::Config(msg));
        let g = &self.grid;
        let m = g.n.saturating_sub(1);
        if g.n < 17 || !m.is_power_of_two() {
            return bad(format!("grid.n must be 2^k + 1 with k >= 4, got {}", g.n));
        }
        match g.kind {
            GridKind::Radial if g.half_width.is_some() => {
                return bad("half_width applies to cartesian grids".into())
            }
            GridKind::Cartesian if g.s_max.is_some() => {
                return bad("s_max applies to radial grids".into())
            }
            _ => {}
        }
        let positive = |v: f64| v.is_finite() && v > 0.0;
        match &self.initial {
            InitialSpec::ExactCigar => {}
            InitialSpec::ScaledCigar { lambda } => {
                if !positive(*lambda) {
                    return bad(format!("lambda must be positive, got {lambda}"));
                }
            }
            InitialSpec::PerturbedCigar {
                amplitude,
                center,
                width,
            } => {
                if !positive(*amplitude) || !positive(*width) {
                    return bad("perturbed_cigar needs amplitude > 0 and width > 0".into());
                }
                if !(center.is_finite() && *center > 0.0) {
                    return bad(format!("center must be positive, got {center}"));
                }
            }
            InitialSpec::Flat { log_factor } => {
                if !log_factor.is_finite() {
                    return bad("flat log_factor must be finite".into());
                }
            }
            InitialSpec::Custom { points } => {
                if points.len() < 2 {
                    return bad("custom table needs at least two points".into());
                }
                if points[0][0] != 0.0 {
                    return bad("custom table must start at s = 0".into());
                }
                if points
                    .iter()
                    .any(|p| !(p[0].is_finite() && p[1].is_finite()))
                {
                    return bad("custom table contains non-finite values".into());
                }
                if points.windows(2).any(|w| w[1][0] <= w[0][0]) {
                    return bad("custom table abscissae must increase".into());
                }
            }
        }
        let st = &self.stepping;
        if !positive(st.safety) {
            return bad(format!("safety must be positive, got {}", st.safety));
        }
        if !(st.t_end.is_finite() && st.t_end >= 0.0) {
            return bad(format!("t_end must be non-negative, got {}", st.t_end));
        }
        if !positive(st.record_interval) {
            return bad("record_interval must be positive".into());
        }
        if st.renormalize.is_some_and(|v| !positive(v)) || st.dt.is_some_and(|v| !positive(v)) {
            return bad("renormalize and dt must be positive when given".into());
        }
        if st.renormalize.is_some() && g.kind == GridKind::Cartesian {
            return bad("renormalize needs a radial grid".into());
        }
        if let Some(si) = self.output.snapshot_interval {
            if !positive(si) {
                return bad("snapshot_interval must be positive".into());
            }
        }
        if self.output.report_window.is_some_and(|v| !positive(v)) {
            return bad("report_window must be positive".into());
        }
        self.build_grid().map(|_| ())
    }

    pub fn build_grid(&self) -> Result<Grid> {
        match self.grid.kind {
            GridKind::Radial => Grid::radial(self.grid.n, self.grid.s_max.unwrap_or(8.0)),
            GridKind::Cartesian => {
                Grid::cartesian(self.grid.n, self.grid.half_width.unwrap_or(4.0))
            }
        }
    }

    pub fn plan(&self) -> RunPlan {
        RunPlan {
            t_end: self.stepping.t_end,
            record_interval: self.stepping.record_interval,
            safety: self.stepping.safety,
            fixed_dt: self.stepping.dt,
            renormalize: self.stepping.renormalize,
            report_window: self.output.report_window.unwrap_or(DEFAULT_REPORT_WINDOW),
            keep_states: false,
        }
    }

    /// The same scenario on a grid with `n` nodes per axis.
    pub fn with_nodes(&self, n: usize) -> Self {
        let mut c = self.clone();
        c.grid.n = n;
        c
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output
            .directory
            .clone()
            .unwrap_or_else(|| PathBuf::from("runs").join(&self.name))
    }
}
