//! Python bindings for `cigarflow`.

use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use cigarflow::analytics;
use cigarflow::flow::{self, DiagnosticsRecord, RunPlan};
use cigarflow::geometry::ConformalState;
use cigarflow::grid::Grid;
use cigarflow::harness::{self, Check, ScenarioConfig};
use cigarflow::FlowError;

fn err(e: FlowError) -> PyErr {
    match e {
        FlowError::Domain(_)
        | FlowError::Range(_)
        | FlowError::Grid(_)
        | FlowError::Config(_)
        | FlowError::Hypothesis(_)
        | FlowError::OutsideGrid { .. } => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn record_dict<'py>(py: Python<'py>, r: &DiagnosticsRecord) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("t", r.t)?;
    d.set_item("dt", r.dt)?;
    d.set_item("sup_R", r.sup_r)?;
    d.set_item("inf_R", r.inf_r)?;
    d.set_item("sup_u_tilde", r.sup_u_tilde)?;
    d.set_item("sup_grad_sq", r.sup_grad_sq)?;
    d.set_item("w_drift", r.w_drift)?;
    d.set_item("sup_h", r.sup_h)?;
    d.set_item("width_bound", r.width_bound)?;
    d.set_item("cinf_est", r.cinf_est)?;
    d.set_item("res_poisson", r.res_poisson)?;
    d.set_item("res_curv_evo", r.res_curv_evo)?;
    d.set_item("bounded", r.bounded)?;
    d.set_item("v_consistency", r.v_consistency)?;
    d.set_item("cigar_distance", r.cigar_distance)?;
    d.set_item("frame_scale", r.frame_scale)?;
    Ok(d)
}

/// `(name, value, bound, passed)`
type CheckTuple = (String, f64, f64, bool);

fn check_tuple(c: &Check) -> CheckTuple {
    (c.name.clone(), c.value, c.bound, c.passed)
}

#[pyfunction]
fn cigar_density(r: f64) -> PyResult<f64> {
    analytics::cigar_density(r).map_err(err)
}

#[pyfunction]
fn cigar_potential(r: f64) -> PyResult<f64> {
    analytics::cigar_potential(r).map_err(err)
}

#[pyfunction]
fn cigar_scalar_curvature(r: f64) -> PyResult<f64> {
    analytics::cigar_scalar_curvature(r).map_err(err)
}

#[pyfunction]
fn arc_length(r: f64) -> PyResult<f64> {
    analytics::arc_length(r).map_err(err)
}

#[pyfunction]
fn radius_of(s: f64) -> PyResult<f64> {
    analytics::radius_of(s).map_err(err)
}

/// Density of the soliton `g(t)` at `(x, y)`.
#[pyfunction]
fn soliton_density(x: f64, y: f64, t: f64) -> PyResult<f64> {
    analytics::soliton_density([x, y], t).map_err(err)
}

/// `[(name, value, bound, passed), ...]`
#[pyfunction]
fn oracle_suite() -> PyResult<Vec<CheckTuple>> {
    Ok(harness::oracle_suite()
        .map_err(err)?
        .iter()
        .map(check_tuple)
        .collect())
}

/// Runs the invariant suite on a scenario file; returns `(passed, checks)`.
#[pyfunction]
fn verify(config: PathBuf) -> PyResult<(bool, Vec<CheckTuple>)> {
    let cfg = ScenarioConfig::load(&config).map_err(err)?;
    let rep = harness::verify(&cfg).map_err(err)?;
    Ok((rep.passed(), rep.checks.iter().map(check_tuple).collect()))
}

/// Runs a scenario file into a run directory; returns the diagnostics.
#[pyfunction]
#[pyo3(signature = (config, out=None, resume=false))]
fn run_scenario<'py>(
    py: Python<'py>,
    config: PathBuf,
    out: Option<PathBuf>,
    resume: bool,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let cfg = ScenarioConfig::load(&config).map_err(err)?;
    let outcome = harness::run_scenario(&cfg, out.as_deref(), true, resume).map_err(err)?;
    outcome.records.iter().map(|r| record_dict(py, r)).collect()
}

#[pyfunction]
fn report(run_dir: PathBuf) -> PyResult<String> {
    Ok(harness::report(&run_dir).map_err(err)?.text())
}

/// Evolving metric `e^{ũ}|dx|²` with its co-evolved Ricci potential.
#[pyclass(name = "FlowState", module = "cigarflow_py", skip_from_py_object)]
#[derive(Clone)]
struct PyFlowState {
    inner: flow::FlowState,
}

impl PyFlowState {
    fn radial(log_u: Vec<f64>, s_max: f64) -> PyResult<Self> {
        let grid = Grid::radial(log_u.len(), s_max).map_err(err)?;
        let m = ConformalState::over_cigar(grid, log_u, 0.0).map_err(err)?;
        Ok(Self {
            inner: flow::FlowState::from_initial_metric(&m).map_err(err)?,
        })
    }
}

#[pymethods]
impl PyFlowState {
    /// `u₀ g_c` on a radial grid, `ln u₀` given at the nodes `s_i`.
    #[new]
    #[pyo3(signature = (log_u, s_max=8.0))]
    fn new(log_u: Vec<f64>, s_max: f64) -> PyResult<Self> {
        Self::radial(log_u, s_max)
    }

    /// `e^{c} g_c` on `n` radial nodes.
    #[staticmethod]
    #[pyo3(signature = (n, s_max=8.0, log_factor=0.0))]
    fn cigar(n: usize, s_max: f64, log_factor: f64) -> PyResult<Self> {
        Self::radial(vec![log_factor; n], s_max)
    }

    #[staticmethod]
    fn from_snapshot(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: harness::parse_snapshot(text).map_err(err)?,
        })
    }

    fn snapshot(&self) -> String {
        harness::snapshot_text(&self.inner)
    }

    fn step(&self, dt: f64) -> PyResult<Self> {
        Ok(Self {
            inner: flow::step(&self.inner, dt).map_err(err)?,
        })
    }

    /// Integrates to `t_end`; returns the new state and its records.
    #[pyo3(signature = (t_end, record_interval=0.1, safety=0.9, renormalize=None))]
    fn advance<'py>(
        &self,
        py: Python<'py>,
        t_end: f64,
        record_interval: f64,
        safety: f64,
        renormalize: Option<f64>,
    ) -> PyResult<(Self, Vec<Bound<'py, PyDict>>)> {
        let plan = RunPlan {
            t_end,
            record_interval,
            safety,
            renormalize,
            ..RunPlan::default()
        };
        let traj = flow::run(self.inner.clone(), &plan, |_, _| Ok(())).map_err(err)?;
        let records = traj
            .records
            .iter()
            .map(|r| record_dict(py, r))
            .collect::<PyResult<_>>()?;
        Ok((
            Self {
                inner: traj.final_state,
            },
            records,
        ))
    }

    fn diagnostics<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        record_dict(py, &flow::monitor(&self.inner).map_err(err)?)
    }

    fn rescaled(&self, mu: f64) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.rescaled(mu).map_err(err)?,
        })
    }

    /// Normalised log factor `ǔ` at the nodes.
    fn normalized(&self) -> PyResult<Vec<f64>> {
        Ok(flow::normalize(&self.inner)
            .map_err(err)?
            .log_factor()
            .to_vec())
    }

    #[pyo3(signature = (window=4.0))]
    fn cigar_distance(&self, window: f64) -> PyResult<f64> {
        flow::cigar_profile_distance(&self.inner, window).map_err(err)
    }

    /// `max |ũ - ũ_exact|` against the soliton at the current time.
    fn manufactured_error(&self) -> PyResult<f64> {
        flow::manufactured_error(&self.inner).map_err(err)
    }

    #[getter]
    fn t(&self) -> f64 {
        self.inner.t()
    }

    #[getter]
    fn steps(&self) -> u64 {
        self.inner.steps()
    }

    #[getter]
    fn frame_scale(&self) -> f64 {
        self.inner.frame_scale()
    }

    #[getter]
    fn arc_lengths(&self) -> Vec<f64> {
        self.inner.grid().arc_lengths().to_vec()
    }

    #[getter]
    fn u_tilde(&self) -> Vec<f64> {
        self.inner.u_tilde().to_vec()
    }

    #[getter]
    fn potential(&self) -> Vec<f64> {
        self.inner.potential().to_vec()
    }

    #[getter]
    fn curvature(&self) -> Vec<f64> {
        self.inner.curvature().to_vec()
    }

    #[getter]
    fn w(&self) -> Vec<f64> {
        self.inner.w()
    }

    #[getter]
    fn h(&self) -> Vec<f64> {
        self.inner.h()
    }

    fn __repr__(&self) -> String {
        format!(
            "FlowState(n={}, t={}, frame_scale={})",
            self.inner.grid().nodes_per_axis(),
            self.inner.t(),
            self.inner.frame_scale()
        )
    }
}

#[pymodule]
fn cigarflow_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFlowState>()?;
    m.add_function(wrap_pyfunction!(cigar_density, m)?)?;
    m.add_function(wrap_pyfunction!(cigar_potential, m)?)?;
    m.add_function(wrap_pyfunction!(cigar_scalar_curvature, m)?)?;
    m.add_function(wrap_pyfunction!(arc_length, m)?)?;
    m.add_function(wrap_pyfunction!(radius_of, m)?)?;
    m.add_function(wrap_pyfunction!(soliton_density, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_suite, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(report, m)?)?;
    Ok(())
}
