//! Time integration of the conformal Ricci flow with a co-evolved Ricci
//! potential, plus the invariant monitors built on it.

mod kahler;
mod monitor;
mod normalize;
mod run;
mod state;
mod stepper;

pub use kahler::{calibrate_kahler_scale, kahler_cross_check, KAHLER_SCALE};
pub use monitor::{
    curvature_evolution_residual, gradient_norm_sq, monitor, poisson_residual, DiagnosticsRecord,
};
pub use normalize::{cigar_profile_distance, normalize, normalizing_factor, DEFAULT_REPORT_WINDOW};
pub use run::{manufactured_error, run, RunPlan, Trajectory};
pub use state::{FlowState, InitialFields};
pub use stepper::{adaptive_dt, flow_rhs, flow_rhs_laplacian_form, step, SUP_GROWTH_TOL};
