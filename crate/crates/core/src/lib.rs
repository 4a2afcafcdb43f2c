//! Numerical laboratory for the two-dimensional Ricci flow in conformal
//! gauge, built around the cigar soliton.
//!
//! * [`analytics`]: closed forms for the cigar and its soliton family.
//! * [`grid`], [`geometry`]: discretisations, curvature, Ricci potential,
//!   width estimators.
//! * [`flow`]: RK4 integration, monitors, normalisation, Kähler check.
//! * [`harness`]: scenario configs, CSV/snapshot persistence and the CLI.

pub mod analytics;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod grid;
pub mod harness;
mod interp;

pub use error::{FlowError, Result};
