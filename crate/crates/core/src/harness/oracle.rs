//! Identity suite for the closed-form cigar geometry.

use crate::analytics::{
    arc_length, cigar_density, cigar_potential, cigar_scalar_curvature, ln_cosh, radius_of,
    soliton_density, soliton_pullback,
};
use crate::error::Result;

use super::check::Check;

pub const ORACLE_TOL: f64 = 1e-12;
const SAMPLES: usize = 1000;

fn rel(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// `SAMPLES` radii log-spaced on `[1e-3, 1e3]`.
fn radii() -> Vec<f64> {
    (0..SAMPLES)
        .map(|k| 10f64.powf(-3.0 + 6.0 * k as f64 / (SAMPLES - 1) as f64))
        .collect()
}

fn worst(mut values: impl Iterator<Item = Result<f64>>) -> Result<f64> {
    values.try_fold(0.0f64, |m, v| Ok(m.max(v?)))
}

pub fn oracle_suite() -> Result<Vec<Check>> {
    let rs = radii();
    let log_sum = worst(
        rs.iter()
            .map(|&r| Ok((cigar_potential(r)? + cigar_density(r)?.ln()).abs())),
    )?;
    let cosh_form = worst(
        rs.iter()
            .map(|&r| Ok(rel(cigar_potential(r)?, 2.0 * ln_cosh(arc_length(r)?)))),
    )?;
    let curvature_s = worst(rs.iter().map(|&r| {
        let s = arc_length(r)?;
        let c = s.cosh();
        Ok(rel(cigar_scalar_curvature(radius_of(s)?)?, 4.0 / (c * c)))
    }))?;
    let curvature_w0 = worst(
        rs.iter()
            .map(|&r| Ok(rel(cigar_scalar_curvature(r)?, 4.0 * cigar_density(r)?))),
    )?;
    let round_trip = worst(rs.iter().map(|&r| Ok(rel(radius_of(arc_length(r)?)?, r))))?;
    let mut pullback: f64 = 0.0;
    for t in [0.1, 0.5, 1.0] {
        for k in 0..SAMPLES {
            // deterministic spread over a disc of radius ~30
            let th = 2.399963229728653 * k as f64;
            let rad = 30.0 * ((k as f64 + 0.5) / SAMPLES as f64).sqrt();
            let (a, b) = (rad * th.cos(), rad * th.sin());
            let x = soliton_pullback(a, b, t)?;
            let lhs = (4.0 * t).exp() * soliton_density(x, t)?;
            pullback = pullback.max(rel(lhs, cigar_density(a.hypot(b))?));
        }
    }
    Ok(vec![
        Check::at_most("log w0 + f0 = 0", log_sum, ORACLE_TOL),
        Check::at_most("f0 = 2 log cosh s", cosh_form, ORACLE_TOL),
        Check::at_most("R_c = 4 cosh^-2 s", curvature_s, ORACLE_TOL),
        Check::at_most("R_c = 4 w0", curvature_w0, ORACLE_TOL),
        Check::at_most("radius_of(arc_length(r)) = r", round_trip, ORACLE_TOL),
        Check::at_most("pullback staticity", pullback, ORACLE_TOL),
    ])
}
