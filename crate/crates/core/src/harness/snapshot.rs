//! Plain-text snapshots. Every number is written with 17 significant digits,
//! which round-trips f64 exactly, so save → load → save is byte-identical.
//!
//! ```text
//! cigarflow-snapshot 1
//! grid radial 129 8.0000000000000000e0
//! t 5.0000000000000000e-1
//! ...scalars...
//! u_tilde <n values>
//! ...arrays...
//! checksum <sum of all array values>
//! ```

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{FlowError, Result};
use crate::flow::{FlowState, InitialFields};
use crate::grid::{Grid, GridKind};

pub const SNAPSHOT_VERSION: &str = "cigarflow-snapshot 1";

const SCALARS: [&str; 9] = [
    "t",
    "frame_scale",
    "steps",
    "last_dt",
    "origin_curvature_integral",
    "u_slope",
    "potential_slope",
    "sup_u_tilde",
    "poisson_residual",
];
const ARRAYS: [&str; 5] = ["u_tilde", "f", "f_init", "w_init", "log_u0"];

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn checksum(arrays: &[&[f64]]) -> f64 {
    arrays.iter().flat_map(|a| a.iter()).sum()
}

pub fn snapshot_text(state: &FlowState) -> String {
    let grid = state.grid();
    let kind = match grid.kind() {
        GridKind::Radial => "radial",
        GridKind::Cartesian => "cartesian",
    };
    let init = state.initial();
    let mut out = String::new();
    let _ = writeln!(out, "{SNAPSHOT_VERSION}");
    let _ = writeln!(
        out,
        "grid {kind} {} {}",
        grid.nodes_per_axis(),
        num(grid.extent())
    );
    let scalars = [
        num(state.t()),
        num(state.frame_scale()),
        state.steps().to_string(),
        num(state.last_dt()),
        num(state.origin_curvature_integral()),
        num(state.conformal().outer_slope()),
        num(state.potential_slope),
        num(init.sup_u_tilde),
        num(init.poisson_residual),
    ];
    for (name, v) in SCALARS.iter().zip(scalars) {
        let _ = writeln!(out, "{name} {v}");
    }
    let arrays: [&[f64]; 5] = [
        state.u_tilde(),
        state.potential(),
        &init.potential,
        &init.conserved,
        &init.log_u0,
    ];
    for (name, values) in ARRAYS.iter().zip(arrays) {
        let _ = write!(out, "{name}");
        for v in values {
            let _ = write!(out, " {}", num(*v));
        }
        out.push('\n');
    }
    let _ = writeln!(out, "checksum {}", num(checksum(&arrays)));
    out
}

pub fn save_snapshot(state: &FlowState, path: &Path) -> Result<()> {
    std::fs::write(path, snapshot_text(state)).map_err(|e| FlowError::io(path, e))
}

fn bad(msg: impl Into<String>) -> FlowError {
    FlowError::Snapshot(msg.into())
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse().map_err(|_| bad(format!("bad number {s:?}")))
}

pub fn parse_snapshot(text: &str) -> Result<FlowState> {
    let mut lines = text.lines();
    if lines.next() != Some(SNAPSHOT_VERSION) {
        return Err(bad(format!("missing version tag {SNAPSHOT_VERSION:?}")));
    }
    let mut field = |name: &str| -> Result<Vec<String>> {
        let line = lines
            .next()
            .ok_or_else(|| bad(format!("truncated before {name}")))?;
        let mut parts = line.split(' ');
        if parts.next() != Some(name) {
            return Err(bad(format!("expected {name}, found {line:.40}")));
        }
        Ok(parts.map(str::to_owned).collect())
    };
    let g = field("grid")?;
    if g.len() != 3 {
        return Err(bad("grid line needs kind, n and extent"));
    }
    let n: usize = g[1].parse().map_err(|_| bad("bad node count"))?;
    let extent = parse_f64(&g[2])?;
    let grid = match g[0].as_str() {
        "radial" => Grid::radial(n, extent)?,
        "cartesian" => Grid::cartesian(n, extent)?,
        other => return Err(bad(format!("unknown grid kind {other}"))),
    };
    let mut scalars = Vec::with_capacity(SCALARS.len());
    let mut steps = 0u64;
    for name in SCALARS {
        let v = field(name)?;
        if v.len() != 1 {
            return Err(bad(format!("{name} needs one value")));
        }
        if name == "steps" {
            steps = v[0].parse().map_err(|_| bad("bad step count"))?;
            scalars.push(0.0);
        } else {
            scalars.push(parse_f64(&v[0])?);
        }
    }
    let mut arrays = Vec::with_capacity(ARRAYS.len());
    for name in ARRAYS {
        let vals = field(name)?
            .iter()
            .map(|s| parse_f64(s))
            .collect::<Result<Vec<f64>>>()?;
        if vals.len() != grid.len() {
            return Err(bad(format!(
                "{name} has {} values, grid has {}",
                vals.len(),
                grid.len()
            )));
        }
        arrays.push(vals);
    }
    let stored = field("checksum")?;
    let refs: Vec<&[f64]> = arrays.iter().map(Vec::as_slice).collect();
    let expected = num(checksum(&refs));
    if stored.len() != 1 || stored[0] != expected {
        return Err(bad(format!(
            "checksum mismatch: stored {:?}, computed {expected}",
            stored.first()
        )));
    }
    let [u, f, f_init, w_init, log_u0]: [Vec<f64>; 5] =
        arrays.try_into().map_err(|_| bad("array count"))?;
    let initial = InitialFields {
        potential: f_init,
        conserved: w_init,
        log_u0,
        sup_u_tilde: scalars[7],
        poisson_residual: scalars[8],
    };
    FlowState::from_parts(
        grid, u, scalars[5], f, scalars[6], scalars[0], scalars[1], initial, scalars[4], steps,
        scalars[3],
    )
}

pub fn load_snapshot(path: &Path) -> Result<FlowState> {
    let text = std::fs::read_to_string(path).map_err(|e| FlowError::io(path, e))?;
    parse_snapshot(&text)
}
