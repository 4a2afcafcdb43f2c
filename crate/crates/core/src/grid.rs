//! Discretisations of the plane: a radial line in the cigar arc length `s`,
//! or a truncated Cartesian square.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::analytics::ln_cosh;
use crate::error::{FlowError, Result};

pub const MIN_NODES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    Radial,
    Cartesian,
}

/// Finite-volume data for the radial line, measured in the cigar metric
/// (area element `tanh s ds dθ`, divided by 2π).
#[derive(Debug, PartialEq)]
pub(crate) struct RadialCells {
    pub s: Vec<f64>,
    /// `tanh` at the face between node i and i+1.
    pub face: Vec<f64>,
    /// Cigar area of the control volume around each node.
    pub measure: Vec<f64>,
    /// `w₀ = cosh⁻² s` at the nodes.
    pub w0: Vec<f64>,
    /// `tanh S_max`, the weight of the far-field flux.
    pub outer_face: f64,
}

impl RadialCells {
    fn new(n: usize, h: f64) -> Self {
        let s: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
        let s_max = s[n - 1];
        let face = (0..n - 1).map(|i| (s[i] + 0.5 * h).tanh()).collect();
        let measure = (0..n)
            .map(|i| {
                let lo = if i == 0 { 0.0 } else { s[i] - 0.5 * h };
                let hi = if i == n - 1 { s_max } else { s[i] + 0.5 * h };
                ln_cosh(hi) - ln_cosh(lo)
            })
            .collect();
        let w0 = s
            .iter()
            .map(|&si| {
                let c = si.cosh();
                1.0 / (c * c)
            })
            .collect();
        Self {
            s,
            face,
            measure,
            w0,
            outer_face: s_max.tanh(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Grid {
    kind: GridKind,
    n: usize,
    extent: f64,
    spacing: f64,
    radial: Option<Arc<RadialCells>>,
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.n == other.n && self.extent == other.extent
    }
}

impl Grid {
    /// `n` nodes on `s ∈ [0, s_max]`; node 0 is the tip.
    pub fn radial(n: usize, s_max: f64) -> Result<Self> {
        if n < MIN_NODES {
            return Err(FlowError::Grid(format!(
                "need at least {MIN_NODES} nodes, got {n}"
            )));
        }
        if !(s_max.is_finite() && s_max > 0.0) {
            return Err(FlowError::Grid(format!(
                "S_max must be positive, got {s_max}"
            )));
        }
        if s_max > 700.0 {
            return Err(FlowError::Grid(format!("S_max = {s_max} overflows sinh")));
        }
        let spacing = s_max / (n - 1) as f64;
        Ok(Self {
            kind: GridKind::Radial,
            n,
            extent: s_max,
            spacing,
            radial: Some(Arc::new(RadialCells::new(n, spacing))),
        })
    }

    /// `n × n` nodes on `[-half_width, half_width]²`. `n` must be odd so the
    /// origin is a node.
    pub fn cartesian(n: usize, half_width: f64) -> Result<Self> {
        if n < MIN_NODES {
            return Err(FlowError::Grid(format!(
                "need at least {MIN_NODES} nodes, got {n}"
            )));
        }
        if n.is_multiple_of(2) {
            return Err(FlowError::Grid(format!(
                "cartesian grids need an odd node count so the origin is a node, got {n}"
            )));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(FlowError::Grid(format!(
                "half width must be positive, got {half_width}"
            )));
        }
        Ok(Self {
            kind: GridKind::Cartesian,
            n,
            extent: half_width,
            spacing: 2.0 * half_width / (n - 1) as f64,
            radial: None,
        })
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    /// Nodes per axis.
    pub fn nodes_per_axis(&self) -> usize {
        self.n
    }

    /// `S_max` (radial) or `L` (cartesian).
    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Total number of field values.
    pub fn len(&self) -> usize {
        match self.kind {
            GridKind::Radial => self.n,
            GridKind::Cartesian => self.n * self.n,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub(crate) fn cells(&self) -> &RadialCells {
        self.radial
            .as_deref()
            .expect("radial cell data requested on a cartesian grid")
    }

    /// Flat index of the origin.
    pub fn origin(&self) -> usize {
        match self.kind {
            GridKind::Radial => 0,
            GridKind::Cartesian => {
                let c = self.n / 2;
                c * self.n + c
            }
        }
    }

    /// Arc-length coordinates of a radial grid.
    pub fn arc_lengths(&self) -> &[f64] {
        &self.cells().s
    }

    /// Node coordinates `(x, y)` of a cartesian grid, row-major with y outer.
    pub fn point(&self, idx: usize) -> [f64; 2] {
        let (j, i) = (idx / self.n, idx % self.n);
        [
            -self.extent + i as f64 * self.spacing,
            -self.extent + j as f64 * self.spacing,
        ]
    }

    /// Euclidean radius of every node.
    pub fn radii(&self) -> Vec<f64> {
        match self.kind {
            GridKind::Radial => self.cells().s.iter().map(|s| s.sinh()).collect(),
            GridKind::Cartesian => (0..self.len())
                .map(|k| {
                    let p = self.point(k);
                    p[0].hypot(p[1])
                })
                .collect(),
        }
    }

    /// Nodes whose values evolve; cartesian boundary nodes carry Dirichlet data.
    pub fn is_active(&self, idx: usize) -> bool {
        match self.kind {
            GridKind::Radial => true,
            GridKind::Cartesian => {
                let (j, i) = (idx / self.n, idx % self.n);
                i > 0 && j > 0 && i + 1 < self.n && j + 1 < self.n
            }
        }
    }

    pub fn active_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&k| self.is_active(k))
    }

    pub(crate) fn check_field(&self, name: &'static str, field: &[f64]) -> Result<()> {
        if field.len() != self.len() {
            return Err(FlowError::Grid(format!(
                "{name} has {} values, grid has {}",
                field.len(),
                self.len()
            )));
        }
        crate::error::ensure_finite(name, field)
    }
}
