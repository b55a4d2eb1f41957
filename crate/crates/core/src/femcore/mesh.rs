use alloc::format;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Material phase of an element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Matrix,
    Inclusion,
}

/// Inclusion geometry on `Y = (-1/2, 1/2)²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InclusionShape {
    Disk { radius: f64, center: [f64; 2] },
    /// Axis-aligned square of side `side`.
    Square { side: f64, center: [f64; 2] },
    /// Layer `|y₁ - center| < width / 2`, spanning the cell in `y₂`.
    Laminate { width: f64, center: f64 },
}

impl InclusionShape {
    pub fn contains(&self, y: [f64; 2]) -> bool {
        match *self {
            Self::Disk { radius, center } => {
                let (dx, dy) = (y[0] - center[0], y[1] - center[1]);
                dx * dx + dy * dy < radius * radius
            }
            Self::Square { side, center } => {
                (y[0] - center[0]).abs() < 0.5 * side && (y[1] - center[1]).abs() < 0.5 * side
            }
            Self::Laminate { width, center } => (y[0] - center).abs() < 0.5 * width,
        }
    }

    fn check(&self) -> Result<()> {
        let (half, c): (f64, &[f64]) = match self {
            Self::Disk { radius, center } => (*radius, center),
            Self::Square { side, center } => (0.5 * side, center),
            Self::Laminate { width, center } => (0.5 * width, core::slice::from_ref(center)),
        };
        if !(half >= 0.0) || c.iter().any(|x| !x.is_finite()) {
            return Err(Error::Geometry(format!("invalid inclusion parameters {self:?}")));
        }
        if half > 0.0 && c.iter().any(|x| x.abs() + half >= 0.5) {
            return Err(Error::Geometry(format!("inclusion {self:?} touches the cell boundary")));
        }
        Ok(())
    }
}

/// `n × n` grid on `Y = (-1/2, 1/2)²` with opposite edges identified.
/// Element `(i, j)` has index `i + n j`; node `(i, j)` has index
/// `(i mod n) + n (j mod n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicMesh2D {
    pub n: usize,
    pub phases: Vec<Phase>,
}

impl PeriodicMesh2D {
    pub fn from_phases(n: usize, phases: Vec<Phase>) -> Result<Self> {
        if n == 0 || phases.len() != n * n {
            return Err(Error::Configuration(format!("{} phases for a {n}×{n} mesh", phases.len())));
        }
        Ok(Self { n, phases })
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn n_nodes(&self) -> usize {
        self.n * self.n
    }

    pub fn n_elements(&self) -> usize {
        self.n * self.n
    }

    pub fn node(&self, i: usize, j: usize) -> usize {
        (i % self.n) + self.n * (j % self.n)
    }

    pub fn element_nodes(&self, e: usize) -> [usize; 4] {
        let (i, j) = (e % self.n, e / self.n);
        core::array::from_fn(|a| self.node(i + (a & 1), j + (a >> 1)))
    }

    /// Lower-left corner of element `e`.
    pub fn element_origin(&self, e: usize) -> [f64; 2] {
        let h = self.h();
        [-0.5 + (e % self.n) as f64 * h, -0.5 + (e / self.n) as f64 * h]
    }

    pub fn centroid(&self, e: usize) -> [f64; 2] {
        let o = self.element_origin(e);
        [o[0] + 0.5 * self.h(), o[1] + 0.5 * self.h()]
    }

    pub fn inclusion_count(&self) -> usize {
        self.phases.iter().filter(|p| **p == Phase::Inclusion).count()
    }

    /// Discrete `|Y₁|`.
    pub fn inclusion_area(&self) -> f64 {
        self.inclusion_count() as f64 * self.h() * self.h()
    }
}

/// Tags each element by whether its centroid lies in the inclusion.
pub fn build_cell_mesh_2d(n: usize, shape: &InclusionShape) -> Result<PeriodicMesh2D> {
    if n < 4 {
        return Err(Error::Configuration(format!("cell mesh needs n ≥ 4, got {n}")));
    }
    shape.check()?;
    let h = 1.0 / n as f64;
    let phases = (0..n * n)
        .map(|e| {
            let c = [-0.5 + ((e % n) as f64 + 0.5) * h, -0.5 + ((e / n) as f64 + 0.5) * h];
            if shape.contains(c) {
                Phase::Inclusion
            } else {
                Phase::Matrix
            }
        })
        .collect();
    Ok(PeriodicMesh2D { n, phases })
}

/// `n × n × nz` grid on `Z = Y × (-1, 1)`, periodic in `y` only. Element
/// `(i, j, k)` has index `i + n j + n² k`; node `(i, j, k)`, `k ∈ 0..=nz`,
/// has index `(i mod n) + n (j mod n) + n² k`. The phase of an element is
/// that of its column, so the inclusion is the prism `Y₁ × (-1, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicMesh3D {
    pub n: usize,
    pub nz: usize,
    pub columns: PeriodicMesh2D,
}

impl PeriodicMesh3D {
    pub fn extrude(columns: PeriodicMesh2D, nz: usize) -> Result<Self> {
        if nz == 0 {
            return Err(Error::Configuration("cell mesh needs nz ≥ 1".into()));
        }
        Ok(Self { n: columns.n, nz, columns })
    }

    pub fn h(&self) -> [f64; 3] {
        let h = 1.0 / self.n as f64;
        [h, h, 2.0 / self.nz as f64]
    }

    pub fn n_nodes(&self) -> usize {
        self.n * self.n * (self.nz + 1)
    }

    pub fn n_elements(&self) -> usize {
        self.n * self.n * self.nz
    }

    pub fn node(&self, i: usize, j: usize, k: usize) -> usize {
        (i % self.n) + self.n * (j % self.n) + self.n * self.n * k
    }

    pub fn node_layer(&self, node: usize) -> usize {
        node / (self.n * self.n)
    }

    pub fn element_nodes(&self, e: usize) -> [usize; 8] {
        let nn = self.n * self.n;
        let (c, k) = (e % nn, e / nn);
        let (i, j) = (c % self.n, c / self.n);
        core::array::from_fn(|a| self.node(i + (a & 1), j + ((a >> 1) & 1), k + (a >> 2)))
    }

    pub fn phase(&self, e: usize) -> Phase {
        self.columns.phases[e % (self.n * self.n)]
    }

    pub fn element_origin(&self, e: usize) -> [f64; 3] {
        let nn = self.n * self.n;
        let o = self.columns.element_origin(e % nn);
        [o[0], o[1], -1.0 + (e / nn) as f64 * self.h()[2]]
    }

    pub fn inclusion_count(&self) -> usize {
        self.columns.inclusion_count() * self.nz
    }

    /// Whether node lies on `Γ⁺ ∪ Γ⁻` (top or bottom layer).
    pub fn on_faces(&self, node: usize) -> bool {
        let k = self.node_layer(node);
        k == 0 || k == self.nz
    }
}

pub fn build_cell_mesh_3d(n: usize, nz: usize, shape: &InclusionShape) -> Result<PeriodicMesh3D> {
    PeriodicMesh3D::extrude(build_cell_mesh_2d(n, shape)?, nz)
}

/// Edge of the plate rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Edge {
    Left,
    Right,
    Bottom,
    Top,
}

impl Edge {
    pub const ALL: [Edge; 4] = [Edge::Left, Edge::Right, Edge::Bottom, Edge::Top];
}

/// `nx × ny` grid on `ω = (0, lx) × (0, ly)`. Node `(i, j)` has index
/// `i + (nx + 1) j`; element `(i, j)` has index `i + nx j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlateMesh {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    /// Clamped flags in the order of [`Edge::ALL`].
    pub clamped: [bool; 4],
}

impl PlateMesh {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64, clamped: &[Edge]) -> Result<Self> {
        if nx == 0 || ny == 0 || !(lx > 0.0) || !(ly > 0.0) {
            return Err(Error::Configuration(format!("invalid plate mesh {nx}×{ny} on {lx}×{ly}")));
        }
        if clamped.is_empty() {
            return Err(Error::BoundaryCondition("the clamped part of the boundary is empty".into()));
        }
        let flags = core::array::from_fn(|k| clamped.contains(&Edge::ALL[k]));
        Ok(Self { nx, ny, lx, ly, clamped: flags })
    }

    pub fn h(&self) -> [f64; 2] {
        [self.lx / self.nx as f64, self.ly / self.ny as f64]
    }

    pub fn n_nodes(&self) -> usize {
        (self.nx + 1) * (self.ny + 1)
    }

    pub fn n_elements(&self) -> usize {
        self.nx * self.ny
    }

    pub fn node(&self, i: usize, j: usize) -> usize {
        i + (self.nx + 1) * j
    }

    pub fn node_coords(&self, node: usize) -> [f64; 2] {
        let h = self.h();
        let (i, j) = (node % (self.nx + 1), node / (self.nx + 1));
        [i as f64 * h[0], j as f64 * h[1]]
    }

    pub fn element_nodes(&self, e: usize) -> [usize; 4] {
        let (i, j) = (e % self.nx, e / self.nx);
        core::array::from_fn(|a| self.node(i + (a & 1), j + (a >> 1)))
    }

    pub fn element_origin(&self, e: usize) -> [f64; 2] {
        let h = self.h();
        [(e % self.nx) as f64 * h[0], (e / self.nx) as f64 * h[1]]
    }

    pub fn is_clamped(&self, edge: Edge) -> bool {
        self.clamped[edge as usize]
    }

    /// Whether the node lies on a clamped edge.
    pub fn node_clamped(&self, node: usize) -> bool {
        let (i, j) = (node % (self.nx + 1), node / (self.nx + 1));
        (i == 0 && self.is_clamped(Edge::Left))
            || (i == self.nx && self.is_clamped(Edge::Right))
            || (j == 0 && self.is_clamped(Edge::Bottom))
            || (j == self.ny && self.is_clamped(Edge::Top))
    }

    /// Boundary element faces on free edges: `(element, edge)`.
    pub fn free_edge_faces(&self) -> Vec<(usize, Edge)> {
        let mut out = Vec::new();
        for edge in Edge::ALL {
            if self.is_clamped(edge) {
                continue;
            }
            match edge {
                Edge::Left => out.extend((0..self.ny).map(|j| (self.nx * j, edge))),
                Edge::Right => out.extend((0..self.ny).map(|j| (self.nx * j + self.nx - 1, edge))),
                Edge::Bottom => out.extend((0..self.nx).map(|i| (i, edge))),
                Edge::Top => out.extend((0..self.nx).map(|i| (self.nx * (self.ny - 1) + i, edge))),
            }
        }
        out
    }
}
