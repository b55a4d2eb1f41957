//! Structured-mesh finite element infrastructure: periodic cell meshes,
//! plate meshes, Q1 and Bogner–Fox–Schmit elements, Gauss quadrature,
//! constrained DOF numbering, sparse assembly and direct solves.

mod assembly;
mod dofs;
mod element;
mod mesh;
mod quadrature;

pub use assembly::{solve, SparseBuilder, SparseSystem, Symmetry};
pub use dofs::{project_mean_zero, DofMap};
pub use element::{bfs, hermite_1d, q1_2d, q1_3d, q1q2_3d, BfsEval};
pub use mesh::{
    build_cell_mesh_2d, build_cell_mesh_3d, Edge, InclusionShape, Phase, PeriodicMesh2D,
    PeriodicMesh3D, PlateMesh,
};
pub use quadrature::{gauss, gauss_2d, gauss_3d};
