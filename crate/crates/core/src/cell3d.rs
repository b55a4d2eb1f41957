//! Coupled elastic/electrostatic cell problems on `Z = Y × (-1, 1)` for
//! plates whose thickness is comparable to the inclusion spacing.
//!
//! Displacements live on the whole cell, periodic in `y` and free on the
//! faces `x₃ = ±1`; the potential lives on the electrically active
//! elements only and vanishes on the metallized faces. Elements are
//! bilinear in `y` and quadratic in `x₃`.

use alloc::vec;
use alloc::vec::Vec;

use crate::femcore::{
    gauss_3d, project_mean_zero, q1q2_3d, solve, DofMap, PeriodicMesh3D, Phase, SparseBuilder, SparseSystem,
    Symmetry,
};
use crate::material::{GlobalTensor10, Material, Tensor2, Tensor4, L3, STRAIN_SLOTS};
use crate::{Error, Result};

/// Loading of a cell problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Loading3D {
    /// In-plane unit strain `(λμ)`, given as a pair index.
    Membrane(usize),
    /// Unit curvature `(λμ)`, entering as `-x₃ E^{λμ}`.
    Flexion(usize),
    /// Unit transverse field.
    Field,
}

/// Piecewise-constant global tensor on the 3D cell (by column).
#[derive(Debug, Clone, PartialEq)]
pub struct ComparableField {
    pub phases: Vec<GlobalTensor10>,
    /// Index into `phases` for each column (2D element).
    pub column_phase: Vec<usize>,
}

impl ComparableField {
    pub fn new(phases: Vec<GlobalTensor10>, column_phase: Vec<usize>) -> Result<Self> {
        if column_phase.iter().any(|&p| p >= phases.len()) {
            return Err(Error::Configuration("column phase index out of range".into()));
        }
        Ok(Self { phases, column_phase })
    }

    pub fn from_materials(mesh: &PeriodicMesh3D, matrix: &Material, inclusion: &Material) -> Result<Self> {
        if !matrix.validate().matrix_phase_compatible {
            return Err(Error::InvalidMaterial("the matrix phase must have d = 0 and c = 0".into()));
        }
        let tags = mesh.columns.phases.iter().map(|p| usize::from(*p == Phase::Inclusion)).collect();
        Self::new(vec![matrix.global_tensor()?, inclusion.global_tensor()?], tags)
    }

    pub fn uniform(mesh: &PeriodicMesh3D, r: GlobalTensor10) -> Self {
        Self { phases: vec![r], column_phase: vec![0; mesh.n * mesh.n] }
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self { phases: self.phases.iter().map(|r| r.scaled(t)).collect(), column_phase: self.column_phase.clone() }
    }

    pub fn at(&self, mesh: &PeriodicMesh3D, e: usize) -> &GlobalTensor10 {
        &self.phases[self.column_phase[e % (mesh.n * mesh.n)]]
    }

    fn check(&self, mesh: &PeriodicMesh3D) -> Result<()> {
        if self.column_phase.len() != mesh.n * mesh.n {
            return Err(Error::Configuration("coefficient field does not match the mesh".into()));
        }
        Ok(())
    }
}

/// DOF layout of the discrete space `W¹`: displacement DOF `3·node + c`,
/// potential DOF `3·n_nodes + node`, with `(2 nz + 1)` node layers.
#[derive(Debug, Clone, PartialEq)]
pub struct W1Space {
    pub n: usize,
    pub nz: usize,
    pub dofs: DofMap,
    electric_nodes: Vec<bool>,
}

impl W1Space {
    pub fn new(field: &ComparableField, mesh: &PeriodicMesh3D) -> Result<Self> {
        field.check(mesh)?;
        let (n, nz) = (mesh.n, mesh.nz);
        let n_nodes = n * n * (2 * nz + 1);
        let mut electric_nodes = vec![false; n_nodes];
        for e in 0..mesh.n_elements() {
            if field.at(mesh, e).has_electric() {
                for node in element_nodes(n, e) {
                    let layer = node / (n * n);
                    if layer != 0 && layer != 2 * nz {
                        electric_nodes[node] = true;
                    }
                }
            }
        }
        let dofs = DofMap::new(4 * n_nodes, |i| {
            if i < 3 * n_nodes {
                i < 3
            } else {
                !electric_nodes[i - 3 * n_nodes]
            }
        });
        Ok(Self { n, nz, dofs, electric_nodes })
    }

    pub fn n_nodes(&self) -> usize {
        self.n * self.n * (2 * self.nz + 1)
    }

    pub fn n_electric(&self) -> usize {
        self.electric_nodes.iter().filter(|b| **b).count()
    }

    /// Full DOF indices of element `e`: 36 displacement then 12 potential.
    pub fn element_dofs(&self, e: usize) -> [usize; 48] {
        let nodes = element_nodes(self.n, e);
        let nn = self.n_nodes();
        core::array::from_fn(|i| if i < 36 { 3 * nodes[i / 3] + i % 3 } else { 3 * nn + nodes[i - 36] })
    }

    /// `∫_Z φᵢ` for each full DOF (displacements only are weighted).
    fn weights(&self, mesh: &PeriodicMesh3D) -> Vec<f64> {
        let [h, _, hz] = mesh.h();
        let nn = self.n_nodes();
        let top = 2 * self.nz;
        (0..4 * nn)
            .map(|i| {
                if i >= 3 * nn {
                    return 0.0;
                }
                let layer = (i / 3) / (self.n * self.n);
                let w = if layer % 2 == 1 {
                    2.0 / 3.0
                } else if layer == 0 || layer == top {
                    1.0 / 6.0
                } else {
                    1.0 / 3.0
                };
                w * h * h * hz
            })
            .collect()
    }
}

fn element_nodes(n: usize, e: usize) -> [usize; 12] {
    let nn = n * n;
    let (c, k) = (e % nn, e / nn);
    let (i, j) = (c % n, c / n);
    core::array::from_fn(|a| {
        let (ax, ay, az) = (a & 1, (a >> 1) & 1, a >> 2);
        ((i + ax) % n) + n * ((j + ay) % n) + nn * (2 * k + az)
    })
}

/// `B[p][i]`: component `p` of `M¹(φᵢ)` for the 48 local DOFs.
fn b_matrix(grad: &[[f64; 3]; 12]) -> [[f64; 48]; 10] {
    let mut b = [[0.0; 48]; 10];
    for (p, &(i, j)) in STRAIN_SLOTS.iter().enumerate() {
        for a in 0..12 {
            for c in 0..3 {
                let mut v = 0.0;
                if c == i {
                    v += 0.5 * grad[a][j];
                }
                if c == j {
                    v += 0.5 * grad[a][i];
                }
                b[p][3 * a + c] = v;
            }
        }
    }
    for k in 0..3 {
        for a in 0..12 {
            b[7 + k][36 + a] = grad[a][k];
        }
    }
    b
}

struct ElementData {
    /// Quadrature points: reference coords, weight·|J|, B.
    points: Vec<([f64; 3], f64, [[f64; 48]; 10])>,
}

impl ElementData {
    fn new(mesh: &PeriodicMesh3D) -> Self {
        let h = mesh.h();
        let vol = h[0] * h[1] * h[2];
        let points = gauss_3d(2, 3)
            .into_iter()
            .map(|(xi, w)| {
                let (_, g) = q1q2_3d(xi, h);
                (xi, w * vol, b_matrix(&g))
            })
            .collect();
        Self { points }
    }
}

const N_RHS: usize = 7;
const MEMBRANE_PAIRS: [usize; 3] = [0, 1, 3];

/// Assembles `∫ M¹(V) ℛ ᵗM¹(U)` with the seven right-hand sides
/// `M(11), M(12), M(22), N(11), N(12), N(22), E3` (in that order).
pub fn cell_system(field: &ComparableField, mesh: &PeriodicMesh3D) -> Result<(SparseSystem, W1Space)> {
    let space = W1Space::new(field, mesh)?;
    let data = ElementData::new(mesh);
    let hz = mesh.h()[2];
    let mut sys = SparseBuilder::new(space.dofs.n_free(), N_RHS);
    for e in 0..mesh.n_elements() {
        let r = field.at(mesh, e);
        let z0 = mesh.element_origin(e)[2];
        let loc: [Option<usize>; 48] = space.element_dofs(e).map(|i| space.dofs.free(i));
        let mut ke = vec![0.0; 48 * 48];
        let mut fe = [[0.0; 48]; N_RHS];
        for (xi, wt, b) in &data.points {
            let x3 = z0 + xi[2] * hz;
            // ℛ B, 10 × 48
            let mut rb = [[0.0; 48]; 10];
            for p in 0..10 {
                for q in 0..10 {
                    let rpq = r.0[p][q];
                    if rpq == 0.0 {
                        continue;
                    }
                    for i in 0..48 {
                        rb[p][i] += rpq * b[q][i];
                    }
                }
            }
            for i in 0..48 {
                if loc[i].is_none() {
                    continue;
                }
                for p in 0..10 {
                    let bpi = b[p][i];
                    if bpi == 0.0 {
                        continue;
                    }
                    let row = &rb[p];
                    let kr = &mut ke[48 * i..48 * i + 48];
                    for j in 0..48 {
                        kr[j] += wt * bpi * row[j];
                    }
                    for (l, &pair) in MEMBRANE_PAIRS.iter().enumerate() {
                        let x = r.0[p][pair];
                        fe[l][i] -= wt * bpi * x;
                        fe[3 + l][i] += wt * x3 * bpi * x;
                    }
                    fe[6][i] -= wt * bpi * r.0[p][L3];
                }
            }
        }
        sys.add_block(&loc, &loc, &ke);
        for (l, f) in fe.iter().enumerate() {
            for i in 0..48 {
                sys.add_rhs(l, loc[i], f[i]);
            }
        }
    }
    Ok((sys.finish()?, space))
}

/// Solution of one cell problem in full DOF numbering.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSolution3D {
    pub loading: Loading3D,
    pub dofs: Vec<f64>,
}

/// The nine cell solutions.
#[derive(Debug, Clone, PartialEq)]
pub struct CellCorrectors3D {
    pub membrane: [CellSolution3D; 3],
    pub flexion: [CellSolution3D; 3],
    pub field: CellSolution3D,
    pub space: W1Space,
}

impl CellCorrectors3D {
    pub fn max_abs(&self) -> f64 {
        self.membrane
            .iter()
            .chain(&self.flexion)
            .chain(core::iter::once(&self.field))
            .flat_map(|s| s.dofs.iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Solves all nine cell problems with one LU factorization.
pub fn solve_correctors_3d(field: &ComparableField, mesh: &PeriodicMesh3D) -> Result<CellCorrectors3D> {
    let (sys, space) = cell_system(field, mesh)?;
    let sol = solve(&sys, Symmetry::General)?;
    let weights = space.weights(mesh);
    let nn3 = 3 * space.n_nodes();
    let full: Vec<Vec<f64>> = sol
        .iter()
        .map(|x| {
            let mut u = space.dofs.expand(x);
            project_mean_zero(&mut u, &weights, 3, |i| (i < nn3).then_some(i % 3));
            u
        })
        .collect();
    let mk = |k: usize, loading| CellSolution3D { loading, dofs: full[k].clone() };
    Ok(CellCorrectors3D {
        membrane: core::array::from_fn(|l| mk(l, Loading3D::Membrane(MEMBRANE_PAIRS[l]))),
        flexion: core::array::from_fn(|l| mk(3 + l, Loading3D::Flexion(MEMBRANE_PAIRS[l]))),
        field: mk(6, Loading3D::Field),
        space,
    })
}

/// Solves a single cell problem.
pub fn solve_corrector_3d(
    field: &ComparableField,
    mesh: &PeriodicMesh3D,
    loading: Loading3D,
) -> Result<CellSolution3D> {
    let all = solve_correctors_3d(field, mesh)?;
    let slot = |pair: usize| match pair {
        0 => Ok(0),
        1 | 2 => Ok(1),
        3 => Ok(2),
        _ => Err(Error::Configuration("in-plane pair index must be below 4".into())),
    };
    Ok(match loading {
        Loading3D::Membrane(p) => all.membrane[slot(p)?].clone(),
        Loading3D::Flexion(p) => all.flexion[slot(p)?].clone(),
        Loading3D::Field => all.field,
    })
}

/// `M¹(U)` at a point of element `e`.
pub fn packed_field(mesh: &PeriodicMesh3D, space: &W1Space, u: &[f64], e: usize, xi: [f64; 3]) -> [f64; 10] {
    let (_, g) = q1q2_3d(xi, mesh.h());
    let b = b_matrix(&g);
    let d = space.element_dofs(e);
    core::array::from_fn(|p| (0..48).map(|i| b[p][i] * u[d[i]]).sum())
}

/// Elastic and electric parts of `∫ M¹(U) ℛ ᵗM¹(U)`.
pub fn energy_split(field: &ComparableField, mesh: &PeriodicMesh3D, space: &W1Space, u: &[f64]) -> (f64, f64) {
    let data = ElementData::new(mesh);
    let (mut el, mut ee) = (0.0, 0.0);
    for e in 0..mesh.n_elements() {
        let r = field.at(mesh, e);
        for (xi, wt, _) in &data.points {
            let m = packed_field(mesh, space, u, e, *xi);
            for p in 0..7 {
                for q in 0..7 {
                    el += wt * m[p] * r.0[p][q] * m[q];
                }
            }
            for p in 7..10 {
                for q in 7..10 {
                    ee += wt * m[p] * r.0[p][q] * m[q];
                }
            }
        }
    }
    (el, ee)
}

/// Comparable-regime effective tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveTensorsComparable {
    pub r_mm_h: Tensor4,
    pub r_mn_h: Tensor4,
    pub r_nm_h: Tensor4,
    pub r_nn_h: Tensor4,
    pub d_mm3_h: Tensor2,
    pub d_nm3_h: Tensor2,
    pub e_mm3_h: Tensor2,
    pub e_mn3_h: Tensor2,
    pub c_mm33_h: f64,
    pub vol_y1: f64,
}

impl EffectiveTensorsComparable {
    pub fn zero() -> Self {
        let z4 = [[0.0; 4]; 4];
        Self {
            r_mm_h: z4,
            r_mn_h: z4,
            r_nm_h: z4,
            r_nn_h: z4,
            d_mm3_h: [0.0; 4],
            d_nm3_h: [0.0; 4],
            e_mm3_h: [0.0; 4],
            e_mn3_h: [0.0; 4],
            c_mm33_h: 0.0,
            vol_y1: 0.0,
        }
    }
}

fn form(r: &GlobalTensor10, a: &[f64; 10], b: &[f64; 10]) -> f64 {
    let mut s = 0.0;
    for p in 0..10 {
        if a[p] == 0.0 {
            continue;
        }
        for q in 0..10 {
            s += a[p] * r.0[p][q] * b[q];
        }
    }
    s
}

/// Evaluates the thirteen effective quantities from the nine correctors.
pub fn effective_tensors_comparable(
    corr: &CellCorrectors3D,
    field: &ComparableField,
    mesh: &PeriodicMesh3D,
) -> EffectiveTensorsComparable {
    let data = ElementData::new(mesh);
    let hz = mesh.h()[2];
    let space = &corr.space;
    let slot = [0usize, 1, 1, 2];
    let mut out = EffectiveTensorsComparable::zero();
    out.vol_y1 = mesh.columns.inclusion_area();
    for e in 0..mesh.n_elements() {
        let r = field.at(mesh, e);
        let z0 = mesh.element_origin(e)[2];
        for (xi, wt, _) in &data.points {
            let x3 = z0 + xi[2] * hz;
            let um: [[f64; 10]; 3] =
                core::array::from_fn(|l| packed_field(mesh, space, &corr.membrane[l].dofs, e, *xi));
            let un: [[f64; 10]; 3] =
                core::array::from_fn(|l| packed_field(mesh, space, &corr.flexion[l].dofs, e, *xi));
            let mut phi3 = packed_field(mesh, space, &corr.field.dofs, e, *xi);
            phi3[L3] += 1.0;
            let phim: [[f64; 10]; 4] = core::array::from_fn(|p| {
                let mut v = um[slot[p]];
                v[p] += 1.0;
                v
            });
            let phin: [[f64; 10]; 4] = core::array::from_fn(|p| {
                let mut v = un[slot[p]];
                v[p] -= x3;
                v
            });
            for p in 0..4 {
                for q in 0..4 {
                    out.r_mm_h[p][q] += wt * form(r, &phim[p], &phim[q]);
                    out.r_mn_h[p][q] += wt * form(r, &phim[p], &phin[q]);
                    out.r_nm_h[p][q] += wt * form(r, &phin[p], &phim[q]);
                    out.r_nn_h[p][q] += wt * form(r, &phin[p], &phin[q]);
                }
                out.d_mm3_h[p] += wt * form(r, &phim[p], &phi3);
                out.d_nm3_h[p] += wt * form(r, &phin[p], &phi3);
                out.e_mm3_h[p] += wt * form(r, &phi3, &phim[p]);
                out.e_mn3_h[p] += wt * form(r, &phi3, &phin[p]);
            }
            out.c_mm33_h += wt * form(r, &phi3, &phi3);
        }
    }
    out
}

/// Solves the cell problems and evaluates the effective tensors.
pub fn homogenize_comparable(
    field: &ComparableField,
    mesh: &PeriodicMesh3D,
) -> Result<(CellCorrectors3D, EffectiveTensorsComparable)> {
    let corr = solve_correctors_3d(field, mesh)?;
    let eff = effective_tensors_comparable(&corr, field, mesh);
    Ok((corr, eff))
}
