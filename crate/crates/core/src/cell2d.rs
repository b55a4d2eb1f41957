//! Cell problems on `Y` for plates much thinner than the inclusion spacing.
//!
//! The constitutive law is condensed pointwise per phase before any solve,
//! so every cell problem is an in-plane periodic elliptic problem: three
//! membrane correctors (Q1, vector), three flexion correctors (BFS, scalar)
//! and one piezoelectric corrector sharing the membrane operator.

use alloc::vec;
use alloc::vec::Vec;

use crate::femcore::{
    bfs, gauss_2d, project_mean_zero, q1_2d, solve, DofMap, Phase, PeriodicMesh2D, SparseBuilder, Symmetry,
};
use crate::material::{condense, CondensedTensors, Material, Tensor2, Tensor4};
use crate::{Error, Result};

/// Pairs `(11, 12, 21, 22)` → membrane/flexion loading index; the `21`
/// loading reuses the `12` corrector.
pub const LOADING_OF_PAIR: [usize; 4] = [0, 1, 1, 2];
/// Representative pair of each loading.
pub const PAIR_OF_LOADING: [usize; 3] = [0, 1, 3];

/// Condensed coefficients of one phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CondensedPhase {
    pub r_m: Tensor4,
    pub r_n: Tensor4,
    /// `(K_αβ, L3)` entries of `ℛ_M`.
    pub d_m: Tensor2,
    /// `(L3, K_αβ)` entries of `ℛ_M`.
    pub d_m_lower: Tensor2,
    pub c_m33: f64,
}

impl CondensedPhase {
    pub fn from_condensed(ct: &CondensedTensors) -> Self {
        Self {
            r_m: ct.r_m_inplane(),
            r_n: ct.r_n_inplane(),
            d_m: ct.d_m(),
            d_m_lower: ct.d_m_lower(),
            c_m33: ct.c_m33(),
        }
    }

    pub fn scaled(&self, t: f64) -> Self {
        let s4 = |m: &Tensor4| m.map(|r| r.map(|v| v * t));
        Self {
            r_m: s4(&self.r_m),
            r_n: s4(&self.r_n),
            d_m: self.d_m.map(|v| v * t),
            d_m_lower: self.d_m_lower.map(|v| v * t),
            c_m33: self.c_m33 * t,
        }
    }
}

/// Piecewise-constant condensed coefficients on a 2D cell mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct CondensedFieldY {
    pub phases: Vec<CondensedPhase>,
    /// Index into `phases` for each element.
    pub element_phase: Vec<usize>,
}

impl CondensedFieldY {
    pub fn new(phases: Vec<CondensedPhase>, element_phase: Vec<usize>) -> Result<Self> {
        if element_phase.iter().any(|&p| p >= phases.len()) {
            return Err(Error::Configuration("element phase index out of range".into()));
        }
        Ok(Self { phases, element_phase })
    }

    /// Condenses both materials (with no circuit term; the admittance enters
    /// the plate models separately) and maps them onto the mesh tags.
    pub fn from_materials(mesh: &PeriodicMesh2D, matrix: &Material, inclusion: &Material) -> Result<Self> {
        let rep = matrix.validate();
        if !rep.matrix_phase_compatible {
            return Err(Error::InvalidMaterial("the matrix phase must have d = 0 and c = 0".into()));
        }
        let m = CondensedPhase::from_condensed(&condense(&matrix.global_tensor()?, 0.0)?);
        let i = CondensedPhase::from_condensed(&condense(&inclusion.global_tensor()?, 0.0)?);
        let tags = mesh.phases.iter().map(|p| usize::from(*p == Phase::Inclusion)).collect();
        Self::new(vec![m, i], tags)
    }

    /// Same phase on every element.
    pub fn uniform(mesh: &PeriodicMesh2D, phase: CondensedPhase) -> Self {
        Self { phases: vec![phase], element_phase: vec![0; mesh.n_elements()] }
    }

    pub fn at(&self, e: usize) -> &CondensedPhase {
        &self.phases[self.element_phase[e]]
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self { phases: self.phases.iter().map(|p| p.scaled(t)).collect(), element_phase: self.element_phase.clone() }
    }

    fn check(&self, mesh: &PeriodicMesh2D) -> Result<()> {
        if self.element_phase.len() != mesh.n_elements() {
            return Err(Error::Configuration("coefficient field does not match the mesh".into()));
        }
        Ok(())
    }
}

/// Corrector DOF vectors (full numbering, mean zero).
#[derive(Debug, Clone, PartialEq)]
pub struct CellCorrectors2D {
    /// `u_M^{11}, u_M^{12}, u_M^{22}`, DOF `2·node + component`.
    pub membrane: [Vec<f64>; 3],
    /// `u_N3^{11}, u_N3^{12}, u_N3^{22}`, DOF `4·node + kind`.
    pub flexion: [Vec<f64>; 3],
    /// `u_M³`.
    pub piezo: Vec<f64>,
}

impl CellCorrectors2D {
    pub fn max_abs(&self) -> f64 {
        self.membrane
            .iter()
            .chain(&self.flexion)
            .chain(core::iter::once(&self.piezo))
            .flat_map(|v| v.iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Thin-regime effective tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveTensorsThin {
    pub r_n_h: Tensor4,
    pub r_m_h: Tensor4,
    pub d_m3_h: Tensor2,
    pub e_m3_h: Tensor2,
    pub c_m33_h: f64,
    pub vol_y1: f64,
}

impl EffectiveTensorsThin {
    pub fn zero() -> Self {
        Self { r_n_h: [[0.0; 4]; 4], r_m_h: [[0.0; 4]; 4], d_m3_h: [0.0; 4], e_m3_h: [0.0; 4], c_m33_h: 0.0, vol_y1: 0.0 }
    }
}

/// Strain operator of the Q1 vector element: `B[p][2a + c]`.
fn membrane_b(grad: &[[f64; 2]; 4]) -> [[f64; 8]; 4] {
    let mut b = [[0.0; 8]; 4];
    for p in 0..4 {
        let (al, be) = (p >> 1, p & 1);
        for a in 0..4 {
            for c in 0..2 {
                let mut v = 0.0;
                if c == al {
                    v += 0.5 * grad[a][be];
                }
                if c == be {
                    v += 0.5 * grad[a][al];
                }
                b[p][2 * a + c] = v;
            }
        }
    }
    b
}

fn contract(r: &Tensor4, x: &[f64; 4], y: &[f64; 4]) -> f64 {
    let mut s = 0.0;
    for p in 0..4 {
        for q in 0..4 {
            s += x[p] * r[p][q] * y[q];
        }
    }
    s
}

fn unit(p: usize) -> [f64; 4] {
    let mut e = [0.0; 4];
    e[p] = 1.0;
    e
}

fn membrane_dofs(mesh: &PeriodicMesh2D) -> DofMap {
    DofMap::new(2 * mesh.n_nodes(), |i| i < 2)
}

fn flexion_dofs(mesh: &PeriodicMesh2D) -> DofMap {
    DofMap::new(4 * mesh.n_nodes(), |i| i == 0)
}

fn element_membrane_dofs(mesh: &PeriodicMesh2D, e: usize) -> [usize; 8] {
    let nodes = mesh.element_nodes(e);
    core::array::from_fn(|i| 2 * nodes[i / 2] + i % 2)
}

fn element_flexion_dofs(mesh: &PeriodicMesh2D, e: usize) -> [usize; 16] {
    let nodes = mesh.element_nodes(e);
    core::array::from_fn(|i| 4 * nodes[i / 4] + i % 4)
}

/// Solves the three membrane problems and the piezoelectric problem with a
/// single factorization. Returns `([u^{11}, u^{12}, u^{22}], u³)`.
fn membrane_and_piezo(field: &CondensedFieldY, mesh: &PeriodicMesh2D) -> Result<([Vec<f64>; 3], Vec<f64>)> {
    field.check(mesh)?;
    let dofs = membrane_dofs(mesh);
    let mut sys = SparseBuilder::new(dofs.n_free(), 4);
    let h = mesh.h();
    let qp = gauss_2d(2);
    for e in 0..mesh.n_elements() {
        let ph = field.at(e);
        let loc: [Option<usize>; 8] = element_membrane_dofs(mesh, e).map(|i| dofs.free(i));
        let mut ke = [0.0; 64];
        let mut fe = [[0.0; 8]; 4];
        for (xi, w) in &qp {
            let (_, g) = q1_2d(*xi, [h, h]);
            let b = membrane_b(&g);
            let wt = w * h * h;
            for i in 0..8 {
                let bi = [b[0][i], b[1][i], b[2][i], b[3][i]];
                for j in 0..8 {
                    let bj = [b[0][j], b[1][j], b[2][j], b[3][j]];
                    ke[8 * i + j] += wt * contract(&ph.r_m, &bi, &bj);
                }
                for (l, &p) in PAIR_OF_LOADING.iter().enumerate() {
                    fe[l][i] -= wt * contract(&ph.r_m, &bi, &unit(p));
                }
                fe[3][i] -= wt * (0..4).map(|p| bi[p] * ph.d_m[p]).sum::<f64>();
            }
        }
        sys.add_block(&loc, &loc, &ke);
        for (l, f) in fe.iter().enumerate() {
            for i in 0..8 {
                sys.add_rhs(l, loc[i], f[i]);
            }
        }
    }
    let sol = solve(&sys.finish()?, Symmetry::Spd)?;
    let weights = vec![h * h; dofs.n_full()];
    let mut out: Vec<Vec<f64>> = sol
        .iter()
        .map(|x| {
            let mut u = dofs.expand(x);
            project_mean_zero(&mut u, &weights, 2, |i| Some(i % 2));
            u
        })
        .collect();
    let piezo = out.pop().unwrap_or_default();
    let m: [Vec<f64>; 3] = [out[0].clone(), out[1].clone(), out[2].clone()];
    Ok((m, piezo))
}

/// `u_M^{γδ}` for `(γδ) ∈ {11, 12, 22}`.
pub fn solve_membrane_correctors(field: &CondensedFieldY, mesh: &PeriodicMesh2D) -> Result<[Vec<f64>; 3]> {
    Ok(membrane_and_piezo(field, mesh)?.0)
}

/// `u_M³`, driven by the condensed piezoelectric coupling.
pub fn solve_piezo_corrector(field: &CondensedFieldY, mesh: &PeriodicMesh2D) -> Result<Vec<f64>> {
    Ok(membrane_and_piezo(field, mesh)?.1)
}

/// `u_N3^{γδ}` for `(γδ) ∈ {11, 12, 22}` in the periodic BFS space.
pub fn solve_flexion_correctors(field: &CondensedFieldY, mesh: &PeriodicMesh2D) -> Result<[Vec<f64>; 3]> {
    field.check(mesh)?;
    let dofs = flexion_dofs(mesh);
    let mut sys = SparseBuilder::new(dofs.n_free(), 3);
    let h = mesh.h();
    let qp = gauss_2d(4);
    for e in 0..mesh.n_elements() {
        let ph = field.at(e);
        let loc: [Option<usize>; 16] = element_flexion_dofs(mesh, e).map(|i| dofs.free(i));
        let mut ke = [0.0; 256];
        let mut fe = [[0.0; 16]; 3];
        for (xi, w) in &qp {
            let ev = bfs(*xi, [h, h]);
            let wt = w * h * h;
            for i in 0..16 {
                for j in 0..16 {
                    ke[16 * i + j] += wt * contract(&ph.r_n, &ev.hess[i], &ev.hess[j]);
                }
                for (l, &p) in PAIR_OF_LOADING.iter().enumerate() {
                    fe[l][i] -= wt * contract(&ph.r_n, &ev.hess[i], &unit(p));
                }
            }
        }
        sys.add_block(&loc, &loc, &ke);
        for (l, f) in fe.iter().enumerate() {
            for i in 0..16 {
                sys.add_rhs(l, loc[i], f[i]);
            }
        }
    }
    let sol = solve(&sys.finish()?, Symmetry::Spd)?;
    let weights = vec![h * h; dofs.n_full()];
    let out: Vec<Vec<f64>> = sol
        .iter()
        .map(|x| {
            let mut u = dofs.expand(x);
            project_mean_zero(&mut u, &weights, 1, |i| (i % 4 == 0).then_some(0));
            u
        })
        .collect();
    Ok([out[0].clone(), out[1].clone(), out[2].clone()])
}

pub fn solve_correctors(field: &CondensedFieldY, mesh: &PeriodicMesh2D) -> Result<CellCorrectors2D> {
    let (membrane, piezo) = membrane_and_piezo(field, mesh)?;
    let flexion = solve_flexion_correctors(field, mesh)?;
    Ok(CellCorrectors2D { membrane, flexion, piezo })
}

/// Symmetrized in-plane strain of a Q1 vector field at a point of element `e`.
pub fn membrane_strain(mesh: &PeriodicMesh2D, u: &[f64], e: usize, xi: [f64; 2]) -> [f64; 4] {
    let h = mesh.h();
    let (_, g) = q1_2d(xi, [h, h]);
    let b = membrane_b(&g);
    let d = element_membrane_dofs(mesh, e);
    core::array::from_fn(|p| (0..8).map(|i| b[p][i] * u[d[i]]).sum())
}

/// Hessian `(∂₁₁, ∂₁₂, ∂₂₁, ∂₂₂)` of a BFS field at a point of element `e`.
pub fn flexion_hessian(mesh: &PeriodicMesh2D, w: &[f64], e: usize, xi: [f64; 2]) -> [f64; 4] {
    let h = mesh.h();
    let ev = bfs(xi, [h, h]);
    let d = element_flexion_dofs(mesh, e);
    core::array::from_fn(|p| (0..16).map(|i| ev.hess[i][p] * w[d[i]]).sum())
}

/// `∫_Y (K̄ + S(v)) R_M (K̄ + S(v)) dy` for a periodic Q1 field `v`.
pub fn membrane_energy(field: &CondensedFieldY, mesh: &PeriodicMesh2D, kbar: &[f64; 4], v: &[f64]) -> f64 {
    let h = mesh.h();
    let qp = gauss_2d(2);
    let mut s = 0.0;
    for e in 0..mesh.n_elements() {
        let r = &field.at(e).r_m;
        for (xi, w) in &qp {
            let sv = membrane_strain(mesh, v, e, *xi);
            let k: [f64; 4] = core::array::from_fn(|p| kbar[p] + sv[p]);
            s += w * h * h * contract(r, &k, &k);
        }
    }
    s
}

/// Evaluates the effective tensors from solved correctors.
pub fn effective_tensors_thin(
    corr: &CellCorrectors2D,
    field: &CondensedFieldY,
    mesh: &PeriodicMesh2D,
) -> EffectiveTensorsThin {
    let h = mesh.h();
    let mut out = EffectiveTensorsThin::zero();
    out.vol_y1 = mesh.inclusion_area();
    let qm = gauss_2d(2);
    let qf = gauss_2d(4);
    for e in 0..mesh.n_elements() {
        let ph = field.at(e);
        for (xi, w) in &qm {
            let wt = w * h * h;
            let sm: [[f64; 4]; 3] = core::array::from_fn(|l| membrane_strain(mesh, &corr.membrane[l], e, *xi));
            let s3 = membrane_strain(mesh, &corr.piezo, e, *xi);
            let total: [[f64; 4]; 4] = core::array::from_fn(|p| {
                let s = sm[LOADING_OF_PAIR[p]];
                let mut t = unit(p);
                t.iter_mut().zip(s).for_each(|(a, b)| *a += b);
                t
            });
            let rs3: [f64; 4] = core::array::from_fn(|p| (0..4).map(|q| ph.r_m[p][q] * s3[q]).sum());
            for p in 0..4 {
                for q in 0..4 {
                    out.r_m_h[p][q] += wt * contract(&ph.r_m, &total[p], &total[q]);
                }
                out.d_m3_h[p] += wt * (0..4).map(|k| total[p][k] * (rs3[k] + ph.d_m[k])).sum::<f64>();
                out.e_m3_h[p] += wt * (0..4).map(|k| (rs3[k] + ph.d_m_lower[k]) * total[p][k]).sum::<f64>();
            }
            out.c_m33_h += wt * ((0..4).map(|k| s3[k] * rs3[k]).sum::<f64>() + ph.c_m33);
        }
        for (xi, w) in &qf {
            let wt = w * h * h;
            let total: [[f64; 4]; 4] = core::array::from_fn(|p| {
                let s = flexion_hessian(mesh, &corr.flexion[LOADING_OF_PAIR[p]], e, *xi);
                let mut t = unit(p);
                t.iter_mut().zip(s).for_each(|(a, b)| *a += b);
                t
            });
            for p in 0..4 {
                for q in 0..4 {
                    out.r_n_h[p][q] += wt * contract(&ph.r_n, &total[p], &total[q]);
                }
            }
        }
    }
    out
}

/// Solves all cell problems and evaluates the effective tensors.
pub fn homogenize_thin(
    field: &CondensedFieldY,
    mesh: &PeriodicMesh2D,
) -> Result<(CellCorrectors2D, EffectiveTensorsThin)> {
    let corr = solve_correctors(field, mesh)?;
    let eff = effective_tensors_thin(&corr, field, mesh);
    Ok((corr, eff))
}
