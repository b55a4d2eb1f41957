//! Effective Kirchhoff–Love plate solvers on a rectangle `ω`.
//!
//! Membrane displacements use Q1 elements, deflections use
//! Bogner–Fox–Schmit elements, and the transverse voltage `L₃⁰` is
//! discontinuous Q1 per element, coupled across faces by a symmetric
//! interior penalty when the inter-inclusion admittance `G₁` is positive.

mod loads;

use alloc::vec;
use alloc::vec::Vec;

pub use loads::{reduce_loads, ElectricBc, Loads, ReducedLoads};

use crate::cell2d::EffectiveTensorsThin;
use crate::cell3d::EffectiveTensorsComparable;
use crate::dense::{self, Dense};
use crate::femcore::{
    bfs, gauss, gauss_2d, q1_2d, solve, DofMap, Edge, PlateMesh, SparseBuilder, SparseSystem, Symmetry,
};
use crate::material::{local_reduction, Tensor2, Tensor4};
use crate::poly::Polynomial;
use crate::{Error, Result};

/// Interior-penalty parameter (scaled by the inverse face-normal mesh size).
pub const SIPG_PENALTY: f64 = 16.0;

/// Discrete Kirchhoff–Love space with the optional voltage space.
#[derive(Debug, Clone, PartialEq)]
pub struct KLSpace {
    /// DOF `2·node + α`, zero on clamped nodes.
    pub membrane: DofMap,
    /// DOF `4·node + kind`, all four kinds zero on clamped nodes.
    pub flexion: DofMap,
    /// DOF `4·element + corner`.
    pub voltage: DofMap,
}

impl KLSpace {
    pub fn new(mesh: &PlateMesh) -> Self {
        Self {
            membrane: DofMap::new(2 * mesh.n_nodes(), |i| mesh.node_clamped(i / 2)),
            flexion: DofMap::new(4 * mesh.n_nodes(), |i| mesh.node_clamped(i / 4)),
            voltage: DofMap::new(4 * mesh.n_elements(), |_| false),
        }
    }
}

/// Solution of an effective plate problem, in full DOF numbering.
#[derive(Debug, Clone, PartialEq)]
pub struct PlateSolution {
    pub membrane: Vec<f64>,
    pub deflection: Vec<f64>,
    /// Corner values of `L₃⁰` per element.
    pub voltage: Vec<f64>,
    /// `a(U, U)` of the assembled system(s).
    pub energy: f64,
    /// `ℓ(U)`.
    pub work: f64,
    /// Largest relative residual of the solved systems.
    pub residual: f64,
}

impl PlateSolution {
    pub fn deflection_at_node(&self, node: usize) -> f64 {
        self.deflection[4 * node]
    }

    pub fn max_deflection(&self) -> f64 {
        self.deflection.iter().step_by(4).fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Area average of `L₃⁰` over `ω`.
    pub fn mean_voltage(&self) -> f64 {
        if self.voltage.is_empty() {
            0.0
        } else {
            self.voltage.iter().sum::<f64>() / self.voltage.len() as f64
        }
    }

    /// Deflection at a point of `ω`.
    pub fn deflection_at(&self, mesh: &PlateMesh, x: [f64; 2]) -> f64 {
        let (e, xi) = locate(mesh, x);
        let ev = bfs(xi, mesh.h());
        let nodes = mesh.element_nodes(e);
        (0..16).map(|i| ev.val[i] * self.deflection[4 * nodes[i / 4] + i % 4]).sum()
    }

    /// Second derivatives `(∂₁₁, ∂₁₂, ∂₂₁, ∂₂₂)` of the deflection at a point of `ω`.
    pub fn deflection_hessian_at(&self, mesh: &PlateMesh, x: [f64; 2]) -> [f64; 4] {
        let (e, xi) = locate(mesh, x);
        let ev = bfs(xi, mesh.h());
        let nodes = mesh.element_nodes(e);
        core::array::from_fn(|p| (0..16).map(|i| ev.hess[i][p] * self.deflection[4 * nodes[i / 4] + i % 4]).sum())
    }

    /// Membrane displacement at a point of `ω`.
    pub fn membrane_at(&self, mesh: &PlateMesh, x: [f64; 2]) -> [f64; 2] {
        let (e, xi) = locate(mesh, x);
        let (n, _) = q1_2d(xi, mesh.h());
        let nodes = mesh.element_nodes(e);
        core::array::from_fn(|c| (0..4).map(|a| n[a] * self.membrane[2 * nodes[a] + c]).sum())
    }

    /// `L₃⁰` at a point of `ω`.
    pub fn voltage_at(&self, mesh: &PlateMesh, x: [f64; 2]) -> f64 {
        let (e, xi) = locate(mesh, x);
        let (n, _) = q1_2d(xi, mesh.h());
        (0..4).map(|a| n[a] * self.voltage[4 * e + a]).sum()
    }

    /// Largest absolute DOF difference with another solution.
    pub fn max_difference(&self, other: &Self) -> f64 {
        let d = |a: &[f64], b: &[f64]| a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        d(&self.membrane, &other.membrane)
            .max(d(&self.deflection, &other.deflection))
            .max(d(&self.voltage, &other.voltage))
    }
}

fn locate(mesh: &PlateMesh, x: [f64; 2]) -> (usize, [f64; 2]) {
    let h = mesh.h();
    let cell = |x: f64, h: f64, n: usize| (libm::floor(x / h).max(0.0) as usize).min(n - 1);
    let (i, j) = (cell(x[0], h[0], mesh.nx), cell(x[1], h[1], mesh.ny));
    (i + mesh.nx * j, [(x[0] - i as f64 * h[0]) / h[0], (x[1] - j as f64 * h[1]) / h[1]])
}

/// Strain operator of Q1 vector basis function `2a + c`: `s_p`, `p ∈ (11, 12, 21, 22)`.
fn membrane_strains(grad: &[[f64; 2]; 4]) -> [[f64; 4]; 8] {
    core::array::from_fn(|i| {
        let (a, c) = (i / 2, i % 2);
        core::array::from_fn(|p| {
            let (al, be) = (p >> 1, p & 1);
            let mut v = 0.0;
            if c == al {
                v += 0.5 * grad[a][be];
            }
            if c == be {
                v += 0.5 * grad[a][al];
            }
            v
        })
    })
}

/// Basis data at one quadrature point of the reference element.
struct Qp {
    xi: [f64; 2],
    w: f64,
    mem: [[f64; 4]; 8],
    mem_val: [f64; 4],
    flx: [[f64; 4]; 16],
    flx_val: [f64; 16],
    flx_grad: [[f64; 2]; 16],
    volt_grad: [[f64; 2]; 4],
}

struct Kernels {
    qp: Vec<Qp>,
    h: [f64; 2],
}

impl Kernels {
    fn new(mesh: &PlateMesh) -> Self {
        let h = mesh.h();
        let qp = gauss_2d(4)
            .into_iter()
            .map(|(xi, w)| {
                let (n, g) = q1_2d(xi, h);
                let ev = bfs(xi, h);
                Qp {
                    xi,
                    w: w * h[0] * h[1],
                    mem: membrane_strains(&g),
                    mem_val: n,
                    flx: ev.hess,
                    flx_val: ev.val,
                    flx_grad: ev.grad,
                    volt_grad: g,
                }
            })
            .collect();
        Self { qp, h }
    }

    fn block(&self, nr: usize, nc: usize, f: impl Fn(&Qp, usize, usize) -> f64) -> Vec<f64> {
        let mut k = vec![0.0; nr * nc];
        for q in &self.qp {
            for i in 0..nr {
                for j in 0..nc {
                    k[nc * i + j] += q.w * f(q, i, j);
                }
            }
        }
        k
    }
}

fn t4(a: &[f64; 4], r: &Tensor4, b: &[f64; 4]) -> f64 {
    let mut s = 0.0;
    for p in 0..4 {
        for q in 0..4 {
            s += a[p] * r[p][q] * b[q];
        }
    }
    s
}

fn t2(a: &[f64; 4], d: &Tensor2) -> f64 {
    (0..4).map(|p| a[p] * d[p]).sum()
}

fn scale4(r: &Tensor4, t: f64) -> Tensor4 {
    r.map(|row| row.map(|v| v * t))
}

fn scale2(d: &Tensor2, t: f64) -> Tensor2 {
    d.map(|v| v * t)
}

fn is_symmetric(r: &Tensor4) -> bool {
    let m = r.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    (0..4).all(|p| (0..4).all(|q| (r[p][q] - r[q][p]).abs() <= 1e-13 * m.max(1.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Membrane,
    Voltage,
    Flexion,
}

/// Offsets of the unknown blocks in a (possibly coupled) global system.
struct Layout<'a> {
    space: &'a KLSpace,
    fields: Vec<Field>,
    offsets: [usize; 3],
    n: usize,
}

impl<'a> Layout<'a> {
    fn new(space: &'a KLSpace, fields: &[Field]) -> Self {
        let mut offsets = [usize::MAX; 3];
        let mut n = 0;
        for f in fields {
            offsets[*f as usize] = n;
            n += Self::map_of(space, *f).n_free();
        }
        Self { space, fields: fields.to_vec(), offsets, n }
    }

    fn map_of(space: &KLSpace, f: Field) -> &DofMap {
        match f {
            Field::Membrane => &space.membrane,
            Field::Voltage => &space.voltage,
            Field::Flexion => &space.flexion,
        }
    }

    fn element_dofs(&self, mesh: &PlateMesh, f: Field, e: usize) -> Vec<Option<usize>> {
        let nodes = mesh.element_nodes(e);
        let full: Vec<usize> = match f {
            Field::Membrane => (0..8).map(|i| 2 * nodes[i / 2] + i % 2).collect(),
            Field::Voltage => (0..4).map(|a| 4 * e + a).collect(),
            Field::Flexion => (0..16).map(|i| 4 * nodes[i / 4] + i % 4).collect(),
        };
        let map = Self::map_of(self.space, f);
        let off = self.offsets[f as usize];
        full.into_iter().map(|i| map.free(i).map(|k| k + off)).collect()
    }

    fn extract(&self, f: Field, x: &[f64]) -> Vec<f64> {
        let map = Self::map_of(self.space, f);
        if !self.fields.contains(&f) {
            return vec![0.0; map.n_full()];
        }
        let off = self.offsets[f as usize];
        map.expand(&x[off..off + map.n_free()])
    }
}

/// Right-hand side data beyond the mechanical loads.
#[derive(Default)]
struct Sources<'a> {
    /// `∫ s(v̄)·d φ`.
    membrane_piezo: Option<(Tensor2, &'a Polynomial)>,
    /// `∫ ∂²v₃·d φ`.
    flexion_piezo: Option<(Tensor2, &'a Polynomial)>,
    /// `∫ L̃ t h`.
    voltage: Option<(f64, &'a Polynomial)>,
}

struct Problem<'a> {
    mesh: &'a PlateMesh,
    kern: Kernels,
    layout: Layout<'a>,
    builder: SparseBuilder,
}

impl<'a> Problem<'a> {
    fn new(mesh: &'a PlateMesh, space: &'a KLSpace, fields: &[Field]) -> Self {
        let layout = Layout::new(space, fields);
        let builder = SparseBuilder::new(layout.n, 1);
        Self { mesh, kern: Kernels::new(mesh), layout, builder }
    }

    fn add_block(&mut self, row: Field, col: Field, ke: &[f64]) {
        for e in 0..self.mesh.n_elements() {
            let r = self.layout.element_dofs(self.mesh, row, e);
            let c = self.layout.element_dofs(self.mesh, col, e);
            self.builder.add_block(&r, &c, ke);
        }
    }

    fn membrane_membrane(&mut self, r: &Tensor4) {
        let ke = self.kern.block(8, 8, |q, i, j| t4(&q.mem[i], r, &q.mem[j]));
        self.add_block(Field::Membrane, Field::Membrane, &ke);
    }

    fn flexion_flexion(&mut self, r: &Tensor4) {
        let ke = self.kern.block(16, 16, |q, i, j| t4(&q.flx[i], r, &q.flx[j]));
        self.add_block(Field::Flexion, Field::Flexion, &ke);
    }

    fn membrane_flexion(&mut self, r_mn: &Tensor4, r_nm: &Tensor4) {
        let ke = self.kern.block(8, 16, |q, i, j| t4(&q.mem[i], r_mn, &q.flx[j]));
        self.add_block(Field::Membrane, Field::Flexion, &ke);
        let ke = self.kern.block(16, 8, |q, i, j| t4(&q.flx[i], r_nm, &q.mem[j]));
        self.add_block(Field::Flexion, Field::Membrane, &ke);
    }

    /// `∫ s(v̄)·d L` and `∫ L̃ e·s(ū)`.
    fn membrane_voltage(&mut self, d: &Tensor2, e: &Tensor2) {
        let ke = self.kern.block(8, 4, |q, i, j| t2(&q.mem[i], d) * q.mem_val[j]);
        self.add_block(Field::Membrane, Field::Voltage, &ke);
        let ke = self.kern.block(4, 8, |q, i, j| q.mem_val[i] * t2(&q.mem[j], e));
        self.add_block(Field::Voltage, Field::Membrane, &ke);
    }

    /// `∫ ∂²v₃·d L` and `∫ L̃ e·∂²u₃`.
    fn flexion_voltage(&mut self, d: &Tensor2, e: &Tensor2) {
        let ke = self.kern.block(16, 4, |q, i, j| t2(&q.flx[i], d) * q.mem_val[j]);
        self.add_block(Field::Flexion, Field::Voltage, &ke);
        let ke = self.kern.block(4, 16, |q, i, j| q.mem_val[i] * t2(&q.flx[j], e));
        self.add_block(Field::Voltage, Field::Flexion, &ke);
    }

    /// `mass ∫ L̃ L + diffusion a_DG(L̃, L)`.
    fn voltage_voltage(&mut self, mass: f64, diffusion: f64) {
        let ke = self.kern.block(4, 4, |q, i, j| {
            mass * q.mem_val[i] * q.mem_val[j]
                + diffusion * (q.volt_grad[i][0] * q.volt_grad[j][0] + q.volt_grad[i][1] * q.volt_grad[j][1])
        });
        self.add_block(Field::Voltage, Field::Voltage, &ke);
        if diffusion != 0.0 {
            self.interior_faces(diffusion);
        }
    }

    /// Consistency, symmetry and penalty terms of the interior-penalty
    /// discretization on interior faces.
    fn interior_faces(&mut self, coef: f64) {
        let (nx, ny, h) = (self.mesh.nx, self.mesh.ny, self.kern.h);
        for dir in 0..2 {
            // dir 0: vertical faces (normal x), dir 1: horizontal faces (normal y)
            let hn = h[dir];
            let lt = h[1 - dir];
            let mut ke = vec![0.0; 64];
            for (s, w) in gauss(3) {
                let (xa, xb) = if dir == 0 { ([1.0, s], [0.0, s]) } else { ([s, 1.0], [s, 0.0]) };
                let (na, ga) = q1_2d(xa, h);
                let (nb, gb) = q1_2d(xb, h);
                let jump: [f64; 8] = core::array::from_fn(|i| if i < 4 { na[i] } else { -nb[i - 4] });
                let avg: [f64; 8] = core::array::from_fn(|i| if i < 4 { 0.5 * ga[i][dir] } else { 0.5 * gb[i - 4][dir] });
                for i in 0..8 {
                    for j in 0..8 {
                        ke[8 * i + j] += coef
                            * w
                            * lt
                            * (-(avg[i] * jump[j] + avg[j] * jump[i]) + SIPG_PENALTY / hn * jump[i] * jump[j]);
                    }
                }
            }
            let pairs: Vec<(usize, usize)> = if dir == 0 {
                (0..ny).flat_map(|j| (0..nx - 1).map(move |i| (i + nx * j, i + 1 + nx * j))).collect()
            } else {
                (0..ny - 1).flat_map(|j| (0..nx).map(move |i| (i + nx * j, i + nx * (j + 1)))).collect()
            };
            for (a, b) in pairs {
                let mut dofs = self.layout.element_dofs(self.mesh, Field::Voltage, a);
                dofs.extend(self.layout.element_dofs(self.mesh, Field::Voltage, b));
                self.builder.add_block(&dofs, &dofs, &ke);
            }
        }
    }

    fn loads(&mut self, red: &ReducedLoads, src: &Sources) {
        let has = |f: Field| self.layout.fields.contains(&f);
        let (has_m, has_v, has_f) = (has(Field::Membrane), has(Field::Voltage), has(Field::Flexion));
        for e in 0..self.mesh.n_elements() {
            let o = self.mesh.element_origin(e);
            let mut fm = [0.0; 8];
            let mut fv = [0.0; 4];
            let mut ff = [0.0; 16];
            for q in &self.kern.qp {
                let x = [o[0] + q.xi[0] * self.kern.h[0], o[1] + q.xi[1] * self.kern.h[1], 0.0];
                if has_m {
                    let fb = [red.f_bar[0].eval(x), red.f_bar[1].eval(x)];
                    let piezo = src.membrane_piezo.map(|(d, p)| (d, p.eval(x)));
                    for i in 0..8 {
                        let mut v = fb[i % 2] * q.mem_val[i / 2];
                        if let Some((d, phi)) = piezo {
                            v += t2(&q.mem[i], &d) * phi;
                        }
                        fm[i] += q.w * v;
                    }
                }
                if has_f {
                    let (mb, f3) = ([red.m_bar[0].eval(x), red.m_bar[1].eval(x)], red.f3.eval(x));
                    let piezo = src.flexion_piezo.map(|(d, p)| (d, p.eval(x)));
                    for i in 0..16 {
                        let mut v = f3 * q.flx_val[i] + mb[0] * q.flx_grad[i][0] + mb[1] * q.flx_grad[i][1];
                        if let Some((d, phi)) = piezo {
                            v += t2(&q.flx[i], &d) * phi;
                        }
                        ff[i] += q.w * v;
                    }
                }
                if has_v {
                    if let Some((t, hp)) = src.voltage {
                        let hv = t * hp.eval(x);
                        for a in 0..4 {
                            fv[a] += q.w * hv * q.mem_val[a];
                        }
                    }
                }
            }
            self.scatter_rhs(e, &fm, &fv, &ff);
        }
        self.edge_loads(red);
    }

    fn scatter_rhs(&mut self, e: usize, fm: &[f64], fv: &[f64], ff: &[f64]) {
        for (f, vals) in [(Field::Membrane, fm), (Field::Voltage, fv), (Field::Flexion, ff)] {
            if !self.layout.fields.contains(&f) {
                continue;
            }
            let d = self.layout.element_dofs(self.mesh, f, e);
            for (i, v) in d.iter().zip(vals) {
                self.builder.add_rhs(0, *i, *v);
            }
        }
    }

    fn edge_loads(&mut self, red: &ReducedLoads) {
        if red.edge_f_bar.iter().chain(&red.edge_m_bar).all(|p| p.is_zero()) && red.edge_f3.is_zero() {
            return;
        }
        let h = self.kern.h;
        for (e, edge) in self.mesh.free_edge_faces() {
            let o = self.mesh.element_origin(e);
            let mut fm = [0.0; 8];
            let mut ff = [0.0; 16];
            for (s, w) in gauss(4) {
                let (xi, len) = match edge {
                    Edge::Left => ([0.0, s], h[1]),
                    Edge::Right => ([1.0, s], h[1]),
                    Edge::Bottom => ([s, 0.0], h[0]),
                    Edge::Top => ([s, 1.0], h[0]),
                };
                let x = [o[0] + xi[0] * h[0], o[1] + xi[1] * h[1], 0.0];
                let wt = w * len;
                let (n, _) = q1_2d(xi, h);
                let ev = bfs(xi, h);
                let fb = [red.edge_f_bar[0].eval(x), red.edge_f_bar[1].eval(x)];
                let mb = [red.edge_m_bar[0].eval(x), red.edge_m_bar[1].eval(x)];
                let f3 = red.edge_f3.eval(x);
                for i in 0..8 {
                    fm[i] += wt * fb[i % 2] * n[i / 2];
                }
                for i in 0..16 {
                    ff[i] += wt * (f3 * ev.val[i] + mb[0] * ev.grad[i][0] + mb[1] * ev.grad[i][1]);
                }
            }
            self.scatter_rhs(e, &fm, &[0.0; 4], &ff);
        }
    }

    fn solve(self, symmetry: Symmetry) -> Result<(Vec<f64>, f64, f64, f64, Layout<'a>)> {
        let sys: SparseSystem = self.builder.finish()?;
        let x = solve(&sys, symmetry)?.pop().unwrap_or_default();
        let b = &sys.rhs[0];
        let residual = sys.relative_residual(&x, b);
        let energy = sys.bilinear(&x, &x);
        let work: f64 = x.iter().zip(b).map(|(a, b)| a * b).sum();
        Ok((x, energy, work, residual, self.layout))
    }
}

fn symmetry_of(tensors: &[&Tensor4]) -> Symmetry {
    if tensors.iter().all(|r| is_symmetric(r)) {
        Symmetry::Spd
    } else {
        Symmetry::General
    }
}

fn solve_membrane(
    mesh: &PlateMesh,
    space: &KLSpace,
    r: &Tensor4,
    red: &ReducedLoads,
    src: &Sources,
) -> Result<(Vec<f64>, f64, f64, f64)> {
    let mut p = Problem::new(mesh, space, &[Field::Membrane]);
    p.membrane_membrane(r);
    p.loads(red, src);
    let (x, en, wk, res, lay) = p.solve(symmetry_of(&[r]))?;
    Ok((lay.extract(Field::Membrane, &x), en, wk, res))
}

fn solve_flexion(mesh: &PlateMesh, space: &KLSpace, r: &Tensor4, red: &ReducedLoads) -> Result<(Vec<f64>, f64, f64, f64)> {
    let mut p = Problem::new(mesh, space, &[Field::Flexion]);
    p.flexion_flexion(r);
    p.loads(red, &Sources::default());
    let (x, en, wk, res, lay) = p.solve(symmetry_of(&[r]))?;
    Ok((lay.extract(Field::Flexion, &x), en, wk, res))
}

/// Element-corner values of a polynomial.
fn interpolate_voltage(mesh: &PlateMesh, p: &Polynomial) -> Vec<f64> {
    let mut out = vec![0.0; 4 * mesh.n_elements()];
    for e in 0..mesh.n_elements() {
        for (a, node) in mesh.element_nodes(e).iter().enumerate() {
            let x = mesh.node_coords(*node);
            out[4 * e + a] = p.eval([x[0], x[1], 0.0]);
        }
    }
    out
}

/// Prescribed-voltage thin model: decoupled membrane (`2R_M^H`, driven by
/// `-2 d^H φ_c`) and flexion (`(2/3)R_N^H`) problems; `L₃⁰ = φ_c`.
pub fn solve_dirichlet_thin(e5: &EffectiveTensorsThin, loads: &Loads, mesh: &PlateMesh) -> Result<PlateSolution> {
    loads.check(&ElectricBc::Dirichlet)?;
    let space = KLSpace::new(mesh);
    let red = reduce_loads(loads);
    let src = Sources { membrane_piezo: Some((scale2(&e5.d_m3_h, -2.0), &loads.phi_c)), ..Default::default() };
    let (membrane, e1, w1, r1) = solve_membrane(mesh, &space, &scale4(&e5.r_m_h, 2.0), &red, &src)?;
    let (deflection, e2, w2, r2) = solve_flexion(mesh, &space, &scale4(&e5.r_n_h, 2.0 / 3.0), &red)?;
    Ok(PlateSolution {
        membrane,
        deflection,
        voltage: interpolate_voltage(mesh, &loads.phi_c),
        energy: e1 + e2,
        work: w1 + w2,
        residual: r1.max(r2),
    })
}

fn circuit_denominator(e5: &EffectiveTensorsThin, g: f64) -> Result<f64> {
    let den = e5.c_m33_h + 2.0 * e5.vol_y1 * g;
    if !(den > 0.0) {
        return Err(Error::DegenerateCircuit(den));
    }
    Ok(den)
}

/// `L₃⁰ = (|Y₁| h - e^H·s(ū)) / (c^H + 2|Y₁|G)` at one point.
pub fn recover_voltage_local(e5: &EffectiveTensorsThin, g: f64, strain: &[f64; 4], h: f64) -> Result<f64> {
    let den = circuit_denominator(e5, g)?;
    Ok((e5.vol_y1 * h - t2(strain, &e5.e_m3_h)) / den)
}

/// Element-wise L² projection onto Q1 of the local voltage formula.
pub fn recover_voltage_field(
    e5: &EffectiveTensorsThin,
    g: f64,
    membrane: &[f64],
    h: &Polynomial,
    mesh: &PlateMesh,
) -> Result<Vec<f64>> {
    circuit_denominator(e5, g)?;
    let kern = Kernels::new(mesh);
    let mass = Dense::from_fn(4, 4, |i, j| kern.qp.iter().map(|q| q.w * q.mem_val[i] * q.mem_val[j]).sum());
    let inv = dense::invert(&mass).ok_or(Error::DegenerateMaterial("element mass matrix"))?;
    let mut out = vec![0.0; 4 * mesh.n_elements()];
    for e in 0..mesh.n_elements() {
        let o = mesh.element_origin(e);
        let nodes = mesh.element_nodes(e);
        let mut rhs = [0.0; 4];
        for q in &kern.qp {
            let s: [f64; 4] =
                core::array::from_fn(|p| (0..8).map(|i| q.mem[i][p] * membrane[2 * nodes[i / 2] + i % 2]).sum());
            let x = [o[0] + q.xi[0] * kern.h[0], o[1] + q.xi[1] * kern.h[1], 0.0];
            let l = recover_voltage_local(e5, g, &s, h.eval(x))?;
            for a in 0..4 {
                rhs[a] += q.w * l * q.mem_val[a];
            }
        }
        let v = inv.matvec(&rhs);
        out[4 * e..4 * e + 4].copy_from_slice(&v);
    }
    Ok(out)
}

/// Local-circuit thin model: the voltage is eliminated pointwise, leaving
/// the membrane tensor `R_M^{H,loc}` and an `h`-driven membrane source.
pub fn solve_local_mixed_thin(
    e5: &EffectiveTensorsThin,
    g: f64,
    loads: &Loads,
    mesh: &PlateMesh,
) -> Result<PlateSolution> {
    loads.check(&ElectricBc::LocalMixed { g })?;
    let den = circuit_denominator(e5, g)?;
    let r_loc = local_reduction(e5, g)?;
    let space = KLSpace::new(mesh);
    let red = reduce_loads(loads);
    let src = Sources {
        membrane_piezo: Some((scale2(&e5.d_m3_h, -2.0 * e5.vol_y1 / den), &loads.h)),
        ..Default::default()
    };
    let (membrane, e1, w1, r1) = solve_membrane(mesh, &space, &scale4(&r_loc, 2.0), &red, &src)?;
    let (deflection, e2, w2, r2) = solve_flexion(mesh, &space, &scale4(&e5.r_n_h, 2.0 / 3.0), &red)?;
    let voltage = recover_voltage_field(e5, g, &membrane, &loads.h, mesh)?;
    Ok(PlateSolution { membrane, deflection, voltage, energy: e1 + e2, work: w1 + w2, residual: r1.max(r2) })
}

/// Nonlocal-circuit thin model: coupled `(ū, L₃⁰)` system plus the
/// decoupled flexion problem.
pub fn solve_nonlocal_mixed_thin(
    e5: &EffectiveTensorsThin,
    g: f64,
    g1: f64,
    loads: &Loads,
    mesh: &PlateMesh,
) -> Result<PlateSolution> {
    loads.check(&ElectricBc::NonlocalMixed { g, g1 })?;
    let den = circuit_denominator(e5, g)?;
    let space = KLSpace::new(mesh);
    let red = reduce_loads(loads);
    let mut p = Problem::new(mesh, &space, &[Field::Membrane, Field::Voltage]);
    p.membrane_membrane(&scale4(&e5.r_m_h, 2.0));
    p.membrane_voltage(&scale2(&e5.d_m3_h, 2.0), &scale2(&e5.e_m3_h, 2.0));
    p.voltage_voltage(2.0 * den, 4.0 * e5.vol_y1 * g1);
    p.loads(&red, &Sources { voltage: Some((2.0 * e5.vol_y1, &loads.h)), ..Default::default() });
    let (x, e1, w1, r1, lay) = p.solve(Symmetry::General)?;
    let (deflection, e2, w2, r2) = solve_flexion(mesh, &space, &scale4(&e5.r_n_h, 2.0 / 3.0), &red)?;
    Ok(PlateSolution {
        membrane: lay.extract(Field::Membrane, &x),
        deflection,
        voltage: lay.extract(Field::Voltage, &x),
        energy: e1 + e2,
        work: w1 + w2,
        residual: r1.max(r2),
    })
}

/// Which piezoelectric tensor drives the flexion row of the prescribed-
/// voltage comparable model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FlexionPiezoRow {
    /// `d^H_MM3` in both rows.
    #[default]
    AsPrinted,
    /// `d^H_NM3` in the flexion row.
    FlexionBlock,
}

/// Prescribed-voltage comparable model: coupled membrane/flexion system.
pub fn solve_dirichlet_comparable(
    e6: &EffectiveTensorsComparable,
    loads: &Loads,
    mesh: &PlateMesh,
    row: FlexionPiezoRow,
) -> Result<PlateSolution> {
    loads.check(&ElectricBc::Dirichlet)?;
    let space = KLSpace::new(mesh);
    let red = reduce_loads(loads);
    let mut p = Problem::new(mesh, &space, &[Field::Membrane, Field::Flexion]);
    p.membrane_membrane(&e6.r_mm_h);
    p.flexion_flexion(&e6.r_nn_h);
    p.membrane_flexion(&e6.r_mn_h, &e6.r_nm_h);
    let d_flex = match row {
        FlexionPiezoRow::AsPrinted => e6.d_mm3_h,
        FlexionPiezoRow::FlexionBlock => e6.d_nm3_h,
    };
    let src = Sources {
        membrane_piezo: Some((scale2(&e6.d_mm3_h, -1.0), &loads.phi_c)),
        flexion_piezo: Some((scale2(&d_flex, -1.0), &loads.phi_c)),
        ..Default::default()
    };
    p.loads(&red, &src);
    let (x, energy, work, residual, lay) = p.solve(Symmetry::General)?;
    Ok(PlateSolution {
        membrane: lay.extract(Field::Membrane, &x),
        deflection: lay.extract(Field::Flexion, &x),
        voltage: interpolate_voltage(mesh, &loads.phi_c),
        energy,
        work,
        residual,
    })
}

/// Circuit comparable model: coupled `(ū, L₃⁰, u₃)` system. With `G₁ = 0`
/// the voltage is element-wise (local circuits).
pub fn solve_mixed_comparable(
    e6: &EffectiveTensorsComparable,
    g: f64,
    g1: f64,
    loads: &Loads,
    mesh: &PlateMesh,
) -> Result<PlateSolution> {
    loads.check(&ElectricBc::NonlocalMixed { g, g1 })?;
    let space = KLSpace::new(mesh);
    let red = reduce_loads(loads);
    let mut p = Problem::new(mesh, &space, &[Field::Membrane, Field::Voltage, Field::Flexion]);
    p.membrane_membrane(&e6.r_mm_h);
    p.flexion_flexion(&e6.r_nn_h);
    p.membrane_flexion(&e6.r_mn_h, &e6.r_nm_h);
    p.membrane_voltage(&e6.d_mm3_h, &e6.e_mm3_h);
    p.flexion_voltage(&e6.d_nm3_h, &e6.e_mn3_h);
    let mass = e6.c_mm33_h + 4.0 * e6.vol_y1 * g;
    if !(mass > 0.0) {
        return Err(Error::DegenerateCircuit(mass));
    }
    p.voltage_voltage(mass, 4.0 * e6.vol_y1 * g1);
    p.loads(&red, &Sources { voltage: Some((2.0 * e6.vol_y1, &loads.h)), ..Default::default() });
    let (x, energy, work, residual, lay) = p.solve(Symmetry::General)?;
    Ok(PlateSolution {
        membrane: lay.extract(Field::Membrane, &x),
        deflection: lay.extract(Field::Flexion, &x),
        voltage: lay.extract(Field::Voltage, &x),
        energy,
        work,
        residual,
    })
}

/// Dispatches to the thin-regime solver for `bc`.
pub fn solve_thin(e5: &EffectiveTensorsThin, bc: ElectricBc, loads: &Loads, mesh: &PlateMesh) -> Result<PlateSolution> {
    match bc {
        ElectricBc::Dirichlet => solve_dirichlet_thin(e5, loads, mesh),
        ElectricBc::LocalMixed { g } => solve_local_mixed_thin(e5, g, loads, mesh),
        ElectricBc::NonlocalMixed { g, g1 } => solve_nonlocal_mixed_thin(e5, g, g1, loads, mesh),
    }
}

/// Dispatches to the comparable-regime solver for `bc`.
pub fn solve_comparable(
    e6: &EffectiveTensorsComparable,
    bc: ElectricBc,
    loads: &Loads,
    mesh: &PlateMesh,
    row: FlexionPiezoRow,
) -> Result<PlateSolution> {
    match bc {
        ElectricBc::Dirichlet => solve_dirichlet_comparable(e6, loads, mesh, row),
        ElectricBc::LocalMixed { g } => solve_mixed_comparable(e6, g, 0.0, loads, mesh),
        ElectricBc::NonlocalMixed { g, g1 } => solve_mixed_comparable(e6, g, g1, loads, mesh),
    }
}
