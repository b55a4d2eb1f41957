//! Constitutive tensors, the packed 10×10 stiffness–piezoelectricity–
//! permittivity matrix and its transverse condensation.
//!
//! Packed ordering of strain/field vectors:
//! `(K11, K12, K21, K22, K13, K23, K33, L1, L2, L3)`.

use alloc::format;
use alloc::vec::Vec;

use crate::cell2d::EffectiveTensorsThin;
use crate::dense::{self, Dense};
use crate::{Error, Result};

/// In-plane fourth-order tensor stored over the pairs `(11, 12, 21, 22)`.
pub type Tensor4 = [[f64; 4]; 4];
/// In-plane second-order tensor stored over the pairs `(11, 12, 21, 22)`.
pub type Tensor2 = [f64; 4];

/// Index of the in-plane pair `(a, b)`, `a, b ∈ {0, 1}`.
#[inline]
pub const fn pair(a: usize, b: usize) -> usize {
    2 * a + b
}

/// `(i, j)` component carried by each of the seven strain slots.
pub const STRAIN_SLOTS: [(usize, usize); 7] =
    [(0, 0), (0, 1), (1, 0), (1, 1), (0, 2), (1, 2), (2, 2)];
/// Multiplicity of each strain slot in the full contraction `R s : s`.
pub const STRAIN_WEIGHTS: [f64; 7] = [1.0, 1.0, 1.0, 1.0, 2.0, 2.0, 1.0];
/// First electric slot (`L1`); `L3` sits at `ELECTRIC + 2`.
pub const ELECTRIC: usize = 7;
pub const L3: usize = 9;

/// Voigt index order `(11, 22, 33, 23, 13, 12)`.
const VOIGT: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1)];

fn voigt_of(i: usize, j: usize) -> usize {
    match (i.min(j), i.max(j)) {
        (0, 0) => 0,
        (1, 1) => 1,
        (2, 2) => 2,
        (1, 2) => 3,
        (0, 2) => 4,
        _ => 5,
    }
}

/// Fourth-order stiffness `R_ijkl`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElasticTensor(pub [[[[f64; 3]; 3]; 3]; 3]);

impl ElasticTensor {
    pub fn zero() -> Self {
        Self([[[[0.0; 3]; 3]; 3]; 3])
    }

    /// `R_ijkl = λ δij δkl + μ (δik δjl + δil δjk)`.
    pub fn isotropic(lambda: f64, mu: f64) -> Self {
        let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        let mut r = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        r.0[i][j][k][l] =
                            lambda * d(i, j) * d(k, l) + mu * (d(i, k) * d(j, l) + d(i, l) * d(j, k));
                    }
                }
            }
        }
        r
    }

    /// Builds the tensor from the 21 upper-triangular entries of the 6×6
    /// Voigt matrix, row by row, in the order `(11, 22, 33, 23, 13, 12)`.
    pub fn from_voigt(upper: &[f64; 21]) -> Self {
        let mut c = [[0.0; 6]; 6];
        let mut n = 0;
        for a in 0..6 {
            for b in a..6 {
                c[a][b] = upper[n];
                c[b][a] = upper[n];
                n += 1;
            }
        }
        let mut r = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        r.0[i][j][k][l] = c[voigt_of(i, j)][voigt_of(k, l)];
                    }
                }
            }
        }
        r
    }

    /// 6×6 matrix of the tensor acting on symmetric matrices in the
    /// orthonormal (Mandel) basis.
    pub fn mandel_matrix(&self) -> Dense {
        let w = |a: usize| if a < 3 { 1.0 } else { core::f64::consts::SQRT_2 };
        Dense::from_fn(6, 6, |a, b| {
            let (i, j) = VOIGT[a];
            let (k, l) = VOIGT[b];
            w(a) * w(b) * self.0[i][j][k][l]
        })
    }

    pub fn scaled(&self, t: f64) -> Self {
        let mut r = *self;
        r.0.iter_mut().flatten().flatten().flatten().for_each(|v| *v *= t);
        r
    }
}

/// Third-order piezoelectric coupling `d_kij`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiezoTensor(pub [[[f64; 3]; 3]; 3]);

impl PiezoTensor {
    pub fn zero() -> Self {
        Self([[[0.0; 3]; 3]; 3])
    }

    /// From a 3×6 row-major table `d[k][I]`, `I` in Voigt order.
    pub fn from_voigt(entries: &[f64; 18]) -> Self {
        let mut d = Self::zero();
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    d.0[k][i][j] = entries[6 * k + voigt_of(i, j)];
                }
            }
        }
        d
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().flatten().flatten().all(|v| *v == 0.0)
    }

    pub fn scaled(&self, t: f64) -> Self {
        let mut d = *self;
        d.0.iter_mut().flatten().flatten().for_each(|v| *v *= t);
        d
    }
}

/// Second-order permittivity `c_ij`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PermittivityTensor(pub [[f64; 3]; 3]);

impl PermittivityTensor {
    pub fn zero() -> Self {
        Self([[0.0; 3]; 3])
    }

    pub fn identity() -> Self {
        Self([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    }

    /// From `(c11, c22, c33, c23, c13, c12)`.
    pub fn from_voigt(e: &[f64; 6]) -> Self {
        let mut c = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                c.0[i][j] = e[voigt_of(i, j)];
            }
        }
        c
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().flatten().all(|v| *v == 0.0)
    }

    pub fn scaled(&self, t: f64) -> Self {
        let mut c = *self;
        c.0.iter_mut().flatten().for_each(|v| *v *= t);
        c
    }
}

/// The three constitutive tensors of one phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    pub elastic: ElasticTensor,
    pub piezo: PiezoTensor,
    pub permittivity: PermittivityTensor,
}

impl Material {
    /// Purely elastic isotropic phase (`d = 0`, `c = 0`).
    pub fn isotropic_elastic(lambda: f64, mu: f64) -> Self {
        Self {
            elastic: ElasticTensor::isotropic(lambda, mu),
            piezo: PiezoTensor::zero(),
            permittivity: PermittivityTensor::zero(),
        }
    }

    pub fn validate(&self) -> ValidationReport {
        validate_material(&self.elastic, &self.piezo, &self.permittivity)
    }

    pub fn global_tensor(&self) -> Result<GlobalTensor10> {
        assemble_global_tensor(&self.elastic, &self.piezo, &self.permittivity)
    }
}

/// A symmetry condition that failed, with the two disagreeing entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryViolation {
    pub tensor: &'static str,
    pub indices: [usize; 4],
    pub values: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub symmetry_violations: Vec<SymmetryViolation>,
    /// Smallest eigenvalue of `R` on symmetric 3×3 matrices.
    pub elastic_margin: f64,
    /// Smallest eigenvalue of `c`, when the phase carries an electric part.
    pub permittivity_margin: Option<f64>,
    /// `d` and `c` are not both zero.
    pub electric_active: bool,
    /// `d = 0` and `c = 0`, as required outside the inclusions.
    pub matrix_phase_compatible: bool,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.symmetry_violations.is_empty()
            && self.elastic_margin > 0.0
            && self.permittivity_margin.is_none_or(|m| m > 0.0)
    }

    fn failure_summary(&self) -> alloc::string::String {
        if let Some(v) = self.symmetry_violations.first() {
            format!(
                "{} violates symmetry at {:?}: {} vs {} ({} violation(s))",
                v.tensor,
                v.indices,
                v.values.0,
                v.values.1,
                self.symmetry_violations.len()
            )
        } else if self.elastic_margin <= 0.0 {
            format!("stiffness is not coercive (margin {})", self.elastic_margin)
        } else {
            format!(
                "permittivity is not positive definite (margin {:?})",
                self.permittivity_margin
            )
        }
    }
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= 1e-12 * scale.max(1.0)
}

/// Checks the minor/major symmetries, coercivity of `R` on symmetric
/// matrices and positive definiteness of `c` (when the phase is electric).
pub fn validate_material(
    r: &ElasticTensor,
    d: &PiezoTensor,
    c: &PermittivityTensor,
) -> ValidationReport {
    let mut violations = Vec::new();
    let rs = r.0.iter().flatten().flatten().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    let v = r.0[i][j][k][l];
                    for (w, label) in [(r.0[k][l][i][j], "R (major)"), (r.0[j][i][k][l], "R (minor)")] {
                        if !close(v, w, rs) {
                            violations.push(SymmetryViolation {
                                tensor: label,
                                indices: [i, j, k, l],
                                values: (v, w),
                            });
                        }
                    }
                }
            }
        }
    }
    let ds = d.0.iter().flatten().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    for k in 0..3 {
        for i in 0..3 {
            for j in (i + 1)..3 {
                if !close(d.0[k][i][j], d.0[k][j][i], ds) {
                    violations.push(SymmetryViolation {
                        tensor: "d",
                        indices: [k, i, j, 0],
                        values: (d.0[k][i][j], d.0[k][j][i]),
                    });
                }
            }
        }
    }
    let cs = c.0.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    for i in 0..3 {
        for j in (i + 1)..3 {
            if !close(c.0[i][j], c.0[j][i], cs) {
                violations.push(SymmetryViolation {
                    tensor: "c",
                    indices: [i, j, 0, 0],
                    values: (c.0[i][j], c.0[j][i]),
                });
            }
        }
    }
    let elastic_margin = dense::symmetric_eigenvalues(&r.mandel_matrix())[0];
    let electric_active = !(d.is_zero() && c.is_zero());
    let permittivity_margin = electric_active.then(|| {
        let cm = Dense::from_fn(3, 3, |i, j| 0.5 * (c.0[i][j] + c.0[j][i]));
        dense::symmetric_eigenvalues(&cm)[0]
    });
    ValidationReport {
        symmetry_violations: violations,
        elastic_margin,
        permittivity_margin,
        electric_active,
        matrix_phase_compatible: !electric_active,
    }
}

/// Packed strain/field vector `(K_αβ, K_α3, K33, L_α, L3)` with `K12 = K21`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MVector(pub [f64; 10]);

impl MVector {
    /// Packs a symmetric strain `s` and a field `l`.
    pub fn from_strain_field(s: &[[f64; 3]; 3], l: &[f64; 3]) -> Self {
        let mut m = [0.0; 10];
        for (p, &(i, j)) in STRAIN_SLOTS.iter().enumerate() {
            m[p] = 0.5 * (s[i][j] + s[j][i]);
        }
        m[ELECTRIC..].copy_from_slice(l);
        Self(m)
    }

    /// Unpacks to the symmetric strain and the field.
    pub fn to_strain_field(&self) -> ([[f64; 3]; 3], [f64; 3]) {
        let mut s = [[0.0; 3]; 3];
        for (p, &(i, j)) in STRAIN_SLOTS.iter().enumerate() {
            s[i][j] = self.0[p];
            s[j][i] = self.0[p];
        }
        (s, [self.0[7], self.0[8], self.0[9]])
    }
}

/// Global 10×10 tensor. Its elastic (7×7) and electric (3×3) blocks are
/// symmetric; the piezoelectric blocks carry `+d` above and `-d` below the
/// diagonal, so the matrix itself is not symmetric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalTensor10(pub [[f64; 10]; 10]);

impl GlobalTensor10 {
    pub fn zero() -> Self {
        Self([[0.0; 10]; 10])
    }

    pub fn to_dense(&self) -> Dense {
        Dense::from_fn(10, 10, |i, j| self.0[i][j])
    }

    pub fn from_dense(m: &Dense) -> Self {
        let mut out = Self::zero();
        for i in 0..10 {
            for j in 0..10 {
                out.0[i][j] = m[(i, j)];
            }
        }
        out
    }

    /// `M · ℛ · ᵗM`.
    pub fn quadratic_form(&self, m: &MVector) -> f64 {
        self.bilinear(m, m)
    }

    /// `a · ℛ · ᵗb`.
    pub fn bilinear(&self, a: &MVector, b: &MVector) -> f64 {
        let mut s = 0.0;
        for i in 0..10 {
            if a.0[i] == 0.0 {
                continue;
            }
            let row: f64 = (0..10).map(|j| self.0[i][j] * b.0[j]).sum();
            s += a.0[i] * row;
        }
        s
    }

    /// Whether the electric rows/columns carry anything (inclusion phase).
    pub fn has_electric(&self) -> bool {
        (0..10).any(|i| (ELECTRIC..10).any(|j| self.0[i][j] != 0.0 || self.0[j][i] != 0.0))
    }

    /// Column `q` of the matrix.
    pub fn column(&self, q: usize) -> [f64; 10] {
        core::array::from_fn(|i| self.0[i][q])
    }

    pub fn scaled(&self, t: f64) -> Self {
        let mut out = *self;
        out.0.iter_mut().flatten().for_each(|v| *v *= t);
        out
    }

    /// In-plane 4×4 block `R_αβγδ`.
    pub fn inplane(&self) -> Tensor4 {
        core::array::from_fn(|i| core::array::from_fn(|j| self.0[i][j]))
    }
}

/// Packs `(R, d, c)` into the 10×10 global tensor, with the factors 2 and 4
/// of the `α3` slots stored in the matrix.
pub fn assemble_global_tensor(
    r: &ElasticTensor,
    d: &PiezoTensor,
    c: &PermittivityTensor,
) -> Result<GlobalTensor10> {
    let report = validate_material(r, d, c);
    if !report.passed() {
        return Err(Error::InvalidMaterial(report.failure_summary()));
    }
    Ok(pack_unchecked(r, d, c))
}

pub(crate) fn pack_unchecked(r: &ElasticTensor, d: &PiezoTensor, c: &PermittivityTensor) -> GlobalTensor10 {
    let mut g = GlobalTensor10::zero();
    for (p, &(i, j)) in STRAIN_SLOTS.iter().enumerate() {
        let wp = STRAIN_WEIGHTS[p];
        for (q, &(k, l)) in STRAIN_SLOTS.iter().enumerate() {
            g.0[p][q] = wp * STRAIN_WEIGHTS[q] * r.0[i][j][k][l];
        }
        for k in 0..3 {
            g.0[p][ELECTRIC + k] = wp * d.0[k][i][j];
            g.0[ELECTRIC + k][p] = -wp * d.0[k][i][j];
        }
    }
    for j in 0..3 {
        for k in 0..3 {
            g.0[ELECTRIC + j][ELECTRIC + k] = c.0[j][k];
        }
    }
    g
}

/// Condensation maps and condensed tensors for one phase.
#[derive(Debug, Clone, PartialEq)]
pub struct CondensedTensors {
    /// Eliminates `K_i3` (keeps `L3`).
    pub t_m: GlobalTensor10,
    /// Eliminates `K_i3` and, for electric phases, `L3`.
    pub t_n: GlobalTensor10,
    pub r_m: GlobalTensor10,
    pub r_n: GlobalTensor10,
    pub admittance: f64,
}

impl CondensedTensors {
    pub fn r_m_inplane(&self) -> Tensor4 {
        self.r_m.inplane()
    }

    pub fn r_n_inplane(&self) -> Tensor4 {
        self.r_n.inplane()
    }

    /// `d_M3αβ`: the `(K_αβ, L3)` entries of `ℛ_M`.
    pub fn d_m(&self) -> Tensor2 {
        core::array::from_fn(|p| self.r_m.0[p][L3])
    }

    /// The `(L3, K_αβ)` entries of `ℛ_M` (equal to `-d_M3αβ`).
    pub fn d_m_lower(&self) -> Tensor2 {
        core::array::from_fn(|p| self.r_m.0[L3][p])
    }

    pub fn c_m33(&self) -> f64 {
        self.r_m.0[L3][L3]
    }
}

fn condensation_map(a: &Dense, eliminated: &[usize]) -> Result<Dense> {
    let block = Dense::from_fn(eliminated.len(), eliminated.len(), |i, j| a[(eliminated[i], eliminated[j])]);
    let rows = Dense::from_fn(eliminated.len(), 10, |i, j| a[(eliminated[i], j)]);
    let sol = dense::solve(&block, &rows).ok_or(Error::DegenerateMaterial("transverse block"))?;
    let mut t = Dense::zeros(10, 10);
    for (i, &ti) in eliminated.iter().enumerate() {
        for j in 0..10 {
            t[(ti, j)] = -sol[(i, j)];
        }
    }
    Ok(t)
}

/// Eliminates the transverse components from `ℛ`:
/// `T_N = -(ΠℛΠ)⁻¹Πℛ`, `T_M = -(Π₂ℛΠ₂)⁻¹Π₂ℛ`,
/// `ℛ_N = (Id + ᵗT_N) ℛ (Id + T_N)`,
/// `ℛ_M = (Id + ᵗT_M)(ℛ + 2GΠ₁)(Id + T_M)`.
///
/// `Π` covers `(K13, K23, K33, L3)`; `Π₁` covers `L3`. A phase without an
/// electric part has no `L3` unknown, so there `Π` reduces to `Π₂` and `Π₁`
/// vanishes.
pub fn condense(r: &GlobalTensor10, admittance: f64) -> Result<CondensedTensors> {
    let a = r.to_dense();
    let electric = r.has_electric();
    let mech: [usize; 3] = [4, 5, 6];
    let t_m = condensation_map(&a, &mech)?;
    let t_n = if electric {
        condensation_map(&a, &[4, 5, 6, L3])?
    } else {
        t_m.clone()
    };
    let id = Dense::identity(10);
    let plus = |t: &Dense| {
        let mut m = id.clone();
        m.data.iter_mut().zip(&t.data).for_each(|(x, y)| *x += y);
        m
    };
    let (pm, pn) = (plus(&t_m), plus(&t_n));
    let r_n = pn.transpose().matmul(&a).matmul(&pn);
    let mut shifted = a.clone();
    if electric {
        shifted[(L3, L3)] += 2.0 * admittance;
    }
    let r_m = pm.transpose().matmul(&shifted).matmul(&pm);
    Ok(CondensedTensors {
        t_m: GlobalTensor10::from_dense(&t_m),
        t_n: GlobalTensor10::from_dense(&t_n),
        r_m: GlobalTensor10::from_dense(&r_m),
        r_n: GlobalTensor10::from_dense(&r_n),
        admittance,
    })
}

/// `R^{H,loc}_αβγδ = R^H_αβγδ - (c^H + 2|Y₁|G)⁻¹ d^H_αβ e^H_γδ`.
pub fn local_reduction(e5: &EffectiveTensorsThin, admittance: f64) -> Result<Tensor4> {
    let denom = e5.c_m33_h + 2.0 * e5.vol_y1 * admittance;
    if !(denom > 0.0) {
        return Err(Error::DegenerateCircuit(denom));
    }
    Ok(core::array::from_fn(|a| {
        core::array::from_fn(|b| e5.r_m_h[a][b] - e5.d_m3_h[a] * e5.e_m3_h[b] / denom)
    }))
}
