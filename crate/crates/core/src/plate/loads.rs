use crate::poly::Polynomial;
use crate::{Error, Result};

/// Electric boundary condition on the inclusions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ElectricBc {
    /// Prescribed voltage `φ_c`.
    Dirichlet,
    /// One R-L-C circuit per inclusion, admittance `G`.
    LocalMixed { g: f64 },
    /// Inter-inclusion circuits, admittances `G` and `G₁`.
    NonlocalMixed { g: f64, g1: f64 },
}

impl ElectricBc {
    pub fn admittance(&self) -> f64 {
        match *self {
            Self::Dirichlet => 0.0,
            Self::LocalMixed { g } | Self::NonlocalMixed { g, .. } => g,
        }
    }

    pub fn check(&self) -> Result<()> {
        match *self {
            Self::Dirichlet => Ok(()),
            Self::LocalMixed { g } if g >= 0.0 => Ok(()),
            Self::NonlocalMixed { g, g1 } if g >= 0.0 && g1 >= 0.0 => Ok(()),
            _ => Err(Error::Configuration("circuit constants G and G1 must be nonnegative".into())),
        }
    }
}

/// Loads on the plate `Ω = ω × (-1, 1)`, all polynomial.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Loads {
    /// Volume force `f(x1, x2, x3)`.
    pub f: [Polynomial; 3],
    /// Surface force on `ω × {1}`.
    pub g_top: [Polynomial; 3],
    /// Surface force on `ω × {-1}`.
    pub g_bottom: [Polynomial; 3],
    /// Surface force on the lateral free faces `γ_N × (-1, 1)`.
    pub g_edge: [Polynomial; 3],
    /// Prescribed voltage (Dirichlet case).
    pub phi_c: Polynomial,
    /// Current source (mixed cases).
    pub h: Polynomial,
}

impl Loads {
    /// Uniform transverse volume force `f = (0, 0, q)`.
    pub fn transverse(q: f64) -> Self {
        let mut l = Self::default();
        l.f[2] = Polynomial::constant(q);
        l
    }

    /// Checks the sign conventions attached to each electric condition.
    pub fn check(&self, bc: &ElectricBc) -> Result<()> {
        bc.check()?;
        match bc {
            ElectricBc::Dirichlet if !self.h.is_zero() => {
                Err(Error::Configuration("h must vanish under prescribed voltage".into()))
            }
            ElectricBc::LocalMixed { .. } | ElectricBc::NonlocalMixed { .. } if !self.phi_c.is_zero() => {
                Err(Error::Configuration("phi_c must vanish under circuit conditions".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn scaled(&self, t: f64) -> Self {
        let s3 = |v: &[Polynomial; 3]| core::array::from_fn(|i| v[i].scaled(t));
        Self {
            f: s3(&self.f),
            g_top: s3(&self.g_top),
            g_bottom: s3(&self.g_bottom),
            g_edge: s3(&self.g_edge),
            phi_c: self.phi_c.scaled(t),
            h: self.h.scaled(t),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let a3 = |a: &[Polynomial; 3], b: &[Polynomial; 3]| core::array::from_fn(|i| a[i].add(&b[i]));
        Self {
            f: a3(&self.f, &o.f),
            g_top: a3(&self.g_top, &o.g_top),
            g_bottom: a3(&self.g_bottom, &o.g_bottom),
            g_edge: a3(&self.g_edge, &o.g_edge),
            phi_c: self.phi_c.add(&o.phi_c),
            h: self.h.add(&o.h),
        }
    }
}

/// Midplane resultants of the loads, polynomials in `(x1, x2)`. For a
/// Kirchhoff–Love field `v = (v̄ - x₃∇v₃, v₃)`,
/// `ℓ_u(v) = ∫_ω F̄·v̄ + M̄·∇v₃ + F₃v₃ + ∫_{γ_N} F̄ᵉ·v̄ + M̄ᵉ·∇v₃ + F₃ᵉv₃`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedLoads {
    pub f_bar: [Polynomial; 2],
    pub m_bar: [Polynomial; 2],
    pub f3: Polynomial,
    pub edge_f_bar: [Polynomial; 2],
    pub edge_m_bar: [Polynomial; 2],
    pub edge_f3: Polynomial,
}

pub fn reduce_loads(loads: &Loads) -> ReducedLoads {
    let top = |i: usize| loads.g_top[i].at_x3(1.0);
    let bot = |i: usize| loads.g_bottom[i].at_x3(-1.0);
    ReducedLoads {
        f_bar: core::array::from_fn(|a| loads.f[a].thickness_integral(0).add(&top(a)).add(&bot(a))),
        m_bar: core::array::from_fn(|a| {
            loads.f[a].thickness_integral(1).scaled(-1.0).add(&top(a).scaled(-1.0)).add(&bot(a))
        }),
        f3: loads.f[2].thickness_integral(0).add(&top(2)).add(&bot(2)),
        edge_f_bar: core::array::from_fn(|a| loads.g_edge[a].thickness_integral(0)),
        edge_m_bar: core::array::from_fn(|a| loads.g_edge[a].thickness_integral(1).scaled(-1.0)),
        edge_f3: loads.g_edge[2].thickness_integral(0),
    }
}
