//! TOML run configuration.
//!
//! ```toml
//! regime = "thin"                  # or "comparable"
//!
//! [materials.matrix]
//! lambda = 1.0
//! mu = 0.5
//!
//! [materials.inclusion]
//! elastic = [ ... 21 Voigt entries ... ]   # or lambda / mu
//! piezo = [ ... 18 entries, 3 x 6 row-major ... ]
//! permittivity = [1.0, 1.0, 1.0, 0.0, 0.0, 0.0]
//!
//! [geometry]
//! inclusion = { shape = "disk", radius = 0.3, center = [0.0, 0.0] }
//! cell2d_n = 64
//! cell3d_n = 16
//! cell3d_nz = 8
//!
//! [geometry.plate]
//! nx = 32
//! ny = 32
//! lx = 1.0
//! ly = 1.0
//! clamped = ["left", "right", "bottom", "top"]
//!
//! [circuit]
//! bc_type = "nonlocal_mixed"       # dirichlet | local_mixed | nonlocal_mixed
//! g = 0.1
//! g1 = 0.01
//! flexion_piezo_row = "as_printed" # or "flexion_block"
//!
//! [loads]
//! f = [0.0, 0.0, 1.0]
//! h = [[1.0, 0, 0, 0], [0.5, 1, 0, 0]]   # sum of c * x1^a * x2^b * x3^c
//! ```
//!
//! Load entries are numbers or lists of `[coefficient, a, b, c]` monomials of
//! total degree at most 3.

use std::path::Path;

use piezoplate_core::femcore::{Edge, InclusionShape};
use piezoplate_core::material::{ElasticTensor, Material, PermittivityTensor, PiezoTensor};
use piezoplate_core::plate::{ElectricBc, FlexionPiezoRow, Loads};
use piezoplate_core::poly::Polynomial;
use serde::Deserialize;

pub const MAX_LOAD_DEGREE: u32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed configuration: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("invalid field `{field}`: {reason}")]
    Field { field: String, reason: String },
}

fn field_err(field: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Field { field: field.into(), reason: reason.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Thin,
    Comparable,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Self::Thin => "thin",
            Self::Comparable => "comparable",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum BcType {
    Dirichlet,
    LocalMixed,
    NonlocalMixed,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMaterial {
    lambda: Option<f64>,
    mu: Option<f64>,
    elastic: Option<Vec<f64>>,
    piezo: Option<Vec<f64>>,
    permittivity: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMaterials {
    matrix: RawMaterial,
    inclusion: RawMaterial,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
enum RawShape {
    Disk { radius: f64, #[serde(default)] center: [f64; 2] },
    Square { side: f64, #[serde(default)] center: [f64; 2] },
    Laminate { width: f64, #[serde(default)] center: f64 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPlate {
    #[serde(default = "default_plate_n")]
    nx: usize,
    #[serde(default = "default_plate_n")]
    ny: usize,
    #[serde(default = "one")]
    lx: f64,
    #[serde(default = "one")]
    ly: f64,
    #[serde(default = "all_edges")]
    clamped: Vec<String>,
}

impl Default for RawPlate {
    fn default() -> Self {
        Self { nx: default_plate_n(), ny: default_plate_n(), lx: 1.0, ly: 1.0, clamped: all_edges() }
    }
}

fn default_plate_n() -> usize {
    32
}
fn one() -> f64 {
    1.0
}
fn all_edges() -> Vec<String> {
    ["left", "right", "bottom", "top"].map(String::from).to_vec()
}
fn default_cell2d_n() -> usize {
    64
}
fn default_cell3d_n() -> usize {
    16
}
fn default_cell3d_nz() -> usize {
    8
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGeometry {
    inclusion: RawShape,
    #[serde(default = "default_cell2d_n")]
    cell2d_n: usize,
    #[serde(default = "default_cell3d_n")]
    cell3d_n: usize,
    #[serde(default = "default_cell3d_nz")]
    cell3d_nz: usize,
    #[serde(default)]
    plate: RawPlate,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCircuit {
    bc_type: BcType,
    #[serde(default)]
    g: f64,
    #[serde(default)]
    g1: f64,
    #[serde(default)]
    flexion_piezo_row: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum RawPoly {
    Constant(f64),
    Terms(Vec<(f64, u32, u32, u32)>),
}

impl Default for RawPoly {
    fn default() -> Self {
        Self::Constant(0.0)
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLoads {
    #[serde(default)]
    f: [RawPoly; 3],
    #[serde(default)]
    g_top: [RawPoly; 3],
    #[serde(default)]
    g_bottom: [RawPoly; 3],
    #[serde(default)]
    g_edge: [RawPoly; 3],
    #[serde(default)]
    phi_c: RawPoly,
    #[serde(default)]
    h: RawPoly,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    regime: Regime,
    materials: RawMaterials,
    geometry: RawGeometry,
    circuit: RawCircuit,
    #[serde(default)]
    loads: RawLoads,
}

/// Plate geometry and mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct PlateConfig {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    pub clamped: Vec<Edge>,
}

/// Validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub regime: Regime,
    pub matrix: Material,
    pub inclusion: Material,
    pub shape: InclusionShape,
    pub cell2d_n: usize,
    pub cell3d_n: usize,
    pub cell3d_nz: usize,
    pub plate: PlateConfig,
    pub bc: ElectricBc,
    pub flexion_row: FlexionPiezoRow,
    pub loads: Loads,
}

pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text)?;
    let matrix = material(&raw.materials.matrix, "materials.matrix")?;
    let inclusion = material(&raw.materials.inclusion, "materials.inclusion")?;
    let shape = match raw.geometry.inclusion {
        RawShape::Disk { radius, center } => InclusionShape::Disk { radius, center },
        RawShape::Square { side, center } => InclusionShape::Square { side, center },
        RawShape::Laminate { width, center } => InclusionShape::Laminate { width, center },
    };
    let g = &raw.geometry;
    for (name, n, min) in [("geometry.cell2d_n", g.cell2d_n, 4), ("geometry.cell3d_n", g.cell3d_n, 4), ("geometry.cell3d_nz", g.cell3d_nz, 1)] {
        if n < min {
            return Err(field_err(name, format!("must be at least {min}")));
        }
    }
    let p = &g.plate;
    if p.nx == 0 || p.ny == 0 {
        return Err(field_err("geometry.plate", "nx and ny must be positive"));
    }
    if !(p.lx > 0.0 && p.ly > 0.0) {
        return Err(field_err("geometry.plate", "lx and ly must be positive"));
    }
    let clamped = p
        .clamped
        .iter()
        .map(|s| match s.as_str() {
            "left" => Ok(Edge::Left),
            "right" => Ok(Edge::Right),
            "bottom" => Ok(Edge::Bottom),
            "top" => Ok(Edge::Top),
            other => Err(field_err("geometry.plate.clamped", format!("unknown edge `{other}`"))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    if clamped.is_empty() {
        return Err(field_err("geometry.plate.clamped", "at least one edge must be clamped"));
    }
    let c = &raw.circuit;
    for (name, v) in [("circuit.g", c.g), ("circuit.g1", c.g1)] {
        if !(v >= 0.0) {
            return Err(field_err(name, "circuit admittances must be nonnegative"));
        }
    }
    let bc = match c.bc_type {
        BcType::Dirichlet => {
            if c.g != 0.0 || c.g1 != 0.0 {
                return Err(field_err("circuit", "prescribed voltage requires g = g1 = 0"));
            }
            ElectricBc::Dirichlet
        }
        BcType::LocalMixed => {
            if c.g1 != 0.0 {
                return Err(field_err("circuit.g1", "local circuits have no g1"));
            }
            ElectricBc::LocalMixed { g: c.g }
        }
        BcType::NonlocalMixed => ElectricBc::NonlocalMixed { g: c.g, g1: c.g1 },
    };
    let flexion_row = match c.flexion_piezo_row.as_deref() {
        None | Some("as_printed") => FlexionPiezoRow::AsPrinted,
        Some("flexion_block") => FlexionPiezoRow::FlexionBlock,
        Some(other) => return Err(field_err("circuit.flexion_piezo_row", format!("unknown value `{other}`"))),
    };
    let l = &raw.loads;
    let poly3 = |v: &[RawPoly; 3], name: &str| -> Result<[Polynomial; 3], ConfigError> {
        Ok([
            polynomial(&v[0], &format!("loads.{name}[0]"))?,
            polynomial(&v[1], &format!("loads.{name}[1]"))?,
            polynomial(&v[2], &format!("loads.{name}[2]"))?,
        ])
    };
    let loads = Loads {
        f: poly3(&l.f, "f")?,
        g_top: poly3(&l.g_top, "g_top")?,
        g_bottom: poly3(&l.g_bottom, "g_bottom")?,
        g_edge: poly3(&l.g_edge, "g_edge")?,
        phi_c: polynomial(&l.phi_c, "loads.phi_c")?,
        h: polynomial(&l.h, "loads.h")?,
    };
    match bc {
        ElectricBc::Dirichlet if !loads.h.is_zero() => {
            return Err(field_err("loads.h", "the current source must vanish under prescribed voltage"));
        }
        ElectricBc::LocalMixed { .. } | ElectricBc::NonlocalMixed { .. } if !loads.phi_c.is_zero() => {
            return Err(field_err("loads.phi_c", "the prescribed voltage must vanish under circuit conditions"));
        }
        _ => {}
    }
    Ok(RunConfig {
        regime: raw.regime,
        matrix,
        inclusion,
        shape,
        cell2d_n: g.cell2d_n,
        cell3d_n: g.cell3d_n,
        cell3d_nz: g.cell3d_nz,
        plate: PlateConfig { nx: p.nx, ny: p.ny, lx: p.lx, ly: p.ly, clamped },
        bc,
        flexion_row,
        loads,
    })
}

fn fixed<const N: usize>(v: &Option<Vec<f64>>, field: &str) -> Result<Option<[f64; N]>, ConfigError> {
    match v {
        None => Ok(None),
        Some(v) => <[f64; N]>::try_from(v.as_slice())
            .map(Some)
            .map_err(|_| field_err(field, format!("expected {N} entries, found {}", v.len()))),
    }
}

fn material(raw: &RawMaterial, field: &str) -> Result<Material, ConfigError> {
    let elastic = match (fixed::<21>(&raw.elastic, &format!("{field}.elastic"))?, raw.lambda, raw.mu) {
        (Some(v), None, None) => ElasticTensor::from_voigt(&v),
        (None, Some(l), Some(m)) => ElasticTensor::isotropic(l, m),
        _ => return Err(field_err(field, "give either `elastic` or both `lambda` and `mu`")),
    };
    let piezo = fixed::<18>(&raw.piezo, &format!("{field}.piezo"))?
        .map_or_else(PiezoTensor::zero, |v| PiezoTensor::from_voigt(&v));
    let permittivity = fixed::<6>(&raw.permittivity, &format!("{field}.permittivity"))?
        .map_or_else(PermittivityTensor::zero, |v| PermittivityTensor::from_voigt(&v));
    Ok(Material { elastic, piezo, permittivity })
}

fn polynomial(raw: &RawPoly, field: &str) -> Result<Polynomial, ConfigError> {
    let p = match raw {
        RawPoly::Constant(c) => Polynomial::constant(*c),
        RawPoly::Terms(t) => t
            .iter()
            .fold(Polynomial::zero(), |acc, &(c, a, b, d)| acc.add(&Polynomial::monomial(c, [a, b, d]))),
    };
    if p.degree() > MAX_LOAD_DEGREE {
        return Err(field_err(field, format!("total degree {} exceeds {MAX_LOAD_DEGREE}", p.degree())));
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
regime = "thin"
[materials.matrix]
lambda = 1.0
mu = 1.0
[materials.inclusion]
lambda = 2.0
mu = 1.5
[geometry]
inclusion = { shape = "disk", radius = 0.25 }
[circuit]
bc_type = "dirichlet"
"#;

    #[test]
    fn defaults_are_applied() {
        let c = parse_config_str(MINIMAL).unwrap();
        assert_eq!((c.cell2d_n, c.cell3d_n, c.cell3d_nz), (64, 16, 8));
        assert_eq!((c.plate.nx, c.plate.ny), (32, 32));
        assert_eq!(c.plate.clamped.len(), 4);
        assert_eq!(c.bc, ElectricBc::Dirichlet);
        assert!(c.loads.f.iter().all(|p| p.is_zero()));
    }

    #[test]
    fn dirichlet_with_current_source_is_rejected() {
        let text = format!("{MINIMAL}\n[loads]\nh = 1.0\n");
        let err = parse_config_str(&text).unwrap_err().to_string();
        assert!(err.contains("loads.h"), "{err}");
    }

    #[test]
    fn negative_admittance_is_rejected() {
        let text = MINIMAL.replace("bc_type = \"dirichlet\"", "bc_type = \"nonlocal_mixed\"\ng1 = -0.5");
        let err = parse_config_str(&text).unwrap_err().to_string();
        assert!(err.contains("circuit.g1"), "{err}");
    }

    #[test]
    fn polynomial_terms_are_parsed() {
        let text = format!("{MINIMAL}\n[loads]\nf = [0.0, [[2.0, 1, 0, 0]], [[1.0, 0, 0, 0], [3.0, 0, 1, 1]]]\n");
        let c = parse_config_str(&text).unwrap();
        assert_eq!(c.loads.f[1].eval([0.5, 0.0, 0.0]), 1.0);
        assert_eq!(c.loads.f[2].eval([0.0, 2.0, 0.5]), 4.0);
        let text = format!("{MINIMAL}\n[loads]\nf = [0.0, 0.0, [[1.0, 4, 0, 0]]]\n");
        assert!(parse_config_str(&text).is_err());
    }
}
