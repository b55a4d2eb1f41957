//! JSON and CSV artifacts.

use std::fmt;
use std::path::Path;

use anyhow::{Context, Result};
use piezoplate_core::cell2d::EffectiveTensorsThin;
use piezoplate_core::cell3d::EffectiveTensorsComparable;
use piezoplate_core::femcore::PlateMesh;
use piezoplate_core::material::{Tensor2, Tensor4};
use piezoplate_core::plate::PlateSolution;
use serde::de::Deserializer;
use serde::ser::{Error as _, Serializer};
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

/// A float written with 17 significant digits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F17(pub f64);

impl fmt::Display for F17 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.16e}", self.0)
    }
}

impl Serialize for F17 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return Err(S::Error::custom(format!("non-finite value {}", self.0)));
        }
        RawValue::from_string(self.to_string()).map_err(S::Error::custom)?.serialize(s)
    }
}

impl<'de> Deserialize<'de> for F17 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        f64::deserialize(d).map(F17)
    }
}

fn t4(r: &Tensor4) -> [[F17; 4]; 4] {
    r.map(|row| row.map(F17))
}

fn t2(d: &Tensor2) -> [F17; 4] {
    d.map(F17)
}

fn f4(r: &[[F17; 4]; 4]) -> Tensor4 {
    r.map(|row| row.map(|v| v.0))
}

fn f2(d: &[F17; 4]) -> Tensor2 {
    d.map(|v| v.0)
}

/// Effective tensors as stored on disk. Tensor components are indexed
/// `(11, 12, 21, 22)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum EffectiveTensorsFile {
    Thin {
        r_n_h: [[F17; 4]; 4],
        r_m_h: [[F17; 4]; 4],
        d_m3_h: [F17; 4],
        e_m3_h: [F17; 4],
        c_m33_h: F17,
        vol_y1: F17,
    },
    Comparable {
        r_mm_h: [[F17; 4]; 4],
        r_mn_h: [[F17; 4]; 4],
        r_nm_h: [[F17; 4]; 4],
        r_nn_h: [[F17; 4]; 4],
        d_mm3_h: [F17; 4],
        d_nm3_h: [F17; 4],
        e_mm3_h: [F17; 4],
        e_mn3_h: [F17; 4],
        c_mm33_h: F17,
        vol_y1: F17,
    },
}

/// Effective tensors of either regime.
#[derive(Debug, Clone, PartialEq)]
pub enum Effective {
    Thin(EffectiveTensorsThin),
    Comparable(EffectiveTensorsComparable),
}

impl From<&Effective> for EffectiveTensorsFile {
    fn from(e: &Effective) -> Self {
        match e {
            Effective::Thin(t) => Self::Thin {
                r_n_h: t4(&t.r_n_h),
                r_m_h: t4(&t.r_m_h),
                d_m3_h: t2(&t.d_m3_h),
                e_m3_h: t2(&t.e_m3_h),
                c_m33_h: F17(t.c_m33_h),
                vol_y1: F17(t.vol_y1),
            },
            Effective::Comparable(c) => Self::Comparable {
                r_mm_h: t4(&c.r_mm_h),
                r_mn_h: t4(&c.r_mn_h),
                r_nm_h: t4(&c.r_nm_h),
                r_nn_h: t4(&c.r_nn_h),
                d_mm3_h: t2(&c.d_mm3_h),
                d_nm3_h: t2(&c.d_nm3_h),
                e_mm3_h: t2(&c.e_mm3_h),
                e_mn3_h: t2(&c.e_mn3_h),
                c_mm33_h: F17(c.c_mm33_h),
                vol_y1: F17(c.vol_y1),
            },
        }
    }
}

impl From<&EffectiveTensorsFile> for Effective {
    fn from(f: &EffectiveTensorsFile) -> Self {
        match f {
            EffectiveTensorsFile::Thin { r_n_h, r_m_h, d_m3_h, e_m3_h, c_m33_h, vol_y1 } => {
                Self::Thin(EffectiveTensorsThin {
                    r_n_h: f4(r_n_h),
                    r_m_h: f4(r_m_h),
                    d_m3_h: f2(d_m3_h),
                    e_m3_h: f2(e_m3_h),
                    c_m33_h: c_m33_h.0,
                    vol_y1: vol_y1.0,
                })
            }
            EffectiveTensorsFile::Comparable {
                r_mm_h,
                r_mn_h,
                r_nm_h,
                r_nn_h,
                d_mm3_h,
                d_nm3_h,
                e_mm3_h,
                e_mn3_h,
                c_mm33_h,
                vol_y1,
            } => Self::Comparable(EffectiveTensorsComparable {
                r_mm_h: f4(r_mm_h),
                r_mn_h: f4(r_mn_h),
                r_nm_h: f4(r_nm_h),
                r_nn_h: f4(r_nn_h),
                d_mm3_h: f2(d_mm3_h),
                d_nm3_h: f2(d_nm3_h),
                e_mm3_h: f2(e_mm3_h),
                e_mn3_h: f2(e_mn3_h),
                c_mm33_h: c_mm33_h.0,
                vol_y1: vol_y1.0,
            }),
        }
    }
}

pub fn effective_to_json(e: &Effective) -> Result<String> {
    Ok(serde_json::to_string_pretty(&EffectiveTensorsFile::from(e))?)
}

pub fn effective_from_json(text: &str) -> Result<Effective> {
    let f: EffectiveTensorsFile = serde_json::from_str(text).context("malformed effective-tensor JSON")?;
    Ok(Effective::from(&f))
}

pub fn read_effective(path: &Path) -> Result<Effective> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    effective_from_json(&text)
}

/// Scalar summaries of a plate solution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionSummary {
    pub max_deflection: F17,
    pub elastic_energy: F17,
    pub load_work: F17,
    pub mean_voltage: F17,
    pub residual: F17,
}

impl SolutionSummary {
    pub fn new(s: &PlateSolution) -> Self {
        Self {
            max_deflection: F17(s.max_deflection()),
            elastic_energy: F17(s.energy),
            load_work: F17(s.work),
            mean_voltage: F17(s.mean_voltage()),
            residual: F17(s.residual),
        }
    }
}

#[derive(Debug, Serialize)]
struct NodalJson {
    x: Vec<F17>,
    y: Vec<F17>,
    u1: Vec<F17>,
    u2: Vec<F17>,
    w: Vec<F17>,
    w_x: Vec<F17>,
    w_y: Vec<F17>,
    w_xy: Vec<F17>,
}

#[derive(Debug, Serialize)]
struct SolutionJson {
    nx: usize,
    ny: usize,
    summary: SolutionSummary,
    nodes: NodalJson,
    /// Corner values of `L3` per element.
    voltage: Vec<[F17; 4]>,
}

pub fn solution_to_json(s: &PlateSolution, mesh: &PlateMesh) -> Result<String> {
    let n = mesh.n_nodes();
    let coords: Vec<[f64; 2]> = (0..n).map(|i| mesh.node_coords(i)).collect();
    let col = |v: &[f64], stride: usize, k: usize| (0..n).map(|i| F17(v[stride * i + k])).collect();
    let json = SolutionJson {
        nx: mesh.nx,
        ny: mesh.ny,
        summary: SolutionSummary::new(s),
        nodes: NodalJson {
            x: coords.iter().map(|c| F17(c[0])).collect(),
            y: coords.iter().map(|c| F17(c[1])).collect(),
            u1: col(&s.membrane, 2, 0),
            u2: col(&s.membrane, 2, 1),
            w: col(&s.deflection, 4, 0),
            w_x: col(&s.deflection, 4, 1),
            w_y: col(&s.deflection, 4, 2),
            w_xy: col(&s.deflection, 4, 3),
        },
        voltage: s.voltage.chunks(4).map(|c| [F17(c[0]), F17(c[1]), F17(c[2]), F17(c[3])]).collect(),
    };
    Ok(serde_json::to_string_pretty(&json)?)
}

/// Node-averaged voltage from the element corner values.
pub fn nodal_voltage(s: &PlateSolution, mesh: &PlateMesh) -> Vec<f64> {
    let mut sum = vec![0.0; mesh.n_nodes()];
    let mut count = vec![0usize; mesh.n_nodes()];
    if s.voltage.is_empty() {
        return sum;
    }
    for e in 0..mesh.n_elements() {
        for (a, node) in mesh.element_nodes(e).iter().enumerate() {
            sum[*node] += s.voltage[4 * e + a];
            count[*node] += 1;
        }
    }
    sum.iter().zip(&count).map(|(s, c)| s / *c as f64).collect()
}

pub fn write_nodal_csv<W: std::io::Write>(out: W, s: &PlateSolution, mesh: &PlateMesh) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["node", "x", "y", "u1", "u2", "w", "w_x", "w_y", "w_xy", "voltage"])?;
    let volt = nodal_voltage(s, mesh);
    for i in 0..mesh.n_nodes() {
        let c = mesh.node_coords(i);
        let mut row = vec![i.to_string()];
        let vals = [
            c[0],
            c[1],
            s.membrane[2 * i],
            s.membrane[2 * i + 1],
            s.deflection[4 * i],
            s.deflection[4 * i + 1],
            s.deflection[4 * i + 2],
            s.deflection[4 * i + 3],
            volt[i],
        ];
        row.extend(vals.iter().map(|v| F17(*v).to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
