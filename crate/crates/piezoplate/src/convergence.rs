//! Mesh-refinement tables with Richardson order estimates.

use std::fmt;

use serde::Serialize;

use crate::config::{Regime, RunConfig};
use crate::io::{Effective, F17};
use crate::pipeline::{homogenize, solve_plate};
use crate::verify::oracles::richardson_rate;

/// Differences below this (relative) count as mesh-independent.
pub const EXACT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rate {
    Exact,
    Order(f64),
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Exact => f.write_str("exact"),
            Self::Order(p) => write!(f, "{p:.3}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub quantity: String,
    pub values: Vec<F17>,
    /// One estimate per consecutive triple of levels.
    pub rates: Vec<Rate>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub regime: &'static str,
    pub levels: Vec<usize>,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn row(&self, quantity: &str) -> Option<&ConvergenceRow> {
        self.rows.iter().find(|r| r.quantity == quantity)
    }
}

impl fmt::Display for ConvergenceTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:<16}", "quantity")?;
        for l in &self.levels {
            write!(f, " {:>24}", format!("n = {l}"))?;
        }
        writeln!(f, "  rate")?;
        for r in &self.rows {
            write!(f, "{:<16}", r.quantity)?;
            for v in &r.values {
                write!(f, " {:>24}", format!("{:.15e}", v.0))?;
            }
            let rates: Vec<String> = r.rates.iter().map(Rate::to_string).collect();
            writeln!(f, "  {}", rates.join(" "))?;
        }
        Ok(())
    }
}

fn entries(e: &Effective) -> Vec<(&'static str, f64)> {
    match e {
        Effective::Thin(t) => vec![
            ("R_M 1111", t.r_m_h[0][0]),
            ("R_M 2222", t.r_m_h[3][3]),
            ("R_M 1122", t.r_m_h[0][3]),
            ("R_M 1212", t.r_m_h[1][1]),
            ("R_N 1111", t.r_n_h[0][0]),
            ("R_N 2222", t.r_n_h[3][3]),
            ("R_N 1122", t.r_n_h[0][3]),
            ("R_N 1212", t.r_n_h[1][1]),
            ("d_M3 11", t.d_m3_h[0]),
            ("d_M3 22", t.d_m3_h[3]),
            ("c_M33", t.c_m33_h),
        ],
        Effective::Comparable(c) => vec![
            ("R_MM 1111", c.r_mm_h[0][0]),
            ("R_MM 2222", c.r_mm_h[3][3]),
            ("R_MM 1122", c.r_mm_h[0][3]),
            ("R_MM 1212", c.r_mm_h[1][1]),
            ("R_NN 1111", c.r_nn_h[0][0]),
            ("R_NN 2222", c.r_nn_h[3][3]),
            ("R_NN 1122", c.r_nn_h[0][3]),
            ("R_NN 1212", c.r_nn_h[1][1]),
            ("d_MM3 11", c.d_mm3_h[0]),
            ("d_MM3 22", c.d_mm3_h[3]),
            ("c_MM33", c.c_mm33_h),
        ],
    }
}

fn rates(values: &[f64], levels: &[usize]) -> Vec<Rate> {
    values
        .windows(3)
        .zip(levels.windows(2))
        .map(|(v, l)| {
            let scale = v.iter().fold(1.0f64, |m, x| m.max(x.abs()));
            if (v[0] - v[1]).abs() <= EXACT_TOLERANCE * scale && (v[1] - v[2]).abs() <= EXACT_TOLERANCE * scale {
                Rate::Exact
            } else {
                Rate::Order(richardson_rate(v[0], v[1], v[2], l[1] as f64 / l[0] as f64))
            }
        })
        .collect()
}

/// Refines the cell mesh (`cell2d_n` or `cell3d_n`) over `levels` and
/// tabulates effective entries and plate summaries.
pub fn convergence_study(config: &RunConfig, levels: &[usize]) -> anyhow::Result<ConvergenceTable> {
    if levels.len() < 3 {
        anyhow::bail!("a convergence study needs at least three levels, got {}", levels.len());
    }
    if levels.windows(2).any(|w| w[1] <= w[0]) {
        anyhow::bail!("levels must be strictly increasing");
    }
    let mut columns: Vec<Vec<(&'static str, f64)>> = Vec::new();
    for &n in levels {
        let mut c = config.clone();
        match c.regime {
            Regime::Thin => c.cell2d_n = n,
            Regime::Comparable => c.cell3d_n = n,
        }
        let (eff, _) = homogenize(&c)?;
        let (sol, _) = solve_plate(&c, &eff)?;
        let mut col = entries(&eff);
        col.push(("max deflection", sol.max_deflection()));
        col.push(("energy", sol.energy));
        col.push(("mean voltage", sol.mean_voltage()));
        columns.push(col);
    }
    let rows = (0..columns[0].len())
        .map(|k| {
            let values: Vec<f64> = columns.iter().map(|c| c[k].1).collect();
            ConvergenceRow {
                quantity: columns[0][k].0.to_string(),
                rates: rates(&values, levels),
                values: values.into_iter().map(F17).collect(),
            }
        })
        .collect();
    Ok(ConvergenceTable { regime: config.regime.name(), levels: levels.to_vec(), rows })
}
