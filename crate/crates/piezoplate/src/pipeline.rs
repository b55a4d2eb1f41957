//! validate → condense → cell solves → effective tensors → plate solve.

use std::fmt;
use std::path::Path;
use std::time::Instant;

use piezoplate_core::cell2d::{homogenize_thin, CondensedFieldY};
use piezoplate_core::cell3d::{homogenize_comparable, ComparableField};
use piezoplate_core::femcore::{build_cell_mesh_2d, build_cell_mesh_3d, PlateMesh};
use piezoplate_core::material::ValidationReport;
use piezoplate_core::plate::{solve_comparable, solve_thin, PlateSolution};
use serde::Serialize;

use crate::config::{Regime, RunConfig};
use crate::io::{self, Effective, EffectiveTensorsFile, SolutionSummary, F17};

pub const RESIDUAL_TOLERANCE: f64 = 1e-10;
pub const ENERGY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Validate,
    Homogenize,
    Plate,
    Write,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Validate => "validate",
            Self::Homogenize => "homogenize",
            Self::Plate => "plate",
            Self::Write => "write",
        })
    }
}

#[derive(Debug, thiserror::Error)]
#[error("[{stage}] {source}")]
pub struct StageError {
    pub stage: Stage,
    #[source]
    pub source: anyhow::Error,
}

fn at<E: Into<anyhow::Error>>(stage: Stage) -> impl FnOnce(E) -> StageError {
    move |e| StageError { stage, source: e.into() }
}

type StageResult<T> = Result<T, StageError>;

/// Validation of both phases; fails on asymmetric or non-coercive tensors
/// and on an electric matrix phase.
pub fn validate(config: &RunConfig) -> StageResult<[ValidationReport; 2]> {
    let reports = [config.matrix.validate(), config.inclusion.validate()];
    for (name, r) in ["matrix", "inclusion"].iter().zip(&reports) {
        if !r.passed() {
            let msg = format!(
                "{name} phase is invalid: {} symmetry violation(s), elastic margin {:.3e}, permittivity margin {:?}",
                r.symmetry_violations.len(),
                r.elastic_margin,
                r.permittivity_margin
            );
            return Err(StageError { stage: Stage::Validate, source: anyhow::anyhow!(msg) });
        }
    }
    if !reports[0].matrix_phase_compatible {
        return Err(StageError {
            stage: Stage::Validate,
            source: anyhow::anyhow!("matrix phase must have zero piezoelectric and permittivity tensors"),
        });
    }
    Ok(reports)
}

/// Cell solves and effective tensors; also returns the largest corrector DOF.
pub fn homogenize(config: &RunConfig) -> StageResult<(Effective, f64)> {
    let h = |e: piezoplate_core::Error| StageError { stage: Stage::Homogenize, source: e.into() };
    match config.regime {
        Regime::Thin => {
            let mesh = build_cell_mesh_2d(config.cell2d_n, &config.shape).map_err(h)?;
            let field = CondensedFieldY::from_materials(&mesh, &config.matrix, &config.inclusion).map_err(h)?;
            let (corr, eff) = homogenize_thin(&field, &mesh).map_err(h)?;
            Ok((Effective::Thin(eff), corr.max_abs()))
        }
        Regime::Comparable => {
            let mesh = build_cell_mesh_3d(config.cell3d_n, config.cell3d_nz, &config.shape).map_err(h)?;
            let field = ComparableField::from_materials(&mesh, &config.matrix, &config.inclusion).map_err(h)?;
            let (corr, eff) = homogenize_comparable(&field, &mesh).map_err(h)?;
            Ok((Effective::Comparable(eff), corr.max_abs()))
        }
    }
}

pub fn plate_mesh(config: &RunConfig) -> StageResult<PlateMesh> {
    let p = &config.plate;
    PlateMesh::new(p.nx, p.ny, p.lx, p.ly, &p.clamped).map_err(at(Stage::Plate))
}

/// Solves the plate model matching the regime of `effective`.
pub fn solve_plate(config: &RunConfig, effective: &Effective) -> StageResult<(PlateSolution, PlateMesh)> {
    let mesh = plate_mesh(config)?;
    let sol = match effective {
        Effective::Thin(e5) => solve_thin(e5, config.bc, &config.loads, &mesh),
        Effective::Comparable(e6) => solve_comparable(e6, config.bc, &config.loads, &mesh, config.flexion_row),
    }
    .map_err(at(Stage::Plate))?;
    Ok((sol, mesh))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub value: F17,
    pub tolerance: F17,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timing {
    pub stage: String,
    pub seconds: f64,
}

/// Machine-readable record of one run. Timings are kept out of the
/// serialized report so identical inputs give identical JSON.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub regime: &'static str,
    pub electric_bc: String,
    pub corrector_max_abs: F17,
    pub effective: EffectiveTensorsFile,
    pub summary: SolutionSummary,
    pub checks: Vec<Check>,
    pub passed: bool,
    #[serde(skip)]
    pub timings: Vec<Timing>,
}

fn checks(sol: &PlateSolution) -> Vec<Check> {
    let gap = (sol.energy - sol.work).abs() / sol.work.abs().max(f64::MIN_POSITIVE);
    let gap = if sol.work == 0.0 && sol.energy == 0.0 { 0.0 } else { gap };
    vec![
        Check {
            name: "residual",
            passed: sol.residual <= RESIDUAL_TOLERANCE,
            value: F17(sol.residual),
            tolerance: F17(RESIDUAL_TOLERANCE),
        },
        Check { name: "energy_identity", passed: gap <= ENERGY_TOLERANCE, value: F17(gap), tolerance: F17(ENERGY_TOLERANCE) },
    ]
}

/// Runs every stage and, when `out` is given, writes
/// `effective_tensors.json`, `solution.json`, `solution.csv`, `report.json`
/// and `timings.json` there.
pub fn run_pipeline(config: &RunConfig, out: Option<&Path>) -> StageResult<RunReport> {
    let mut timings = Vec::new();
    let mut clock = Instant::now();
    let mut lap = |name: &str, timings: &mut Vec<Timing>| {
        timings.push(Timing { stage: name.into(), seconds: clock.elapsed().as_secs_f64() });
        clock = Instant::now();
    };
    validate(config)?;
    lap("validate", &mut timings);
    let (effective, corr) = homogenize(config)?;
    lap("homogenize", &mut timings);
    let (sol, mesh) = solve_plate(config, &effective)?;
    lap("plate", &mut timings);
    let checks = checks(&sol);
    let report = RunReport {
        regime: config.regime.name(),
        electric_bc: format!("{:?}", config.bc),
        corrector_max_abs: F17(corr),
        effective: EffectiveTensorsFile::from(&effective),
        summary: SolutionSummary::new(&sol),
        passed: checks.iter().all(|c| c.passed),
        checks,
        timings,
    };
    if let Some(dir) = out {
        write_artifacts(dir, &report, &effective, &sol, &mesh).map_err(at(Stage::Write))?;
    }
    Ok(report)
}

pub fn write_artifacts(
    dir: &Path,
    report: &RunReport,
    effective: &Effective,
    sol: &PlateSolution,
    mesh: &PlateMesh,
) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("effective_tensors.json"), io::effective_to_json(effective)?)?;
    std::fs::write(dir.join("solution.json"), io::solution_to_json(sol, mesh)?)?;
    io::write_nodal_csv(std::fs::File::create(dir.join("solution.csv"))?, sol, mesh)?;
    std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(report)?)?;
    std::fs::write(dir.join("timings.json"), serde_json::to_string_pretty(&report.timings)?)?;
    Ok(())
}
