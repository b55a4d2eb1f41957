use std::path::Path;
use std::process::Command;
use std::time::Instant;

use piezoplate::config::parse_config_str;
use piezoplate::convergence::{convergence_study, Rate};
use piezoplate::io::{self, Effective};
use piezoplate::pipeline::{homogenize, run_pipeline, solve_plate, Stage};
use piezoplate_core::material::condense;

fn repo_config(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    std::fs::read_to_string(path).unwrap()
}

const CONSTANT_THIN: &str = r#"
regime = "thin"
[materials.matrix]
lambda = 1.0
mu = 1.0
[materials.inclusion]
lambda = 1.0
mu = 1.0
[geometry]
inclusion = { shape = "square", side = 0.5 }
cell2d_n = 8
[geometry.plate]
nx = 8
ny = 8
[circuit]
bc_type = "dirichlet"
[loads]
f = [0.0, 0.0, 1.0]
"#;

#[test]
fn constant_thin_dirichlet_run_reports_condensed_tensors() {
    let cfg = parse_config_str(CONSTANT_THIN).unwrap();
    let report = run_pipeline(&cfg, None).unwrap();
    assert!(report.passed);
    assert!(report.corrector_max_abs.0 <= 1e-10);
    let ct = condense(&cfg.matrix.global_tensor().unwrap(), 0.0).unwrap();
    let Effective::Thin(e5) = io::Effective::from(&report.effective) else { panic!("regime") };
    for p in 0..4 {
        for q in 0..4 {
            assert!((e5.r_m_h[p][q] - ct.r_m_inplane()[p][q]).abs() <= 1e-10);
            assert!((e5.r_n_h[p][q] - ct.r_n_inplane()[p][q]).abs() <= 1e-10);
        }
    }
}

#[test]
fn comparable_local_run_fits_the_budget() {
    let cfg = parse_config_str(&repo_config("comparable_square_local.toml")).unwrap();
    let start = Instant::now();
    let report = run_pipeline(&cfg, None).unwrap();
    assert!(start.elapsed().as_secs_f64() < 60.0);
    assert!(report.passed, "{:?}", report.checks);
    assert!(report.summary.mean_voltage.0 > 0.0);
}

#[test]
fn artifacts_are_deterministic() {
    let cfg = parse_config_str(&repo_config("thin_disk_nonlocal.toml")).unwrap();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_pipeline(&cfg, Some(a.path())).unwrap();
    run_pipeline(&cfg, Some(b.path())).unwrap();
    for f in ["effective_tensors.json", "solution.json", "solution.csv", "report.json"] {
        let (x, y) = (std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap());
        assert!(!x.is_empty());
        assert_eq!(x, y, "{f}");
    }
    let csv = std::fs::read_to_string(a.path().join("solution.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 25 * 25);
}

#[test]
fn tensor_round_trip_is_lossless() {
    let cfg = parse_config_str(&repo_config("thin_disk_nonlocal.toml")).unwrap();
    let (eff, _) = homogenize(&cfg).unwrap();
    let back = io::effective_from_json(&io::effective_to_json(&eff).unwrap()).unwrap();
    assert_eq!(eff, back);
    let (s1, _) = solve_plate(&cfg, &eff).unwrap();
    let (s2, _) = solve_plate(&cfg, &back).unwrap();
    assert_eq!(s1, s2);
}

#[test]
fn stage_errors_name_the_stage() {
    let text = CONSTANT_THIN.replace("lambda = 1.0\nmu = 1.0\n[materials.inclusion]", "lambda = 1.0\nmu = -1.0\n[materials.inclusion]");
    let cfg = parse_config_str(&text).unwrap();
    let err = run_pipeline(&cfg, None).unwrap_err();
    assert_eq!(err.stage, Stage::Validate);
    assert!(err.to_string().starts_with("[validate]"));
    let text = CONSTANT_THIN.replace("side = 0.5", "side = 1.5");
    let err = run_pipeline(&parse_config_str(&text).unwrap(), None).unwrap_err();
    assert_eq!(err.stage, Stage::Homogenize);
}

#[test]
fn laminate_entries_are_mesh_independent() {
    let cfg = parse_config_str(&repo_config("laminate_dirichlet.toml")).unwrap();
    let table = convergence_study(&cfg, &[16, 32, 64]).unwrap();
    let row = table.row("R_M 1212").unwrap();
    assert_eq!(row.rates, vec![Rate::Exact]);
    assert!((row.values[2].0 - 1.6).abs() < 1e-10);
}

#[test]
fn disk_entries_converge_at_first_order_or_better() {
    let text = CONSTANT_THIN
        .replace("lambda = 1.0\nmu = 1.0\n[geometry]", "lambda = 3.0\nmu = 5.0\n[geometry]")
        .replace("shape = \"square\", side = 0.5", "shape = \"disk\", radius = 0.3");
    let cfg = parse_config_str(&text).unwrap();
    let table = convergence_study(&cfg, &[16, 32, 64]).unwrap();
    for q in ["R_M 1111", "R_M 1212"] {
        match table.row(q).unwrap().rates[0] {
            Rate::Order(p) => assert!(p >= 1.0, "{q}: {p}\n{table}"),
            Rate::Exact => panic!("{q} should vary"),
        }
    }
}

#[test]
fn constant_coefficients_are_level_independent() {
    let cfg = parse_config_str(CONSTANT_THIN).unwrap();
    let table = convergence_study(&cfg, &[8, 12, 16]).unwrap();
    for row in &table.rows {
        let v0 = row.values[0].0;
        assert!(row.values.iter().all(|v| (v.0 - v0).abs() <= 1e-10), "{}", row.quantity);
    }
    assert!(convergence_study(&cfg, &[8, 16]).is_err());
}

#[test]
fn cli_commands_and_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_piezoplate");
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, CONSTANT_THIN).unwrap();
    let out = dir.path().join("out");
    let run = |args: &[&str]| Command::new(bin).args(args).output().unwrap();
    let c = cfg.to_str().unwrap();
    let o = out.to_str().unwrap();
    assert!(run(&["validate", c]).status.success());
    assert!(run(&["homogenize", c, "--out", o]).status.success());
    let tensors = out.join("effective_tensors.json");
    let plate_out = dir.path().join("plate");
    let r = run(&["plate", c, "--tensors", tensors.to_str().unwrap(), "--out", plate_out.to_str().unwrap()]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    assert!(plate_out.join("solution.json").exists());
    assert!(run(&["run", c, "--out", o]).status.success());
    assert!(out.join("report.json").exists());
    let r = run(&["verify", "--only", "1,9"]);
    assert!(r.status.success());
    assert_eq!(String::from_utf8_lossy(&r.stdout).lines().filter(|l| l.starts_with("[PASS]")).count(), 2);

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, format!("{CONSTANT_THIN}h = 1.0\n")).unwrap();
    let r = run(&["validate", bad.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(2));
    let err = String::from_utf8_lossy(&r.stderr);
    assert!(err.contains("[config]") && err.contains("loads.h"), "{err}");
}
