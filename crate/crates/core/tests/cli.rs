use std::path::Path;
use std::process::{Command, Output};

use bandpert::burgers::semicircle_density;
use bandpert::correction::{closed_form_f, ClosedFormExample};
use bandpert::io::{
    read_csv_file, CorrectionRow, DensityRow, EigenvalueRow, FlagField, ResidualRow, RunMetadata, SemigroupCsvRow,
    ShiftRow,
};

fn run(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bandpert"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn theory_matches_closed_forms() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["theory", "--example", "uniform-band", "--ell", "0.2", "--out", "band"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows: Vec<CorrectionRow> = read_csv_file(dir.path().join("band/correction.csv")).unwrap();
    assert_eq!(rows.len(), 201);
    let exact = ClosedFormExample::UniformBand { width: 0.2 };
    for r in rows.iter().filter(|r| r.flag == FlagField::Ok && r.s > 0.0 && r.s < 1.0) {
        assert!((r.f - closed_form_f(exact, r.s)).abs() < 1e-6, "{r:?}");
    }

    let o = run(&["theory", "--example", "triangular-goe", "--out", "tri"], dir.path());
    assert_eq!(code(&o), 0);
    let rows: Vec<CorrectionRow> = read_csv_file(dir.path().join("tri/correction.csv")).unwrap();
    for r in &rows {
        assert!((r.f - closed_form_f(ClosedFormExample::TriangularPulseGoe, r.s)).abs() < 1e-6, "{r:?}");
    }
}

#[test]
fn invalid_band_width_is_a_usage_error_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["theory", "--example", "uniform-band", "--ell", "1.5", "--out", "x"], dir.path());
    assert_eq!(code(&o), 1);
    assert!(!dir.path().join("x").exists());
}

#[test]
fn usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["simulate", "--example", "uniform-band", "--n", "0"], dir.path())), 1);
    assert_eq!(code(&run(&["burgers", "--t-grid", "0:0.2:0.05"], dir.path())), 1);
    assert_eq!(code(&run(&["frobnicate"], dir.path())), 1);
    assert_eq!(code(&run(&["solve", "--example", "nope"], dir.path())), 1);
    assert_eq!(code(&run(&["--help"], dir.path())), 0);
}

#[test]
fn solve_unperturbed_uniform_and_semicircle_semigroup() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["solve", "--example", "uniform-band", "--eps", "0", "--out", "u"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows: Vec<DensityRow> = read_csv_file(dir.path().join("u/density.csv")).unwrap();
    let eta = 1e-3;
    for r in rows.iter().filter(|r| r.s > 10.0 * eta && r.s < 1.0 - 10.0 * eta) {
        assert!((r.density - 1.0).abs() <= 0.05, "{r:?}");
    }
    let mass = rows.last().unwrap().cdf;
    assert!((0.98..=1.0).contains(&mass), "{mass}");

    let o = run(&["solve", "--eps", "0.25", "--semicircle-c", "1", "--out", "sc"], dir.path());
    assert_eq!(code(&o), 0);
    let rows: Vec<DensityRow> = read_csv_file(dir.path().join("sc/density.csv")).unwrap();
    let r = 2.0 * 1.25f64.sqrt();
    for row in rows.iter().filter(|row| row.s.abs() < r) {
        let exact = semicircle_density(1.25, row.s).unwrap();
        assert!((row.density - exact).abs() <= 0.02, "{row:?}");
    }
}

#[test]
fn simulate_is_reproducible_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| {
        vec![
            "simulate", "--example", "uniform-band", "--ell", "0.2", "--n", "120", "--eps", "0.01", "--replicates",
            "3", "--seed", "7", "--out", out,
        ]
    };
    assert_eq!(code(&run(&args("a"), dir.path())), 0);
    assert_eq!(code(&run(&args("b"), dir.path())), 0);
    let mut serial = vec!["--threads", "1"];
    serial.extend(args("c"));
    assert_eq!(code(&run(&serial, dir.path())), 0);
    for file in ["shift.csv", "eigenvalues.csv", "metadata.json"] {
        let a = std::fs::read(dir.path().join("a").join(file)).unwrap();
        assert_eq!(a, std::fs::read(dir.path().join("b").join(file)).unwrap(), "{file}");
        assert_eq!(a, std::fs::read(dir.path().join("c").join(file)).unwrap(), "{file}");
    }
    let eig: Vec<EigenvalueRow> = read_csv_file(dir.path().join("a/eigenvalues.csv")).unwrap();
    assert_eq!(eig.len(), 3 * 120);
    let shift: Vec<ShiftRow> = read_csv_file(dir.path().join("a/shift.csv")).unwrap();
    assert_eq!(shift.len(), 200);
    let meta = RunMetadata::read(dir.path().join("a/metadata.json")).unwrap();
    assert_eq!((meta.n, meta.seed, meta.replicates), (120, 7, 3));
    assert_eq!(meta.model_hash.len(), 64);
}

#[test]
fn burgers_residual_and_semigroup() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["burgers", "--c", "1", "--t-grid", "0:0.2:0.05", "--out", "r"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows: Vec<ResidualRow> = read_csv_file(dir.path().join("r/residual.csv")).unwrap();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.residual.abs() <= 0.05));

    let o = run(&["burgers", "--semigroup", "--c", "1", "--t", "0.25", "--out", "s"], dir.path());
    assert_eq!(code(&o), 0);
    let rows: Vec<SemigroupCsvRow> = read_csv_file(dir.path().join("s/semigroup.csv")).unwrap();
    let r = 2.0 * 1.25f64.sqrt();
    let sup = rows
        .iter()
        .filter(|row| row.s.abs() < r)
        .map(|row| row.abs_error)
        .fold(0.0, f64::max);
    assert!(sup <= 0.02, "{sup}");
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("exp.json"),
        r#"{ "example": "uniform-band", "ell": 0.3, "points": 11, "out": "from-file" }"#,
    )
    .unwrap();
    let o = run(&["theory", "--config", "exp.json", "--points", "21"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows: Vec<CorrectionRow> = read_csv_file(dir.path().join("from-file/correction.csv")).unwrap();
    assert_eq!(rows.len(), 21);
    // ℓ = 0.3 from the file: F(0.1) = log(0.3 / 0.1).
    let r = rows.iter().find(|r| (r.s - 0.1).abs() < 1e-12).unwrap();
    assert!((r.f - 3f64.ln()).abs() < 1e-6);

    std::fs::write(dir.path().join("bad.json"), r#"{ "example": "uniform-band", "colour": 1 }"#).unwrap();
    assert_eq!(code(&run(&["theory", "--config", "bad.json"], dir.path())), 1);
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["validate", "--example", "triangular-goe"], dir.path());
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("holder"));
    std::fs::write(
        dir.path().join("skew.json"),
        r#"{ "density": { "kind": "uniform" },
             "profile": { "kind": "tabulated", "params": { "size": 2, "values": [1.0, 2.0, 0.5, 1.0] } } }"#,
    )
    .unwrap();
    assert_eq!(code(&run(&["validate", "--model", "skew.json"], dir.path())), 3);
}
