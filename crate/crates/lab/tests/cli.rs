use std::path::Path;

use phasestep::error::{EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION};
use phasestep::run_cli;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("phasestep").chain(args.iter().copied());
    let code = run_cli(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn out_dir(dir: &Path) -> &str {
    dir.to_str().unwrap()
}

#[test]
fn radial_classic_prints_known_constants() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = run(&["radial", "--reaction", "classic", "--out", out_dir(dir.path())]);
    assert_eq!(code, EXIT_OK);
    for needle in ["b1 = 0.0666667", "c_minus = 1", "gamma = 0", "c_E = 1"] {
        assert!(out.contains(needle), "{needle} missing from\n{out}");
    }
    assert!(dir.path().join("radial.json").exists());
}

#[test]
fn radial_reports_divergent_balance() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) =
        run(&["radial", "--reaction", "quintic", "--beta", "2", "--out", out_dir(dir.path())]);
    assert_eq!(code, EXIT_NUMERICAL);
    assert!(out.contains("gamma"));
}

#[test]
fn validation_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let d = out_dir(dir.path());
    assert_eq!(run(&["run", "--eps", "-1", "--out", d]).0, EXIT_VALIDATION);
    assert_eq!(run(&["sweep", "--out", d]).0, EXIT_VALIDATION);
    assert_eq!(run(&["run", "--scheme", "nonsense"]).0, EXIT_VALIDATION);
    assert_eq!(run(&["frobnicate"]).0, EXIT_VALIDATION);
    assert_eq!(run(&["--help"]).0, EXIT_OK);
}

#[test]
fn run_writes_outputs_and_table_renders_them() {
    let dir = tempfile::tempdir().unwrap();
    let d = out_dir(dir.path());
    let (code, out, err) =
        run(&["run", "--scheme", "be", "--eps", "0.4", "--sigma", "1e-3", "--out", d]);
    assert_eq!(code, EXIT_OK, "{out}{err}");
    let json: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    assert_eq!(json.len(), 1);
    let stem = json[0].file_stem().unwrap().to_str().unwrap().to_string();
    for suffix in [".csv", "-k.csv", "-energy.csv"] {
        assert!(dir.path().join(format!("{stem}{suffix}")).exists(), "{stem}{suffix}");
    }
    let (code, table, _) = run(&["table", json[0].to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(table.lines().next().unwrap().starts_with("scheme"));
    assert!(table.contains("BE"));
}

#[test]
fn sweep_writes_table_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let d = out_dir(dir.path());
    let (code, out, err) = run(&[
        "sweep", "--schemes", "be,imex1", "--eps", "0.4", "--sigma", "1e-3", "--threads", "2",
        "--out", d,
    ]);
    assert_eq!(code, EXIT_OK, "{out}{err}");
    let csv = dir.path().join("table.csv");
    assert!(dir.path().join("table.json").exists());
    let (code, table, _) = run(&["table", csv.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(table.contains("IMEX1"));
}

#[test]
fn check_passes() {
    let (code, out, _) = run(&["check"]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(!out.contains("FAIL"));
}
