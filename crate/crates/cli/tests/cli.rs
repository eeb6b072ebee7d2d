use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

const SHIPPED: &[&str] =
    &["oscillator", "rigid_body", "free_particle", "atiyah_flat", "atiyah_magnetic", "atiyah_so3"];

fn config(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(format!("{name}.json"));
    path.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_affmech")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write_temp(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn validate_exit_codes() {
    for name in SHIPPED {
        let out = run(&["validate", &config(name)]);
        assert_eq!(out.status.code(), Some(0), "{name}");
        assert!(stdout(&out).trim_end().ends_with("PASS"));
    }
    let out = run(&["validate", &config("broken_jacobi")]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("max jacobi residual  1.000000e0"), "{text}");
    assert!(text.contains("worst"));

    let dir = tempfile::tempdir().unwrap();
    let bad = write_temp(&dir, "bad.json", "{ \"chart\": ");
    let out = run(&["validate", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    assert_eq!(run(&["validate", "/nonexistent/model.json"]).status.code(), Some(2));
}

fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    (header, rows)
}

#[test]
fn simulate_oscillator() {
    let out = run(&["simulate", &config("oscillator"), "--mode", "lagrangian"]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = parse_csv(&stdout(&out));
    assert_eq!(header, ["t", "t_base", "q", "v", "energy", "el_residual"]);
    assert_eq!(rows.len(), 1001);
    let last = rows.last().unwrap();
    assert!((last[0] - 1.0).abs() < 1e-12);
    assert!((last[2] - 1f64.cos()).abs() < 1e-6);
    assert!((last[4] - 0.5).abs() < 1e-9);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.csv");
    let out =
        run(&["simulate", &config("oscillator"), "--mode", "hamiltonian", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let (header, rows) = parse_csv(&fs::read_to_string(&path).unwrap());
    assert_eq!(header[3], "p");
    assert_eq!(header[5], "hamilton_residual");
    assert!((rows.last().unwrap()[3] + 1f64.sin()).abs() < 1e-6);
}

#[test]
fn simulate_reports_casimir() {
    let out = run(&["simulate", &config("rigid_body"), "--mode", "hamiltonian"]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = parse_csv(&stdout(&out));
    assert_eq!(header.last().unwrap(), "casimir");
    let c0 = rows[0].last().copied().unwrap();
    assert!((c0 - 7.0).abs() < 1e-12);
    assert!(rows.iter().all(|r| (r.last().unwrap() - c0).abs() < 1e-6));
}

/// Drops a top-level key from a shipped config, which keeps one key per line.
fn without_key(text: &str, key: &str) -> String {
    let needle = format!("  \"{key}\":");
    text.lines().filter(|l| !l.starts_with(&needle)).collect::<Vec<_>>().join("\n")
}

#[test]
fn simulate_needs_the_right_function() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(config("oscillator")).unwrap();
    let hamiltonian_only = write_temp(&dir, "h.json", &without_key(&text, "lagrangian"));
    let out = run(&["simulate", &hamiltonian_only, "--mode", "lagrangian"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lagrangian"));
    let out = run(&["simulate", &hamiltonian_only, "--mode", "hamiltonian"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn legendre_grid() {
    let out = run(&["legendre", &config("oscillator"), "--grid", "v=-1:1:5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().filter(|l| l.ends_with("regular")).count(), 5, "{text}");
    assert!(text.contains("hyperregular on grid: yes"));
    let out = run(&["legendre", &config("oscillator"), "--grid", "v=-2:1:5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["legendre", &config("oscillator"), "--grid", "w=0:1:5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["legendre", &config("oscillator"), "--grid", "v=0:1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_all_suites() {
    for name in SHIPPED {
        let out = run(&["check", &config(name), "--samples", "30"]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", stdout(&out));
        assert!(stdout(&out).lines().all(|l| l.ends_with("PASS")));
    }
    let out = run(&["check", &config("broken_jacobi"), "--suite", "structure"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["check", &config("oscillator"), "--suite", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn atiyah_expand_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["atiyah_flat", "atiyah_magnetic", "atiyah_so3"] {
        let path = dir.path().join(format!("{name}.json"));
        let out = run(&["atiyah", "expand", &config(name), "--out", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{name}");
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.contains("\"structure\"") && !text.contains("\"atiyah\""));
        assert_eq!(run(&["validate", path.to_str().unwrap()]).status.code(), Some(0), "{name}");
    }
    let out = run(&["atiyah", "expand", &config("oscillator")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_is_deterministic() {
    for args in [vec!["simulate", "--mode", "hamiltonian"], vec!["check", "--suite", "all"], vec!["validate"]]
    {
        let mut full: Vec<String> = args.iter().map(|s| s.to_string()).collect();
        full.insert(1, config("atiyah_so3"));
        let full: Vec<&str> = full.iter().map(String::as_str).collect();
        assert_eq!(run(&full).stdout, run(&full).stdout, "{args:?}");
    }
}
