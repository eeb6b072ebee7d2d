mod common;

use affmech::suite::{run_suite, Suite, SuiteOptions};
use affmech::Execution;

#[test]
fn every_shipped_config_passes_everything() {
    for name in common::SHIPPED {
        let rows = run_suite(&common::load(name), Suite::All, SuiteOptions::default());
        assert!(!rows.is_empty());
        for row in &rows {
            assert!(row.pass, "{name}: {row}");
        }
    }
}

#[test]
fn broken_model_fails_structure_only() {
    let problem = affmech::config::Problem::from_path(common::config_path("broken_jacobi")).unwrap();
    let rows = run_suite(&problem, Suite::Structure, SuiteOptions::default());
    assert!(rows.iter().any(|r| !r.pass));
    let rows = run_suite(&problem, Suite::Involution, SuiteOptions::default());
    assert!(rows.iter().all(|r| r.pass));
}

#[test]
fn bracket_free_involution_is_exact() {
    let rows = run_suite(&common::load("oscillator"), Suite::Involution, SuiteOptions::default());
    let sigma = rows.iter().find(|r| r.name.contains("sigma")).unwrap();
    assert_eq!(sigma.residual, 0.0);
}

#[test]
fn atiyah_rows_present() {
    let rows = run_suite(&common::load("atiyah_magnetic"), Suite::Atiyah, SuiteOptions::default());
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.pass));
    let rows = run_suite(&common::load("oscillator"), Suite::Atiyah, SuiteOptions::default());
    assert!(rows.iter().all(|r| r.pass));
}

#[test]
fn same_seed_same_report() {
    let problem = common::load("atiyah_so3");
    let seq = SuiteOptions { exec: Execution::Sequential, ..SuiteOptions::default() };
    let a = run_suite(&problem, Suite::All, seq);
    let b = run_suite(&problem, Suite::All, SuiteOptions::default());
    assert_eq!(a, b);
    let other = run_suite(&problem, Suite::Involution, SuiteOptions { seed: 5, ..seq });
    assert!(other.iter().all(|r| r.pass));
}

#[test]
fn suite_names() {
    for (s, suite) in [
        ("all", Suite::All),
        ("involution", Suite::Involution),
        ("tulczyjew", Suite::Tulczyjew),
        ("flows", Suite::Flows),
        ("poisson", Suite::Poisson),
        ("atiyah", Suite::Atiyah),
        ("structure", Suite::Structure),
    ] {
        assert_eq!(s.parse::<Suite>().unwrap(), suite);
    }
    assert!("everything".parse::<Suite>().is_err());
}

#[test]
fn row_layout() {
    let rows = run_suite(&common::load("oscillator"), Suite::Poisson, SuiteOptions::default());
    let line = rows[0].to_string();
    assert!(line.ends_with("PASS"), "{line}");
    assert!(line.starts_with(&rows[0].name));
}
