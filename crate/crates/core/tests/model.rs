mod common;

use affmech::model::{from_lie_algebroid, validate_structure, LieAlgebroid, ModelBuilder};
use affmech::sampling::Sampler;
use affmech::{Chart, Error, Execution, ScalarField};

fn points(chart: &Chart, count: usize, seed: u64) -> Vec<Vec<f64>> {
    Sampler::new(seed).base_points(chart, count)
}

#[test]
fn so3_has_zero_residuals() {
    let model = common::so3_model();
    let report =
        validate_structure(&model, &points(model.chart(), 50, 0), 1e-10, Execution::Sequential).unwrap();
    assert_eq!(report.max_anchor, 0.0);
    assert_eq!(report.max_jacobi, 0.0);
    assert!(report.passed());
    let sv = model.eval(&[0.0]).unwrap();
    assert_eq!(sv.c(0, 1, 2), 1.0);
    assert_eq!(sv.c(2, 0, 1), 1.0);
    assert_eq!(sv.c(1, 0, 2), -1.0);
    assert_eq!(sv.rho0(0), 0.0);
    assert_eq!(sv.c0(1, 2), 0.0);
}

#[test]
fn broken_jacobi_reports_one() {
    let chart = Chart::new(&["s"], 3).unwrap();
    let model = ModelBuilder::new(chart).c(0, 1, 0, "1").unwrap().c(0, 2, 2, "1").unwrap().build();
    let report =
        validate_structure(&model, &points(model.chart(), 5, 1), 1e-10, Execution::Sequential).unwrap();
    assert!((report.max_jacobi - 1.0).abs() < 1e-12);
    assert!(!report.passed());
    assert_eq!(report.worst.as_deref(), Some("jacobi (I,J,K)=(1,2,3) L=3"));
}

#[test]
fn anchor_compatibility_on_the_line() {
    let chart = Chart::new(&["x"], 2).unwrap();
    let one = ScalarField::parse("1", &["x"]).unwrap();
    let x = ScalarField::parse("x", &["x"]).unwrap();
    let data = LieAlgebroid { anchors: vec![vec![one.clone()], vec![x]], brackets: vec![(0, 1, 0, one)] };
    let model = from_lie_algebroid(chart, &data).unwrap();
    let report = validate_structure(&model, &[vec![0.7]], 1e-12, Execution::Sequential).unwrap();
    assert!(report.max_anchor < 1e-12);
    assert!(report.passed());
}

#[test]
fn wrong_bracket_breaks_anchor() {
    let chart = Chart::new(&["x"], 2).unwrap();
    let model = ModelBuilder::new(chart)
        .rho(0, 0, "1")
        .unwrap()
        .rho(1, 0, "x")
        .unwrap()
        .c(0, 1, 0, "2")
        .unwrap()
        .build();
    let report = validate_structure(&model, &[vec![0.7]], 1e-12, Execution::Sequential).unwrap();
    assert!((report.max_anchor - 1.0).abs() < 1e-12);
}

#[test]
fn rank_one_abelian_is_zero() {
    let chart = Chart::new(&["x"], 1).unwrap();
    let model = from_lie_algebroid(chart, &LieAlgebroid::from_constants(&["x"], &[vec![vec![0.0]]])).unwrap();
    assert!(model.is_constant());
    let sv = model.eval(&[0.3]).unwrap();
    assert_eq!((sv.rho0(0), sv.rho(0, 0), sv.c0(0, 0)), (0.0, 0.0, 0.0));
}

#[test]
fn lower_index_order_negates() {
    let chart = Chart::new(&["x"], 2).unwrap();
    let model = ModelBuilder::new(chart).c(1, 0, 1, "x^2 + 1").unwrap().build();
    let sv = model.eval(&[0.5]).unwrap();
    assert_eq!(sv.c(0, 1, 1), -1.25);
    assert_eq!(sv.c(1, 0, 1), 1.25);
    assert_eq!(sv.c(0, 0, 1), 0.0);
    let chart = Chart::new(&["x"], 2).unwrap();
    assert!(ModelBuilder::new(chart).c(0, 0, 1, "1").is_err());
}

#[test]
fn out_of_range_index() {
    let chart = Chart::new(&["x"], 2).unwrap();
    assert!(matches!(ModelBuilder::new(chart).rho(2, 0, "1"), Err(Error::Dimension(_))));
}

#[test]
fn chart_rejects_bad_names() {
    assert!(Chart::new(&["t", "t"], 1).is_err());
    assert!(Chart::with_names(&["t"], &["2v"], &["p"]).is_err());
    assert!(Chart::new(&[] as &[&str], 1).is_err());
    assert!(Chart::new(&["t"], 0).is_err());
    let chart = Chart::new(&["t"], 1).unwrap();
    assert!(chart.clone().with_box("zz", 0.0, 1.0).is_err());
    assert!(chart.clone().with_box("t", 1.0, 0.0).is_err());
    assert_eq!(chart.with_box("p1", -2.0, 2.0).unwrap().momentum_box(), &[(-2.0, 2.0)]);
}

#[test]
fn sequential_and_parallel_agree() {
    let spec = common::random_atiyah(4);
    let model = spec.reduce().unwrap();
    let pts = points(model.chart(), 64, 9);
    let a = validate_structure(&model, &pts, 1e-9, Execution::Sequential).unwrap();
    let b = validate_structure(&model, &pts, 1e-9, Execution::Parallel).unwrap();
    assert_eq!(a, b);
}

#[test]
fn shipped_models_validate() {
    for name in common::SHIPPED {
        let problem = common::load(name);
        let pts = points(problem.model.chart(), 100, 0);
        let report = validate_structure(&problem.model, &pts, 1e-10, Execution::Parallel).unwrap();
        assert!(report.passed(), "{name}: {report:?}");
    }
}

#[test]
fn bidual_indexing() {
    let problem = common::load("atiyah_magnetic");
    let jet = problem.model.eval_jet(&[0.4, -0.3]).unwrap();
    // rho_0 = d/dt and rho_1 = d/dx.
    assert_eq!(jet.rho_b(0, 0), 1.0);
    assert_eq!(jet.rho_b(1, 1), 1.0);
    assert_eq!(jet.rho_b(2, 0), 0.0);
    // C_{01}^2 = -B_{01} = -x and its x-derivative.
    assert!((jet.c_b(0, 1, 2) - 0.3).abs() < 1e-15);
    assert!((jet.d_c_b(0, 1, 2, 1) + 1.0).abs() < 1e-15);
    assert_eq!(jet.d_c_b(0, 1, 2, 0), 0.0);
    assert_eq!(jet.c_b(1, 0, 2), -jet.c_b(0, 1, 2));
}
