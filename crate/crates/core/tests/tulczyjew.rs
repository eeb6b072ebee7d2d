mod common;

use std::sync::Arc;

use affmech::flow::integrate_rk4;
use affmech::hamiltonian::HamiltonianSystem;
use affmech::lagrangian::LagrangianSystem;
use affmech::legendre::LegendrePair;
use affmech::model::ModelBuilder;
use affmech::sampling::Sampler;
use affmech::tulczyjew::*;
use affmech::{APoint, Chart, JetPoint, PhasePoint, VStarPoint};

#[test]
fn involution_without_structure_swaps() {
    let model = ModelBuilder::new(Chart::new(&["x"], 2).unwrap()).build();
    let j = JetPoint::new([0.5], [1.0, 2.0], [3.0, 4.0], [5.0, 6.0]);
    assert_eq!(sigma(&model, &j).unwrap(), JetPoint::new([0.5], [3.0, 4.0], [1.0, 2.0], [5.0, 6.0]));
    assert_eq!(sigma_l(&model, &j).unwrap(), sigma(&model, &j).unwrap());
}

#[test]
fn involution_with_drift() {
    let model = common::drift_model(2.0);
    let j = JetPoint::new([0.0], [1.0], [3.0], [5.0]);
    let once = sigma(&model, &j).unwrap();
    assert_eq!(once, JetPoint::new([0.0], [3.0], [1.0], [1.0]));
    assert_eq!(sigma(&model, &once).unwrap(), j);
    assert_eq!(sigma_l(&model, &j).unwrap(), JetPoint::new([0.0], [3.0], [1.0], [-1.0]));
}

#[test]
fn involution_squares_to_identity() {
    for seed in 0..6 {
        let model = common::random_atiyah(seed).reduce().unwrap();
        let mut sampler = Sampler::new(seed);
        for _ in 0..100 {
            let j = sampler.jet_point(model.chart());
            let back = sigma(&model, &sigma(&model, &j).unwrap()).unwrap();
            assert!(back.max_distance(&j) < 1e-12, "seed {seed}");
        }
    }
}

#[test]
fn tulczyjew_map_examples() {
    let flat = ModelBuilder::new(Chart::new(&["x"], 1).unwrap()).build();
    let d = a_map(&flat, &PhasePoint::new([0.1], [2.0], [3.0], [4.0])).unwrap();
    assert_eq!((d.z, d.cov_t, d.cov_v), (vec![3.0], vec![4.0], vec![2.0]));
    let drift = common::drift_model(2.0);
    let d = a_map(&drift, &PhasePoint::new([0.0], [2.0], [3.0], [4.0])).unwrap();
    assert_eq!((d.z.clone(), d.cov_t.clone(), d.cov_v.clone()), (vec![3.0], vec![0.0], vec![2.0]));
    assert_eq!(a_map_inverse(&drift, &d).unwrap(), PhasePoint::new([0.0], [2.0], [3.0], [4.0]));
}

#[test]
fn tulczyjew_map_inverts_and_is_linear() {
    for seed in 0..4 {
        let model = common::random_atiyah(seed).reduce().unwrap();
        let mut sampler = Sampler::new(100 + seed);
        for _ in 0..50 {
            let p = sampler.phase_point(model.chart());
            let back = a_map_inverse(&model, &a_map(&model, &p).unwrap()).unwrap();
            assert!(back.max_distance(&p) < 1e-12);
            let scaled = PhasePoint {
                p: p.p.iter().map(|v| 3.0 * v).collect(),
                w: p.w.iter().map(|v| 3.0 * v).collect(),
                ..p.clone()
            };
            let (a, b) = (a_map(&model, &p).unwrap(), a_map(&model, &scaled).unwrap());
            for (u, v) in a.cov_t.iter().chain(&a.cov_v).zip(b.cov_t.iter().chain(&b.cov_v)) {
                assert!((3.0 * u - v).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn dual_map_matches_linear_involution() {
    for seed in 0..4 {
        let model = common::random_atiyah(seed).reduce().unwrap();
        let mut sampler = Sampler::new(200 + seed);
        for _ in 0..50 {
            let j = sampler.jet_point(model.chart());
            let r = dual_map_residual(&model, &j.x, &j.y, &j.z, &j.v).unwrap();
            assert!(r < 1e-12);
        }
    }
}

fn oscillator() -> LagrangianSystem {
    LagrangianSystem::parse(common::flat_tq(), "0.5*y1^2 - 0.5*q^2").unwrap()
}

#[test]
fn oscillator_point_lies_in_s_l() {
    let sys = oscillator();
    let a = APoint::new([0.2, 0.6], [0.3]);
    let point = PhasePoint::new([0.2, 0.6], [0.3], [0.3], [-0.6]);
    assert_eq!(s_l_residual(&sys, &a, &point).unwrap().max(), 0.0);
    assert_eq!(s_l_point(&sys, &a).unwrap(), point);
    let off = PhasePoint::new([0.2, 0.6], [0.3], [0.5], [-0.6]);
    let r = s_l_residual(&sys, &a, &off).unwrap();
    assert!((r.res_z[0] - 0.2).abs() < 1e-15);
    assert!(s_l_residual(&sys, &APoint::new([0.0, 0.6], [0.3]), &point).is_err());
}

#[test]
fn s_l_residual_sees_each_block() {
    let problem = common::load("atiyah_so3");
    let sys = problem.lagrangian.as_ref().unwrap();
    let mut sampler = Sampler::new(5);
    let eps = 1e-3;
    for _ in 0..20 {
        let a = sampler.a_point(problem.model.chart());
        let point = s_l_point(sys, &a).unwrap();
        assert!(s_l_residual(sys, &a, &point).unwrap().max() < 1e-12);
        let n = a.y.len();
        for k in 0..n {
            let mut bumped = point.clone();
            bumped.p[k] += eps;
            let r = s_l_residual(sys, &a, &bumped).unwrap();
            assert!(r.res_p[k].abs() >= eps / 2.0);
            let mut bumped = point.clone();
            bumped.z[k] += eps;
            assert!(s_l_residual(sys, &a, &bumped).unwrap().res_z[k].abs() >= eps / 2.0);
            let mut bumped = point.clone();
            bumped.w[k] += eps;
            assert!(s_l_residual(sys, &a, &bumped).unwrap().res_v[k].abs() >= eps / 2.0);
        }
    }
}

#[test]
fn hamiltonian_generator() {
    let h = HamiltonianSystem::parse(common::flat_tq(), "0.5*p1^2 + 0.5*q^2").unwrap();
    let q = VStarPoint::new([0.0, 1.0], [0.0]);
    assert_eq!(s_h_point(&h, &q).unwrap(), PhasePoint::new([0.0, 1.0], [0.0], [0.0], [-1.0]));
    let c = HamiltonianSystem::parse(common::flat_tq(), "2").unwrap();
    let point = s_h_point(&c, &VStarPoint::new([0.4, 0.1], [0.7])).unwrap();
    assert_eq!((point.z, point.w), (vec![0.0], vec![0.0]));
    let off = PhasePoint::new([0.0, 1.0], [0.0], [0.0], [-0.5]);
    assert_eq!(s_h_residual(&h, &off).unwrap(), 0.5);
}

#[test]
fn lagrangian_and_hamiltonian_submanifolds_coincide() {
    for name in common::SHIPPED {
        let problem = common::load(name);
        let Some(lag) = problem.lagrangian.clone() else { continue };
        let pair = LegendrePair::new(lag, problem.newton());
        let mut sampler = Sampler::new(31);
        for _ in 0..50 {
            let a = sampler.a_point(problem.model.chart());
            let (forward, backward) = cross_residuals(&pair, &a).unwrap();
            assert!(forward < 1e-8 && backward < 1e-8, "{name}");
        }
    }
}

#[test]
fn lifted_hamilton_curve_is_admissible() {
    let problem = common::load("atiyah_magnetic");
    let sys = problem.hamiltonian.as_ref().unwrap();
    let m = problem.model.base_dim();
    let tr = integrate_rk4(sys.hamilton_vector_field(), &[0.0, 0.5, 0.2, 1.0], 0.0, 1.0, 1e-3).unwrap();
    let curve: Vec<PhasePoint> =
        tr.states.iter().map(|s| s_h_point(sys, &VStarPoint::new(&s[..m], &s[m..])).unwrap()).collect();
    let (base, fibre) = admissibility_residual(&problem.model, &tr.times, &curve).unwrap();
    assert!(base < 1e-4 && fibre < 1e-4, "{base} {fibre}");
}

#[test]
fn lifted_lagrangian_curve_is_admissible() {
    let problem = common::load("atiyah_so3");
    let lag = problem.lagrangian.as_ref().unwrap();
    let m = problem.model.base_dim();
    let tr = integrate_rk4(lag.el_vector_field(), &[0.0, 0.1, 0.3, -0.2, 0.5, 0.1], 0.0, 0.5, 1e-3).unwrap();
    let curve: Vec<PhasePoint> =
        tr.states.iter().map(|s| s_l_point(lag, &APoint::new(&s[..m], &s[m..])).unwrap()).collect();
    let (base, fibre) = admissibility_residual(&problem.model, &tr.times, &curve).unwrap();
    assert!(base < 1e-4 && fibre < 1e-4, "{base} {fibre}");
}

#[test]
fn resting_curve_is_admissible() {
    let model = Arc::new(ModelBuilder::new(Chart::new(&["x"], 1).unwrap()).build());
    let times = [0.0, 0.5, 1.0];
    let curve = vec![PhasePoint::new([0.3], [1.2], [0.0], [0.0]); 3];
    let (base, fibre) = admissibility_residual(&model, &times, &curve).unwrap();
    assert!(base < 1e-15 && fibre < 1e-15);
    assert!(admissibility_residual(&model, &times[..2], &curve).is_err());
}
