mod common;

use std::sync::Arc;

use affmech::flow::integrate_rk4;
use affmech::hamiltonian::HamiltonianSystem;
use affmech::sampling::Sampler;
use affmech::VStarPoint;

fn flat(src: &str) -> HamiltonianSystem {
    HamiltonianSystem::parse(common::flat_tq(), src).unwrap()
}

fn rigid_body() -> HamiltonianSystem {
    HamiltonianSystem::parse(Arc::new(common::so3_model()), "0.5*(p1^2 + p2^2/2 + p3^2/3)").unwrap()
}

#[test]
fn oscillator_cosymplectic_entries() {
    let cd = flat("0.5*p1^2 + 0.5*q^2").omega_h(&VStarPoint::new([0.0, 1.0], [0.0])).unwrap();
    assert_eq!(cd.omega[(1, 2)], 1.0);
    assert_eq!(cd.omega[(1, 0)], 1.0);
    assert_eq!(cd.omega[(2, 0)], 0.0);
    assert_eq!(cd.omega[(0, 1)], -1.0);
    assert_eq!(cd.eta, vec![1.0, 0.0, 0.0]);
}

#[test]
fn constant_hamiltonian_has_only_canonical_part() {
    let cd = flat("4").omega_h(&VStarPoint::new([0.2, 0.3], [0.7])).unwrap();
    let mut expected = nalgebra::DMatrix::zeros(3, 3);
    expected[(1, 2)] = 1.0;
    expected[(2, 1)] = -1.0;
    assert_eq!(cd.omega, expected);
    let r = flat("4").reeb_section(&VStarPoint::new([0.2, 0.3], [0.7])).unwrap();
    assert_eq!(r, vec![1.0, 0.0, 0.0]);
}

#[test]
fn oscillator_reeb_section() {
    let r = flat("0.5*p1^2 + 0.5*q^2").reeb_section(&VStarPoint::new([0.0, 1.0], [0.0])).unwrap();
    assert_eq!(r, vec![1.0, 0.0, -1.0]);
}

#[test]
fn rigid_body_reeb_gives_euler_equations() {
    let sys = rigid_body();
    let y = [1.0, 2.0, 3.0];
    let omega = [1.0, 1.0, 1.0];
    let c = common::so3_constants();
    let r = sys.reeb_section(&VStarPoint::new([0.0], y)).unwrap();
    for a in 0..3 {
        let mut rhs = 0.0;
        for b in 0..3 {
            for g in 0..3 {
                rhs += y[g] * c[b][a][g] * omega[b];
            }
        }
        assert!((r[4 + a] - rhs).abs() < 1e-15);
        assert!((r[1 + a] - omega[a]).abs() < 1e-15);
    }
}

#[test]
fn oscillator_flow() {
    let sys = flat("0.5*p1^2 + 0.5*q^2");
    assert_eq!(sys.hamilton_rhs(&[0.0, 0.5, -0.2]).unwrap(), vec![1.0, -0.2, -0.5]);
    let tr = integrate_rk4(sys.hamilton_vector_field(), &[0.0, 1.0, 0.0], 0.0, 1.0, 1e-3).unwrap();
    assert!((tr.last_state()[1] - 1f64.cos()).abs() < 1e-6);
    assert!((tr.last_state()[2] + 1f64.sin()).abs() < 1e-6);
    let res = sys.hamilton_residual(&tr.times, &tr.states).unwrap();
    assert!(res.iter().all(|r| *r < 1e-5));
}

#[test]
fn constant_hamiltonian_drifts() {
    let sys = HamiltonianSystem::parse(Arc::new(common::drift_model(2.0)), "1.5").unwrap();
    assert_eq!(sys.hamilton_rhs(&[0.3, 0.25]).unwrap(), vec![1.0, 0.5]);
}

#[test]
fn rigid_body_casimir_is_conserved() {
    let sys = rigid_body();
    let tr = integrate_rk4(sys.hamilton_vector_field(), &[0.0, 1.0, 2.0, 3.0], 0.0, 10.0, 1e-3).unwrap();
    let casimir = |s: &[f64]| 0.5 * (s[1] * s[1] + s[2] * s[2] + s[3] * s[3]);
    let energy = |s: &[f64]| sys.value(&VStarPoint::new([s[0]], &s[1..])).unwrap();
    let (c0, e0) = (casimir(&tr.states[0]), energy(&tr.states[0]));
    for s in &tr.states {
        assert!((casimir(s) - c0).abs() < 1e-6);
        assert!((energy(s) - e0).abs() < 1e-6);
    }
}

#[test]
fn poisson_route_matches_hamilton_equations() {
    for name in common::SHIPPED {
        let problem = common::load(name);
        let Some(sys) = problem.hamiltonian.as_ref() else { continue };
        let mut sampler = Sampler::new(11);
        for _ in 0..50 {
            let q = sampler.vstar_point(problem.model.chart());
            let state = q.coords();
            let direct = sys.hamilton_rhs(&state).unwrap();
            for p0 in [-1.0, 0.0, 1.0] {
                let routed = sys.poisson_rhs(&state, p0).unwrap();
                for (a, b) in direct.iter().zip(&routed) {
                    assert!((a - b).abs() < 1e-10, "{name} p0={p0}");
                }
            }
        }
    }
}

#[test]
fn bracket_sign_and_antisymmetry() {
    let model = common::flat_tq();
    let h = HamiltonianSystem::parse(model.clone(), "p1").unwrap();
    let g = HamiltonianSystem::parse(model.clone(), "q").unwrap();
    let mut sampler = Sampler::new(2);
    for _ in 0..10 {
        let q = sampler.vstar_point(model.chart());
        assert_eq!(h.aff_poisson_bracket(&g, &q).unwrap(), 1.0);
        assert_eq!(g.aff_poisson_bracket(&h, &q).unwrap(), -1.0);
    }
    let problem = common::load("rigid_body");
    let h = problem.hamiltonian.unwrap();
    let c = HamiltonianSystem::new(problem.model.clone(), problem.casimir.unwrap()).unwrap();
    let mut sampler = Sampler::new(3);
    for _ in 0..20 {
        let q = sampler.vstar_point(problem.model.chart());
        assert!(h.aff_poisson_bracket(&h, &q).unwrap().abs() < 1e-15);
        let hc = h.aff_poisson_bracket(&c, &q).unwrap();
        let ch = c.aff_poisson_bracket(&h, &q).unwrap();
        assert!((hc + ch).abs() < 1e-14);
        // The Casimir commutes with everything.
        assert!(hc.abs() < 1e-13);
    }
}

#[test]
fn bracket_needs_a_common_model() {
    let a = flat("p1");
    let b = rigid_body();
    assert!(a.aff_poisson_bracket(&b, &VStarPoint::new([0.0, 0.0], [0.0])).is_err());
}

#[test]
fn bivector_is_affine_in_momenta() {
    for name in common::SHIPPED {
        let problem = common::load(name);
        let Some(sys) = problem.hamiltonian.as_ref() else { continue };
        let mut sampler = Sampler::new(21);
        for _ in 0..10 {
            let q = sampler.vstar_point(problem.model.chart());
            let zero = vec![0.0; q.p.len()];
            let twice: Vec<f64> = q.p.iter().map(|v| 2.0 * v).collect();
            let base = sys.poisson(&q.x, &zero).unwrap().pi;
            let one = sys.poisson(&q.x, &q.p).unwrap().pi;
            let two = sys.poisson(&q.x, &twice).unwrap().pi;
            assert!((&two - &base - 2.0 * (&one - &base)).amax() < 1e-12, "{name}");
            assert!((&one + one.transpose()).amax() == 0.0, "{name}");
        }
    }
}

#[test]
fn cosymplectic_identities_and_volume() {
    for name in common::SHIPPED {
        let problem = common::load(name);
        let Some(sys) = problem.hamiltonian.as_ref() else { continue };
        let mut sampler = Sampler::new(4);
        for _ in 0..50 {
            let q = sampler.vstar_point(problem.model.chart());
            let (kernel, normal) = sys.cosymplectic_check(&q).unwrap();
            assert!(kernel < 1e-9 && normal < 1e-12, "{name}");
            assert!(sys.omega_h(&q).unwrap().volume().abs() > 1e-12, "{name}");
        }
    }
}
