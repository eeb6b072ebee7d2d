mod common;

use std::sync::Arc;

use affmech::hamiltonian::HamiltonianSystem;
use affmech::lagrangian::LagrangianSystem;
use affmech::legendre::{fh, fh_inverse, l_from_h, l_from_h_with_section, LegendrePair, NewtonOptions};
use affmech::sampling::Sampler;
use affmech::{APoint, Error, VStarPoint};

fn pair(model: Arc<affmech::AffgebroidModel>, src: &str) -> LegendrePair {
    LegendrePair::new(LagrangianSystem::parse(model, src).unwrap(), NewtonOptions::default())
}

fn flat(src: &str) -> LegendrePair {
    pair(common::flat_tq(), src)
}

fn so3_pair() -> LegendrePair {
    pair(Arc::new(common::so3_model()), "0.5*(y1^2 + 2*y2^2 + 3*y3^2)")
}

#[test]
fn leg_examples() {
    let q = flat("0.5*y1^2 - 0.5*q^2").leg(&APoint::new([0.1, 0.2], [0.3])).unwrap();
    assert_eq!(q, VStarPoint::new([0.1, 0.2], [0.3]));
    assert_eq!(flat("0.5*2*y1^2").leg(&APoint::new([0.0, 0.0], [1.5])).unwrap().p, vec![3.0]);
    assert_eq!(flat("0.25*y1^4").leg(&APoint::new([0.0, 0.0], [2.0])).unwrap().p, vec![8.0]);
}

#[test]
fn extended_legendre_map() {
    let e = flat("1.75").leg_extended(&APoint::new([0.2, 0.4], [0.9])).unwrap();
    assert_eq!((e.p0, e.p.clone()), (1.75, vec![0.0]));
    let e = flat("0.5*y1^2 - 0.5*q^2").leg_extended(&APoint::new([0.0, 1.0], [2.0])).unwrap();
    assert_eq!(e.p0, 0.5 * 4.0 - 0.5 - 4.0);
    assert_eq!(e.project(), VStarPoint::new([0.0, 1.0], [2.0]));
}

#[test]
fn inverse_examples() {
    let a = flat("2*0.5*y1^2").leg_inverse(&VStarPoint::new([0.0, 0.0], [3.0]), None).unwrap();
    assert!((a.y[0] - 1.5).abs() < 1e-15);
    let a = flat("0.25*y1^4").leg_inverse(&VStarPoint::new([0.0, 0.0], [8.0]), Some(&[1.0])).unwrap();
    assert!((a.y[0] - 2.0).abs() < 1e-12);
    let osc = flat("0.5*y1^2 - 0.5*q^2");
    let a = osc.leg_inverse(&VStarPoint::new([0.3, -0.6], [0.45]), None).unwrap();
    assert_eq!(a, APoint::new([0.3, -0.6], [0.45]));
}

#[test]
fn singular_inverse_is_reported() {
    let r = flat("y1 + q").leg_inverse(&VStarPoint::new([0.0, 0.0], [2.0]), None);
    assert!(matches!(r, Err(Error::SingularLagrangian { .. })));
}

#[test]
fn diverging_newton_is_reported() {
    // dL/dy = y / sqrt(1 + y^2) stays below 1, so p = 2 has no preimage.
    let p = LegendrePair::new(
        LagrangianSystem::parse(common::flat_tq(), "sqrt(1 + y1^2)").unwrap(),
        NewtonOptions { tol: 1e-12, max_iter: 30 },
    );
    let r = p.leg_inverse(&VStarPoint::new([0.0, 0.0], [2.0]), None);
    assert!(r.is_err(), "{r:?}");
}

#[test]
fn hamiltonian_of_lagrangian() {
    let osc = flat("0.5*y1^2 - 0.5*q^2");
    let h = osc.h_from_l(&VStarPoint::new([0.0, 0.6], [0.8]), None).unwrap();
    assert!((h - 0.5).abs() < 1e-15);
    let rb = so3_pair();
    let p = [0.4, -1.2, 0.9];
    let h = rb.h_from_l(&VStarPoint::new([0.0], p), None).unwrap();
    let exact = 0.5 * (p[0] * p[0] + p[1] * p[1] / 2.0 + p[2] * p[2] / 3.0);
    assert!((h - exact).abs() < 1e-15);
}

#[test]
fn hl_jet_identities() {
    let rb = so3_pair();
    let q = VStarPoint::new([0.0], [0.4, -1.2, 0.9]);
    let (jet, y) = rb.hl_jet(&q, None).unwrap();
    assert_eq!(jet.dp, y);
    assert!((y[1] + 0.6).abs() < 1e-15 && (y[2] - 0.3).abs() < 1e-15);
    let osc = flat("0.5*y1^2 - 0.5*q^2");
    let (jet, _) = osc.hl_jet(&VStarPoint::new([0.0, 0.7], [0.1]), None).unwrap();
    assert!((jet.dx[1] - 0.7).abs() < 1e-15);
}

#[test]
fn round_trip_on_shipped_examples() {
    for name in common::SHIPPED {
        let problem = common::load(name);
        let Some(lag) = problem.lagrangian.clone() else { continue };
        let pair = LegendrePair::new(lag, problem.newton());
        let mut sampler = Sampler::new(7);
        for _ in 0..100 {
            let a = sampler.a_point(problem.model.chart());
            let back = pair.leg_inverse(&pair.leg(&a).unwrap(), None).unwrap();
            assert!(back.max_distance(&a) < 1e-10, "{name}");
        }
    }
}

#[test]
fn fibre_derivative_of_hamiltonian() {
    let h = HamiltonianSystem::parse(common::flat_tq(), "0.5*p1^2").unwrap();
    let (a, det, regular) = fh(&h, &VStarPoint::new([0.0, 0.0], [0.7])).unwrap();
    assert_eq!((a.y, det, regular), (vec![0.7], 1.0, true));
    let rb = HamiltonianSystem::parse(Arc::new(common::so3_model()), "0.5*(p1^2 + p2^2/2 + p3^2/3)").unwrap();
    let (a, _, _) = fh(&rb, &VStarPoint::new([0.0], [1.0, 1.0, 1.0])).unwrap();
    assert!((a.y[1] - 0.5).abs() < 1e-16 && (a.y[2] - 1.0 / 3.0).abs() < 1e-16);
    let lin = HamiltonianSystem::parse(common::flat_tq(), "3*p1 + q").unwrap();
    assert!(!fh(&lin, &VStarPoint::new([0.0, 0.0], [0.7])).unwrap().2);
    let r = fh_inverse(&lin, &APoint::new([0.0, 0.0], [1.0]), None, NewtonOptions::default());
    assert!(matches!(r, Err(Error::SingularHamiltonian { .. })));
}

#[test]
fn lagrangian_of_hamiltonian() {
    let opts = NewtonOptions::default();
    let h = HamiltonianSystem::parse(common::flat_tq(), "0.5*p1^2 + 0.5*q^2").unwrap();
    let a = APoint::new([0.1, 0.8], [-0.4]);
    let l = l_from_h(&h, &a, None, opts).unwrap();
    assert!((l - (0.5 * 0.16 - 0.5 * 0.64)).abs() < 1e-15);
    let rb = HamiltonianSystem::parse(Arc::new(common::so3_model()), "0.5*(p1^2 + p2^2/2 + p3^2/3)").unwrap();
    let a = APoint::new([0.0], [0.2, -0.5, 0.9]);
    let l = l_from_h(&rb, &a, None, opts).unwrap();
    let exact = 0.5 * (0.04 + 2.0 * 0.25 + 3.0 * 0.81);
    assert!((l - exact).abs() < 1e-14);
    for r in [[0.0, 0.0, 0.0], [1.0, -2.0, 0.5], [7.0, 3.0, -4.0]] {
        let shifted = l_from_h_with_section(&rb, &a, &r, None, opts).unwrap();
        assert!((shifted - l).abs() < 1e-12);
    }
}

#[test]
fn reconstructed_lagrangian_has_momentum_derivative() {
    let opts = NewtonOptions::default();
    let h = HamiltonianSystem::parse(common::flat_tq(), "0.5*p1^2 + 0.25*p1^4 + q*p1 + cos(t)").unwrap();
    let mut sampler = Sampler::new(14);
    for _ in 0..20 {
        let a = sampler.a_point(h.model().chart());
        let p = fh_inverse(&h, &a, None, opts).unwrap().p[0];
        let step = 1e-5;
        let up = l_from_h(&h, &APoint::new(a.x.clone(), [a.y[0] + step]), None, opts).unwrap();
        let down = l_from_h(&h, &APoint::new(a.x.clone(), [a.y[0] - step]), None, opts).unwrap();
        assert!(((up - down) / (2.0 * step) - p).abs() < 1e-8);
        // Back through the fibre derivative: y p - L(y) reproduces H.
        let l = l_from_h(&h, &a, None, opts).unwrap();
        let hv = h.value(&VStarPoint::new(a.x.clone(), [p])).unwrap();
        assert!((a.y[0] * p - l - hv).abs() < 1e-12);
        let (image, _, _) = fh(&h, &VStarPoint::new(a.x.clone(), [p])).unwrap();
        assert!(image.max_distance(&a) < 1e-12);
    }
}

#[test]
fn flows_commute() {
    let osc = flat("0.5*y1^2 - 0.5*q^2");
    assert!(osc.flow_commutation_check(&APoint::new([0.0, 1.0], [0.0]), 1.0, 1e-3).unwrap() < 1e-5);
    let free = flat("0.5*y1^2");
    assert!(free.flow_commutation_check(&APoint::new([0.0, 0.3], [0.7]), 1.0, 1e-2).unwrap() < 1e-10);
    let rb = so3_pair();
    let dev = rb.flow_commutation_check(&APoint::new([0.0], [1.0, 1.0, 1.0]), 5.0, 1e-3).unwrap();
    assert!(dev < 1e-5, "{dev}");
}
