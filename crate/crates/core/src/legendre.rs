//! Legendre duality between a Lagrangian and its Hamiltonian, in both
//! directions. The inverse maps are solved by damped Newton iteration.

use std::cell::RefCell;

use nalgebra::DMatrix;

use crate::error::{fmt_point, Error, Result};
use crate::flow::integrate_rk4;
use crate::hamiltonian::{hamilton_rhs, HamiltonianJet, HamiltonianSystem};
use crate::lagrangian::{dot, LagrangianSystem};
use crate::linalg::{max_abs, singular, solve};
use crate::model::{APoint, VStarPoint};

/// Newton stopping rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions { tol: 1e-12, max_iter: 50 }
    }
}

/// Solves `g(u) = 0` for `u` given `g` returning residual and Jacobian.
/// The step is halved while the residual grows. `on_singular` builds the
/// error for a singular Jacobian at `u`.
fn damped_newton<G, S>(mut g: G, seed: Vec<f64>, opts: NewtonOptions, on_singular: S) -> Result<Vec<f64>>
where
    G: FnMut(&[f64]) -> Result<(Vec<f64>, DMatrix<f64>)>,
    S: Fn(&[f64], f64) -> Error,
{
    let mut u = seed;
    let (mut res, mut jac) = g(&u)?;
    let mut norm = max_abs(&res);
    for _ in 0..opts.max_iter {
        if norm < opts.tol {
            return Ok(u);
        }
        let det = jac.determinant();
        if singular(&jac, det) {
            return Err(on_singular(&u, det));
        }
        let neg: Vec<f64> = res.iter().map(|r| -r).collect();
        let step = solve(&jac, &neg).ok_or_else(|| on_singular(&u, det))?;
        let mut lambda = 1.0;
        loop {
            let trial: Vec<f64> = u.iter().zip(&step).map(|(a, s)| a + lambda * s).collect();
            match g(&trial) {
                Ok((r, j)) => {
                    let n = max_abs(&r);
                    if n <= norm || n < opts.tol || lambda < 1e-6 {
                        u = trial;
                        res = r;
                        jac = j;
                        norm = n;
                        break;
                    }
                }
                Err(e) if lambda < 1e-6 => return Err(e),
                Err(_) => {}
            }
            lambda *= 0.5;
        }
    }
    if norm < opts.tol {
        return Ok(u);
    }
    Err(Error::NewtonDivergence { iterations: opts.max_iter, residual: norm })
}

/// `Leg_L(a)`: the point `(x, p0, p)` of the affine dual.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedPoint {
    pub x: Vec<f64>,
    pub p0: f64,
    pub p: Vec<f64>,
}

impl ExtendedPoint {
    /// Projection dropping `p0`.
    pub fn project(&self) -> VStarPoint {
        VStarPoint::new(self.x.clone(), self.p.clone())
    }
}

/// A Lagrangian with Newton settings for inverting its Legendre map. The
/// Hamiltonian `H_L(x, p) = y p - L(x, y)` is evaluated numerically.
#[derive(Debug, Clone)]
pub struct LegendrePair {
    lag: LagrangianSystem,
    newton: NewtonOptions,
}

impl LegendrePair {
    pub fn new(lag: LagrangianSystem, newton: NewtonOptions) -> Self {
        LegendrePair { lag, newton }
    }

    pub fn lagrangian(&self) -> &LagrangianSystem {
        &self.lag
    }

    pub fn newton(&self) -> NewtonOptions {
        self.newton
    }

    pub fn leg(&self, a: &APoint) -> Result<VStarPoint> {
        let (p, _) = self.lag.fibre_jet(a)?;
        Ok(VStarPoint::new(a.x.clone(), p))
    }

    pub fn leg_extended(&self, a: &APoint) -> Result<ExtendedPoint> {
        let n = self.lag.model().fibre_dim();
        let m = self.lag.model().base_dim();
        let active: Vec<usize> = (m..m + n).collect();
        let d = self.lag.lagrangian().eval_grad(&a.coords(), &active)?;
        Ok(ExtendedPoint { x: a.x.clone(), p0: d.value - dot(&a.y, &d.grad), p: d.grad })
    }

    /// Solves `dL/dy (x, y) = p` for `y`, starting from `seed` or zero.
    pub fn leg_inverse(&self, q: &VStarPoint, seed: Option<&[f64]>) -> Result<APoint> {
        let n = self.lag.model().fibre_dim();
        let start = seed.map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; n]);
        let y = damped_newton(
            |y| {
                let a = APoint::new(q.x.clone(), y.to_vec());
                let (dy, w) = self.lag.fibre_jet(&a)?;
                Ok((dy.iter().zip(&q.p).map(|(d, p)| d - p).collect(), w))
            },
            start,
            self.newton,
            |y, det| Error::SingularLagrangian { det: det.abs(), at: fmt_point(&[&q.x, y]) },
        )?;
        Ok(APoint::new(q.x.clone(), y))
    }

    pub fn h_from_l(&self, q: &VStarPoint, seed: Option<&[f64]>) -> Result<f64> {
        let a = self.leg_inverse(q, seed)?;
        Ok(dot(&a.y, &q.p) - self.lag.value(&a)?)
    }

    /// Jet of `H_L` by the implicit-function identities `dH_L/dp = y` and
    /// `dH_L/dx = -dL/dx`, together with the solved velocity.
    pub fn hl_jet(&self, q: &VStarPoint, seed: Option<&[f64]>) -> Result<(HamiltonianJet, Vec<f64>)> {
        let a = self.leg_inverse(q, seed)?;
        let m = self.lag.model().base_dim();
        let n = self.lag.model().fibre_dim();
        let all: Vec<usize> = (0..m + n).collect();
        let d = self.lag.lagrangian().eval_grad(&a.coords(), &all)?;
        let jet = HamiltonianJet {
            value: dot(&a.y, &q.p) - d.value,
            dx: d.grad[..m].iter().map(|v| -v).collect(),
            dp: a.y.clone(),
        };
        Ok((jet, a.y))
    }

    /// Hamilton equations of `H_L` with Newton warm-started from the
    /// previous call. Each returned closure owns its own cache.
    pub fn hl_vector_field(&self) -> impl FnMut(&[f64]) -> Result<Vec<f64>> + '_ {
        let warm: RefCell<Option<Vec<f64>>> = RefCell::new(None);
        let m = self.lag.model().base_dim();
        move |s: &[f64]| {
            let q = VStarPoint::new(&s[..m], &s[m..]);
            let seed = warm.borrow().clone();
            let (jet, y) = self.hl_jet(&q, seed.as_deref())?;
            *warm.borrow_mut() = Some(y);
            let sv = self.lag.model().eval(&q.x)?;
            Ok(hamilton_rhs(&sv, &q.p, &jet))
        }
    }

    /// Largest deviation `|leg(gamma(t)) - gammabar(t)|_inf` between the
    /// Euler-Lagrange curve from `a0` and the Hamilton curve of `H_L` from
    /// `leg(a0)`, over `t` in `[0, t1]` with RK4 step `dt`.
    pub fn flow_commutation_check(&self, a0: &APoint, t1: f64, dt: f64) -> Result<f64> {
        let m = self.lag.model().base_dim();
        let el = integrate_rk4(self.lag.el_vector_field(), &a0.coords(), 0.0, t1, dt)?;
        let q0 = self.leg(a0)?;
        let ham = integrate_rk4(self.hl_vector_field(), &q0.coords(), 0.0, t1, dt)?;
        let mut worst = 0.0f64;
        for (s, h) in el.states.iter().zip(&ham.states) {
            let image = self.leg(&APoint::new(&s[..m], &s[m..]))?;
            let dev = image.coords().iter().zip(h).fold(0.0f64, |acc, (u, v)| acc.max((u - v).abs()));
            worst = worst.max(dev);
        }
        Ok(worst)
    }
}

/// Fibre derivative `(x, dH/dp)` of a Hamiltonian, with `det d2H/dp dp`.
pub fn fh(sys: &HamiltonianSystem, q: &VStarPoint) -> Result<(APoint, f64, bool)> {
    let (dp, hess) = sys.momentum_hessian(q)?;
    let det = hess.determinant();
    Ok((APoint::new(q.x.clone(), dp), det, !singular(&hess, det)))
}

/// Solves `dH/dp (x, p) = y` for `p`.
pub fn fh_inverse(
    sys: &HamiltonianSystem,
    a: &APoint,
    seed: Option<&[f64]>,
    opts: NewtonOptions,
) -> Result<VStarPoint> {
    let n = sys.model().fibre_dim();
    let start = seed.map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; n]);
    let p = damped_newton(
        |p| {
            let q = VStarPoint::new(a.x.clone(), p.to_vec());
            let (dp, hess) = sys.momentum_hessian(&q)?;
            Ok((dp.iter().zip(&a.y).map(|(d, y)| d - y).collect(), hess))
        },
        start,
        opts,
        |p, det| Error::SingularHamiltonian { det: det.abs(), at: fmt_point(&[&a.x, p]) },
    )?;
    Ok(VStarPoint::new(a.x.clone(), p))
}

/// Lagrangian reconstructed from a regular Hamiltonian:
/// `L(x, y) = y p - H(x, p)` with `p` solving `dH/dp = y`.
pub fn l_from_h(
    sys: &HamiltonianSystem,
    a: &APoint,
    seed: Option<&[f64]>,
    opts: NewtonOptions,
) -> Result<f64> {
    let q = fh_inverse(sys, a, seed, opts)?;
    Ok(dot(&a.y, &q.p) - sys.value(&q)?)
}

/// The same reconstruction written through an auxiliary section `r` of
/// the affine bundle: `L(a) = p (y - r) + H_r(p)` with `H_r = -H + r p`.
/// The value does not depend on `r`.
pub fn l_from_h_with_section(
    sys: &HamiltonianSystem,
    a: &APoint,
    r: &[f64],
    seed: Option<&[f64]>,
    opts: NewtonOptions,
) -> Result<f64> {
    let q = fh_inverse(sys, a, seed, opts)?;
    let shifted: Vec<f64> = a.y.iter().zip(r).map(|(y, r)| y - r).collect();
    let h_r = -sys.value(&q)? + dot(r, &q.p);
    Ok(dot(&q.p, &shifted) + h_r)
}
