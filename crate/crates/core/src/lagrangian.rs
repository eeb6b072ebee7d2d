//! Euler-Lagrange dynamics of a Lagrangian `L(x, y)`.
//!
//! Matrices and sections use the frame `(T0, T1..Tn, V1..Vn)` of the
//! prolongation, with indices `0`, `1..=n`, `n+1..=2n`.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{fmt_point, Error, Result};
use crate::linalg::{add_wedge, condition_number, max_abs, singular, solve, unit};
use crate::model::{APoint, AffgebroidModel, StructureValues};
use crate::scalarfield::ScalarField;

/// Model and Lagrangian.
#[derive(Debug, Clone)]
pub struct LagrangianSystem {
    model: Arc<AffgebroidModel>,
    l: ScalarField,
}

/// Value and first/second derivatives of `L` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianJet {
    pub value: f64,
    /// `dL/dx^i`
    pub dx: Vec<f64>,
    /// `dL/dy^a`
    pub dy: Vec<f64>,
    /// `d2L/dy^a dy^b`
    pub w: DMatrix<f64>,
    /// `d2L/dy^a dx^i`, stored `n x m`
    pub wxy: DMatrix<f64>,
}

/// Poincare-Cartan data at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct CartanData {
    /// `T0` component of the Cartan 1-section, `L - y^a dL/dy^a`.
    pub theta0: f64,
    /// `T_a` components, `dL/dy^a`.
    pub theta: Vec<f64>,
    /// Cartan 2-section as an antisymmetric `(2n+1)` matrix, `omega[(a, b)] = Omega(e_a, e_b)`.
    pub omega: DMatrix<f64>,
    pub w: DMatrix<f64>,
    pub regular: bool,
}

/// Regularity verdict for the fibre Hessian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regularity {
    pub regular: bool,
    pub det: f64,
    pub condition: f64,
}

impl LagrangianSystem {
    /// `l` must be written in the chart's `(x, y)` names; it is rebound to
    /// that exact order.
    pub fn new(model: Arc<AffgebroidModel>, l: ScalarField) -> Result<Self> {
        let vars = model.chart().lagrangian_vars();
        let l = if l.vars() == vars.as_slice() { l } else { l.rebind(&vars)? };
        Ok(LagrangianSystem { model, l })
    }

    pub fn parse(model: Arc<AffgebroidModel>, src: &str) -> Result<Self> {
        let l = ScalarField::parse(src, &model.chart().lagrangian_vars())?;
        Ok(LagrangianSystem { model, l })
    }

    pub fn model(&self) -> &AffgebroidModel {
        &self.model
    }

    pub fn model_arc(&self) -> &Arc<AffgebroidModel> {
        &self.model
    }

    pub fn lagrangian(&self) -> &ScalarField {
        &self.l
    }

    fn check(&self, a: &APoint) -> Result<()> {
        let (m, n) = (self.model.base_dim(), self.model.fibre_dim());
        if a.x.len() != m || a.y.len() != n {
            return Err(Error::Dimension(format!("point on A needs {m} base and {n} fibre coordinates")));
        }
        Ok(())
    }

    pub fn value(&self, a: &APoint) -> Result<f64> {
        self.check(a)?;
        self.l.eval(&a.coords())
    }

    pub fn jet(&self, a: &APoint) -> Result<LagrangianJet> {
        self.check(a)?;
        let (m, n) = (self.model.base_dim(), self.model.fibre_dim());
        let all: Vec<usize> = (0..m + n).collect();
        let d = self.l.eval_dual2(&a.coords(), &all)?;
        let k = m + n;
        Ok(LagrangianJet {
            value: d.value,
            dx: d.grad[..m].to_vec(),
            dy: d.grad[m..].to_vec(),
            w: DMatrix::from_fn(n, n, |r, c| d.hess[(m + r) * k + m + c]),
            wxy: DMatrix::from_fn(n, m, |r, c| d.hess[(m + r) * k + c]),
        })
    }

    /// Momenta `dL/dy` and fibre Hessian only.
    pub fn fibre_jet(&self, a: &APoint) -> Result<(Vec<f64>, DMatrix<f64>)> {
        self.check(a)?;
        let (m, n) = (self.model.base_dim(), self.model.fibre_dim());
        let active: Vec<usize> = (m..m + n).collect();
        let d = self.l.eval_dual2(&a.coords(), &active)?;
        Ok((d.grad.clone(), DMatrix::from_fn(n, n, |r, c| d.hess[r * n + c])))
    }

    pub fn is_regular(&self, a: &APoint) -> Result<Regularity> {
        let (_, w) = self.fibre_jet(a)?;
        Ok(regularity(&w))
    }

    /// Components `(1, y, xi)` of the Euler-Lagrange section.
    pub fn el_section(&self, a: &APoint) -> Result<Vec<f64>> {
        let sv = self.model.eval(&a.x)?;
        let jet = self.jet(a)?;
        let xi = self.el_accel(&sv, a, &jet)?;
        Ok(section(&a.y, &xi))
    }

    fn el_accel(&self, sv: &StructureValues, a: &APoint, jet: &LagrangianJet) -> Result<Vec<f64>> {
        let n = self.model.fibre_dim();
        let det = jet.w.determinant();
        if singular(&jet.w, det) {
            return Err(Error::SingularLagrangian { det: det.abs(), at: fmt_point(&[&a.x, &a.y]) });
        }
        let rhs: Vec<f64> = (0..n).map(|b| el_source(sv, a, jet, b)).collect();
        solve(&jet.w, &rhs)
            .ok_or_else(|| Error::SingularLagrangian { det: det.abs(), at: fmt_point(&[&a.x, &a.y]) })
    }

    /// Cartan data, with the auxiliary second-order field set to the
    /// Euler-Lagrange section where `L` is regular and to zero otherwise.
    pub fn cartan_data(&self, a: &APoint) -> Result<CartanData> {
        let sv = self.model.eval(&a.x)?;
        let jet = self.jet(a)?;
        let reg = regularity(&jet.w);
        let xi0 = if reg.regular { self.el_accel(&sv, a, &jet)? } else { vec![0.0; self.model.fibre_dim()] };
        Ok(CartanData {
            theta0: jet.value - dot(&a.y, &jet.dy),
            theta: jet.dy.clone(),
            omega: cartan_omega(&sv, a, &jet, &xi0),
            w: jet.w.clone(),
            regular: reg.regular,
        })
    }

    /// The Cartan 2-section assembled with an explicit auxiliary
    /// second-order field `xi0`. The result does not depend on `xi0`.
    pub fn cartan_omega_with(&self, a: &APoint, xi0: &[f64]) -> Result<DMatrix<f64>> {
        let sv = self.model.eval(&a.x)?;
        let jet = self.jet(a)?;
        Ok(cartan_omega(&sv, a, &jet, xi0))
    }

    /// State derivative on `(x, y)`: admissible base velocity and the
    /// fibre acceleration of the Euler-Lagrange section.
    pub fn el_rhs(&self, state: &[f64]) -> Result<Vec<f64>> {
        let m = self.model.base_dim();
        if state.len() != m + self.model.fibre_dim() {
            return Err(Error::Dimension("state must be (x, y)".into()));
        }
        let a = APoint::new(&state[..m], &state[m..]);
        let sv = self.model.eval(&a.x)?;
        let jet = self.jet(&a)?;
        let xi = self.el_accel(&sv, &a, &jet)?;
        let mut out = sv.anchor(1.0, &a.y);
        out.extend(xi);
        Ok(out)
    }

    pub fn el_vector_field(&self) -> impl Fn(&[f64]) -> Result<Vec<f64>> + Sync + '_ {
        move |s: &[f64]| self.el_rhs(s)
    }

    /// `(|i_R Omega|_inf, |phi0(R) - 1|)` for the Euler-Lagrange section `R`.
    pub fn cosymplectic_check(&self, a: &APoint) -> Result<(f64, f64)> {
        let cd = self.cartan_data(a)?;
        if !cd.regular {
            let det = cd.w.determinant();
            return Err(Error::SingularLagrangian { det: det.abs(), at: fmt_point(&[&a.x, &a.y]) });
        }
        let r = self.el_section(a)?;
        Ok(contraction_residual(&cd.omega, &r))
    }

    /// Right side of the Euler-Lagrange equations for `d/dt (dL/dy^a)`.
    pub fn momentum_rhs(&self, a: &APoint) -> Result<Vec<f64>> {
        let sv = self.model.eval(&a.x)?;
        let m = self.model.base_dim();
        let n = self.model.fibre_dim();
        let active: Vec<usize> = (0..m + n).collect();
        let d = self.l.eval_grad(&a.coords(), &active)?;
        let (dx, dy) = d.grad.split_at(m);
        Ok(momentum_rhs(&sv, &a.y, dx, dy))
    }

    /// Energy `y^a dL/dy^a - L`.
    pub fn energy(&self, a: &APoint) -> Result<f64> {
        let m = self.model.base_dim();
        let n = self.model.fibre_dim();
        let active: Vec<usize> = (m..m + n).collect();
        let d = self.l.eval_grad(&a.coords(), &active)?;
        Ok(dot(&a.y, &d.grad) - d.value)
    }

    /// Per-sample defect of the Euler-Lagrange equations along a sampled
    /// curve `(x, y)(t)`: finite-difference `d/dt dL/dy` against the
    /// right-hand side.
    pub fn el_residual(&self, times: &[f64], states: &[Vec<f64>]) -> Result<Vec<f64>> {
        let m = self.model.base_dim();
        let n = self.model.fibre_dim();
        let mut momenta = Vec::with_capacity(states.len());
        let mut rhs = Vec::with_capacity(states.len());
        for s in states {
            let a = APoint::new(&s[..m], &s[m..]);
            momenta.push(self.fibre_jet(&a)?.0);
            rhs.push(self.momentum_rhs(&a)?);
        }
        let mut out = vec![0.0f64; states.len()];
        for b in 0..n {
            let series: Vec<f64> = momenta.iter().map(|p| p[b]).collect();
            let deriv = crate::flow::time_derivative(times, &series);
            for (k, d) in deriv.iter().enumerate() {
                out[k] = out[k].max((d - rhs[k][b]).abs());
            }
        }
        Ok(out)
    }
}

/// `rho_a(dL/dx) + (C0_a^g + C_ba^g y^b) dL/dy^g`
pub(crate) fn momentum_rhs(sv: &StructureValues, y: &[f64], dx: &[f64], dy: &[f64]) -> Vec<f64> {
    let n = sv.fibre_dim();
    let rho_dl = sv.anchor_dual(dx);
    (0..n)
        .map(|a| {
            let mut v = rho_dl[a];
            for g in 0..n {
                let mut coeff = sv.c0(a, g);
                for b in 0..n {
                    coeff += sv.c(b, a, g) * y[b];
                }
                v += coeff * dy[g];
            }
            v
        })
        .collect()
}

/// Right side of `W xi = ...` for fibre index `b`.
fn el_source(sv: &StructureValues, a: &APoint, jet: &LagrangianJet, b: usize) -> f64 {
    let (m, n) = (sv.base_dim(), sv.fibre_dim());
    let vel = sv.anchor(1.0, &a.y);
    let mut v = 0.0;
    for i in 0..m {
        v += sv.rho(b, i) * jet.dx[i] - vel[i] * jet.wxy[(b, i)];
    }
    for g in 0..n {
        let mut coeff = sv.c0(b, g);
        for mu in 0..n {
            coeff += a.y[mu] * sv.c(mu, b, g);
        }
        v += coeff * jet.dy[g];
    }
    v
}

fn cartan_omega(sv: &StructureValues, a: &APoint, jet: &LagrangianJet, xi0: &[f64]) -> DMatrix<f64> {
    let (m, n) = (sv.base_dim(), sv.fibre_dim());
    let k = 2 * n + 1;
    let t0 = unit(k, 0);
    // theta^a = T^a - y^a T0, psi^b = V^b - xi0^b T0
    let theta: Vec<Vec<f64>> = (0..n)
        .map(|al| {
            let mut v = unit(k, 1 + al);
            v[0] = -a.y[al];
            v
        })
        .collect();
    let psi: Vec<Vec<f64>> = (0..n)
        .map(|be| {
            let mut v = unit(k, 1 + n + be);
            v[0] = -xi0[be];
            v
        })
        .collect();
    let vel = sv.anchor(1.0, &a.y);
    let mut omega = DMatrix::zeros(k, k);
    for al in 0..n {
        let mut coeff = 0.0;
        for i in 0..m {
            coeff += vel[i] * jet.wxy[(al, i)] - sv.rho(al, i) * jet.dx[i];
        }
        for be in 0..n {
            coeff += xi0[be] * jet.w[(be, al)];
        }
        for g in 0..n {
            let mut c = sv.c0(al, g);
            for be in 0..n {
                c += sv.c(be, al, g) * a.y[be];
            }
            coeff -= jet.dy[g] * c;
        }
        add_wedge(&mut omega, coeff, &theta[al], &t0);
    }
    for al in 0..n {
        for be in 0..n {
            add_wedge(&mut omega, jet.w[(al, be)], &theta[al], &psi[be]);
        }
    }
    for al in 0..n {
        for be in al + 1..n {
            // half of the antisymmetric double sum, taken over a < b
            let mut b_ab = 0.0;
            for i in 0..m {
                b_ab += sv.rho(be, i) * jet.wxy[(al, i)] - sv.rho(al, i) * jet.wxy[(be, i)];
            }
            for g in 0..n {
                b_ab += jet.dy[g] * sv.c(al, be, g);
            }
            add_wedge(&mut omega, b_ab, &theta[al], &theta[be]);
        }
    }
    omega
}

fn section(y: &[f64], xi: &[f64]) -> Vec<f64> {
    let mut r = Vec::with_capacity(1 + y.len() + xi.len());
    r.push(1.0);
    r.extend_from_slice(y);
    r.extend_from_slice(xi);
    r
}

pub(crate) fn regularity(w: &DMatrix<f64>) -> Regularity {
    let det = w.determinant();
    Regularity { regular: !singular(w, det), det, condition: condition_number(w) }
}

/// `(|i_R Omega|_inf, |R_0 - 1|)`: the first form row is `e^0`.
pub(crate) fn contraction_residual(omega: &DMatrix<f64>, r: &[f64]) -> (f64, f64) {
    let k = omega.nrows();
    let contracted: Vec<f64> = (0..k).map(|b| (0..k).map(|a| r[a] * omega[(a, b)]).sum()).collect();
    (max_abs(&contracted), (r[0] - 1.0).abs())
}

/// Applies `S = (T^a - y^a T^0) (x) V_a` to `(z0, z, v)`.
pub fn vertical_endomorphism(y: &[f64], vec: &[f64]) -> Vec<f64> {
    let n = y.len();
    let mut out = vec![0.0; 2 * n + 1];
    for a in 0..n {
        out[1 + n + a] = vec[1 + a] - y[a] * vec[0];
    }
    out
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
