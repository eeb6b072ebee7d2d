//! Hamilton dynamics of a section `h(x, p) = (x, -H(x, p), p)`.
//!
//! Matrices and sections use the frame `(e~0, e~1..e~n, e-1..e-n)` with
//! indices `0`, `1..=n`, `n+1..=2n`. The linear Poisson structure lives on
//! coordinates `(x^1..x^m, p0, p1..pn)`.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{add_wedge, unit};
use crate::model::{AffgebroidModel, StructureValues, VStarPoint};
use crate::scalarfield::ScalarField;

/// Value and first derivatives of a Hamiltonian at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianJet {
    pub value: f64,
    pub dx: Vec<f64>,
    pub dp: Vec<f64>,
}

/// Cosymplectic pair at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct CosymplecticData {
    pub omega: DMatrix<f64>,
    pub eta: Vec<f64>,
}

impl CosymplecticData {
    /// Determinant of `omega + eta (x) eta`; non-zero exactly when
    /// `eta ^ omega^n` is a volume.
    pub fn volume(&self) -> f64 {
        let k = self.eta.len();
        DMatrix::from_fn(k, k, |a, b| self.omega[(a, b)] + self.eta[a] * self.eta[b]).determinant()
    }
}

/// Components of the linear Poisson bivector at a point, over
/// `(x^1..x^m, p0, p1..pn)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonData {
    pub pi: DMatrix<f64>,
}

/// Model and Hamiltonian field.
#[derive(Debug, Clone)]
pub struct HamiltonianSystem {
    model: Arc<AffgebroidModel>,
    h: ScalarField,
}

impl HamiltonianSystem {
    pub fn new(model: Arc<AffgebroidModel>, h: ScalarField) -> Result<Self> {
        let vars = model.chart().hamiltonian_vars();
        let h = if h.vars() == vars.as_slice() { h } else { h.rebind(&vars)? };
        Ok(HamiltonianSystem { model, h })
    }

    pub fn parse(model: Arc<AffgebroidModel>, src: &str) -> Result<Self> {
        let h = ScalarField::parse(src, &model.chart().hamiltonian_vars())?;
        Ok(HamiltonianSystem { model, h })
    }

    pub fn model(&self) -> &AffgebroidModel {
        &self.model
    }

    pub fn model_arc(&self) -> &Arc<AffgebroidModel> {
        &self.model
    }

    pub fn hamiltonian(&self) -> &ScalarField {
        &self.h
    }

    fn check(&self, q: &VStarPoint) -> Result<()> {
        let (m, n) = (self.model.base_dim(), self.model.fibre_dim());
        if q.x.len() != m || q.p.len() != n {
            return Err(Error::Dimension(format!("point on V* needs {m} base and {n} momentum coordinates")));
        }
        Ok(())
    }

    pub fn value(&self, q: &VStarPoint) -> Result<f64> {
        self.check(q)?;
        self.h.eval(&q.coords())
    }

    pub fn jet(&self, q: &VStarPoint) -> Result<HamiltonianJet> {
        self.check(q)?;
        let m = self.model.base_dim();
        let all: Vec<usize> = (0..m + self.model.fibre_dim()).collect();
        let d = self.h.eval_grad(&q.coords(), &all)?;
        Ok(HamiltonianJet { value: d.value, dx: d.grad[..m].to_vec(), dp: d.grad[m..].to_vec() })
    }

    /// `d2H/dp dp`.
    pub fn momentum_hessian(&self, q: &VStarPoint) -> Result<(Vec<f64>, DMatrix<f64>)> {
        self.check(q)?;
        let (m, n) = (self.model.base_dim(), self.model.fibre_dim());
        let active: Vec<usize> = (m..m + n).collect();
        let d = self.h.eval_dual2(&q.coords(), &active)?;
        Ok((d.grad.clone(), DMatrix::from_fn(n, n, |r, c| d.hess[r * n + c])))
    }

    pub fn omega_h(&self, q: &VStarPoint) -> Result<CosymplecticData> {
        let sv = self.model.eval(&q.x)?;
        Ok(cosymplectic(&sv, &q.p, &self.jet(q)?))
    }

    pub fn reeb_section(&self, q: &VStarPoint) -> Result<Vec<f64>> {
        let sv = self.model.eval(&q.x)?;
        Ok(reeb(&sv, &q.p, &self.jet(q)?))
    }

    /// `(|i_R Omega|_inf, |eta(R) - 1|)`.
    pub fn cosymplectic_check(&self, q: &VStarPoint) -> Result<(f64, f64)> {
        let sv = self.model.eval(&q.x)?;
        let jet = self.jet(q)?;
        let cd = cosymplectic(&sv, &q.p, &jet);
        let r = reeb(&sv, &q.p, &jet);
        Ok(crate::lagrangian::contraction_residual(&cd.omega, &r))
    }

    fn split(&self, state: &[f64]) -> Result<VStarPoint> {
        let m = self.model.base_dim();
        if state.len() != m + self.model.fibre_dim() {
            return Err(Error::Dimension("state must be (x, p)".into()));
        }
        Ok(VStarPoint::new(&state[..m], &state[m..]))
    }

    /// Hamilton equations on `(x, p)`.
    pub fn hamilton_rhs(&self, state: &[f64]) -> Result<Vec<f64>> {
        let q = self.split(state)?;
        let sv = self.model.eval(&q.x)?;
        Ok(hamilton_rhs(&sv, &q.p, &self.jet(&q)?))
    }

    pub fn hamilton_vector_field(&self) -> impl Fn(&[f64]) -> Result<Vec<f64>> + Sync + '_ {
        move |s: &[f64]| self.hamilton_rhs(s)
    }

    /// Per-sample defect of the Hamilton equations along a sampled curve
    /// `(x, p)(t)`, from finite differences in time.
    pub fn hamilton_residual(&self, times: &[f64], states: &[Vec<f64>]) -> Result<Vec<f64>> {
        let rhs = states.iter().map(|s| self.hamilton_rhs(s)).collect::<Result<Vec<_>>>()?;
        let dim = self.model.base_dim() + self.model.fibre_dim();
        let mut out = vec![0.0f64; states.len()];
        for k in 0..dim {
            let series: Vec<f64> = states.iter().map(|s| s[k]).collect();
            for (i, d) in crate::flow::time_derivative(times, &series).iter().enumerate() {
                out[i] = out[i].max((d - rhs[i][k]).abs());
            }
        }
        Ok(out)
    }

    pub fn poisson(&self, x: &[f64], p: &[f64]) -> Result<PoissonData> {
        let sv = self.model.eval(x)?;
        Ok(poisson_bivector(&sv, p))
    }

    /// Differential of `F_h(x, p0, p) = -H(x, p) - p0` over `(x, p0, p)`.
    fn affine_differential(&self, q: &VStarPoint) -> Result<Vec<f64>> {
        let jet = self.jet(q)?;
        let mut d: Vec<f64> = jet.dx.iter().map(|v| -v).collect();
        d.push(-1.0);
        d.extend(jet.dp.iter().map(|v| -v));
        Ok(d)
    }

    /// Hamiltonian field of `F_h` for the Poisson bivector evaluated at
    /// `(x, p0, p)`, with the `p0` row dropped.
    pub fn poisson_rhs(&self, state: &[f64], p0: f64) -> Result<Vec<f64>> {
        let q = self.split(state)?;
        let sv = self.model.eval(&q.x)?;
        let pi = poisson_bivector_at(&sv, p0, &q.p);
        let df = self.affine_differential(&q)?;
        let m = self.model.base_dim();
        let k = df.len();
        Ok((0..k).filter(|&b| b != m).map(|b| (0..k).map(|a| pi[(b, a)] * df[a]).sum()).collect())
    }

    pub fn poisson_hamiltonian_field(&self, p0: f64) -> impl Fn(&[f64]) -> Result<Vec<f64>> + Sync + '_ {
        move |s: &[f64]| self.poisson_rhs(s, p0)
    }

    /// Bracket of two Hamiltonian sections over the same model, computed
    /// through their affine functions at `p0 = 0`.
    pub fn aff_poisson_bracket(&self, other: &HamiltonianSystem, q: &VStarPoint) -> Result<f64> {
        self.aff_poisson_bracket_at(other, q, 0.0)
    }

    pub fn aff_poisson_bracket_at(&self, other: &HamiltonianSystem, q: &VStarPoint, p0: f64) -> Result<f64> {
        if !Arc::ptr_eq(&other.model, &self.model) && *other.model != *self.model {
            return Err(Error::Dimension("bracket of sections over different models".into()));
        }
        let sv = self.model.eval(&q.x)?;
        let pi = poisson_bivector_at(&sv, p0, &q.p);
        let df = self.affine_differential(q)?;
        let dg = other.affine_differential(q)?;
        let k = df.len();
        let mut v = 0.0;
        for a in 0..k {
            for b in 0..k {
                v += pi[(a, b)] * df[a] * dg[b];
            }
        }
        Ok(v)
    }
}

/// Cosymplectic matrix from structure values and the Hamiltonian jet.
pub fn cosymplectic(sv: &StructureValues, p: &[f64], jet: &HamiltonianJet) -> CosymplecticData {
    let n = sv.fibre_dim();
    let k = 2 * n + 1;
    let e0 = unit(k, 0);
    let tilde = |g: usize| unit(k, 1 + g);
    let bar = |g: usize| unit(k, 1 + n + g);
    let rho_h = sv.anchor_dual(&jet.dx);
    let mut omega = DMatrix::zeros(k, k);
    for g in 0..n {
        add_wedge(&mut omega, 1.0, &tilde(g), &bar(g));
    }
    for g in 0..n {
        for b in 0..n {
            let c: f64 = (0..n).map(|a| sv.c(g, b, a) * p[a]).sum();
            add_wedge(&mut omega, 0.5 * c, &tilde(g), &tilde(b));
        }
    }
    for g in 0..n {
        let c0: f64 = (0..n).map(|a| sv.c0(g, a) * p[a]).sum();
        add_wedge(&mut omega, rho_h[g] - c0, &tilde(g), &e0);
        add_wedge(&mut omega, jet.dp[g], &bar(g), &e0);
    }
    CosymplecticData { omega, eta: e0 }
}

/// Reeb section components.
pub fn reeb(sv: &StructureValues, p: &[f64], jet: &HamiltonianJet) -> Vec<f64> {
    let n = sv.fibre_dim();
    let rho_h = sv.anchor_dual(&jet.dx);
    let mut r = Vec::with_capacity(2 * n + 1);
    r.push(1.0);
    r.extend_from_slice(&jet.dp);
    for a in 0..n {
        let mut v = rho_h[a];
        for g in 0..n {
            v -= sv.c0(a, g) * p[g];
            for b in 0..n {
                v += sv.c(a, b, g) * p[g] * jet.dp[b];
            }
        }
        r.push(-v);
    }
    r
}

/// Hamilton equations: the anchor image of the Reeb section.
pub fn hamilton_rhs(sv: &StructureValues, p: &[f64], jet: &HamiltonianJet) -> Vec<f64> {
    let n = sv.fibre_dim();
    let r = reeb(sv, p, jet);
    let mut out = sv.anchor(r[0], &r[1..=n]);
    out.extend_from_slice(&r[n + 1..]);
    out
}

pub fn poisson_bivector(sv: &StructureValues, p: &[f64]) -> PoissonData {
    PoissonData { pi: poisson_bivector_at(sv, 0.0, p) }
}

/// Bivector with `{p_I, p_J} = C_IJ^K p_K` and `{p_I, x^i} = rho_I^i`,
/// summing over the full bidual frame. `C_IJ^0` vanishes in an adapted
/// frame, which is what makes the result independent of `p0`.
fn poisson_bivector_at(sv: &StructureValues, p0: f64, p: &[f64]) -> DMatrix<f64> {
    let (m, n) = (sv.base_dim(), sv.fibre_dim());
    let k = m + 1 + n;
    let slot = |big_i: usize| m + big_i;
    let coords: Vec<f64> = std::iter::once(p0).chain(p.iter().copied()).collect();
    let bracket = |bi: usize, bj: usize, bk: usize| -> f64 {
        if bk == 0 || bi == bj {
            return 0.0;
        }
        match (bi, bj) {
            (0, j) => sv.c0(j - 1, bk - 1),
            (i, 0) => -sv.c0(i - 1, bk - 1),
            (i, j) => sv.c(i - 1, j - 1, bk - 1),
        }
    };
    let anchor = |bi: usize, i: usize| if bi == 0 { sv.rho0(i) } else { sv.rho(bi - 1, i) };
    let mut pi = DMatrix::zeros(k, k);
    for bi in 0..=n {
        for i in 0..m {
            pi[(slot(bi), i)] = anchor(bi, i);
            pi[(i, slot(bi))] = -anchor(bi, i);
        }
        for bj in bi + 1..=n {
            let v: f64 = (0..=n).map(|bk| bracket(bi, bj, bk) * coords[bk]).sum();
            pi[(slot(bi), slot(bj))] = v;
            pi[(slot(bj), slot(bi))] = -v;
        }
    }
    pi
}
