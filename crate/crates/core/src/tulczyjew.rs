//! Canonical involution, the Tulczyjew isomorphism, and the Lagrangian
//! submanifolds `S_L` and `S_h` of the phase space `(x, p; z, w)`.

use crate::error::{Error, Result};
use crate::flow::time_derivative;
use crate::hamiltonian::{reeb, HamiltonianJet, HamiltonianSystem};
use crate::lagrangian::{momentum_rhs, LagrangianSystem};
use crate::legendre::LegendrePair;
use crate::model::{APoint, AffgebroidModel, JetPoint, PhasePoint, StructureValues, VStarPoint};

/// A point `(x, z; cov_t, cov_v)` of the dual of the prolongation of `V`
/// over `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualJetPoint {
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    pub cov_t: Vec<f64>,
    pub cov_v: Vec<f64>,
}

/// Defect of a phase point against the defining equations of `S_L`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubmanifoldResidual {
    pub point: PhasePoint,
    /// `p - dL/dy`
    pub res_p: Vec<f64>,
    /// `z - y`
    pub res_z: Vec<f64>,
    /// `w - rho(dL/dx) - (C0 + C y) dL/dy`
    pub res_v: Vec<f64>,
}

impl SubmanifoldResidual {
    pub fn max(&self) -> f64 {
        self.res_p.iter().chain(&self.res_z).chain(&self.res_v).fold(0.0, |acc, v| acc.max(v.abs()))
    }
}

fn check_jet(model: &AffgebroidModel, j: &JetPoint) -> Result<()> {
    let (m, n) = (model.base_dim(), model.fibre_dim());
    if j.x.len() != m || j.y.len() != n || j.z.len() != n || j.v.len() != n {
        return Err(Error::Dimension(format!("jet point needs {m} + 3 x {n} coordinates")));
    }
    Ok(())
}

fn check_phase(model: &AffgebroidModel, p: &PhasePoint) -> Result<()> {
    let (m, n) = (model.base_dim(), model.fibre_dim());
    if p.x.len() != m || p.p.len() != n || p.z.len() != n || p.w.len() != n {
        return Err(Error::Dimension(format!("phase point needs {m} + 3 x {n} coordinates")));
    }
    Ok(())
}

/// `C_bg^a z^b y^g`
fn bracket_term(sv: &StructureValues, z: &[f64], y: &[f64], a: usize) -> f64 {
    let n = sv.fibre_dim();
    let mut v = 0.0;
    for b in 0..n {
        for g in 0..n {
            v += sv.c(b, g, a) * z[b] * y[g];
        }
    }
    v
}

/// Canonical involution: swaps the two fibre blocks and corrects `v`.
pub fn sigma(model: &AffgebroidModel, j: &JetPoint) -> Result<JetPoint> {
    check_jet(model, j)?;
    let sv = model.eval(&j.x)?;
    let n = model.fibre_dim();
    let v: Vec<f64> = (0..n)
        .map(|a| {
            let drift: f64 = (0..n).map(|g| sv.c0(g, a) * (j.y[g] - j.z[g])).sum();
            j.v[a] + drift + bracket_term(&sv, &j.z, &j.y, a)
        })
        .collect();
    Ok(JetPoint::new(j.x.clone(), j.z.clone(), j.y.clone(), v))
}

/// Linear part of the involution.
pub fn sigma_l(model: &AffgebroidModel, j: &JetPoint) -> Result<JetPoint> {
    check_jet(model, j)?;
    let sv = model.eval(&j.x)?;
    let n = model.fibre_dim();
    let v: Vec<f64> = (0..n)
        .map(|a| {
            let drift: f64 = (0..n).map(|g| sv.c0(g, a) * j.z[g]).sum();
            j.v[a] - drift + bracket_term(&sv, &j.z, &j.y, a)
        })
        .collect();
    Ok(JetPoint::new(j.x.clone(), j.z.clone(), j.y.clone(), v))
}

/// `C0_g^b p_b + C_ag^b z^a p_b`
fn twist(sv: &StructureValues, z: &[f64], p: &[f64], g: usize) -> f64 {
    let n = sv.fibre_dim();
    let mut v = 0.0;
    for b in 0..n {
        let mut c = sv.c0(g, b);
        for a in 0..n {
            c += sv.c(a, g, b) * z[a];
        }
        v += c * p[b];
    }
    v
}

/// Tulczyjew isomorphism in coordinates.
pub fn a_map(model: &AffgebroidModel, p: &PhasePoint) -> Result<DualJetPoint> {
    check_phase(model, p)?;
    let sv = model.eval(&p.x)?;
    let n = model.fibre_dim();
    Ok(DualJetPoint {
        x: p.x.clone(),
        z: p.z.clone(),
        cov_t: (0..n).map(|g| p.w[g] - twist(&sv, &p.z, &p.p, g)).collect(),
        cov_v: p.p.clone(),
    })
}

pub fn a_map_inverse(model: &AffgebroidModel, d: &DualJetPoint) -> Result<PhasePoint> {
    let n = model.fibre_dim();
    if d.x.len() != model.base_dim() || d.z.len() != n || d.cov_t.len() != n || d.cov_v.len() != n {
        return Err(Error::Dimension("dual jet point has the wrong shape".into()));
    }
    let sv = model.eval(&d.x)?;
    let p = d.cov_v.clone();
    let w: Vec<f64> = (0..n).map(|g| d.cov_t[g] + twist(&sv, &d.z, &p, g)).collect();
    Ok(PhasePoint::new(d.x.clone(), p, d.z.clone(), w))
}

/// Compares the transpose of the Tulczyjew map at `(x, z)` with the
/// pairing-composed linear involution, applied to `u = (x, z; zz, vv)`.
/// Returns the largest componentwise difference of the two covectors on
/// the `(p, w)` fibre.
pub fn dual_map_residual(
    model: &AffgebroidModel,
    x: &[f64],
    z: &[f64],
    zz: &[f64],
    vv: &[f64],
) -> Result<f64> {
    let n = model.fibre_dim();
    // Transpose of the Tulczyjew map, built column by column.
    let pairing = |d: &DualJetPoint| -> f64 { (0..n).map(|g| d.cov_t[g] * zz[g] + d.cov_v[g] * vv[g]).sum() };
    let mut transpose = Vec::with_capacity(2 * n);
    for k in 0..2 * n {
        let mut p = vec![0.0; n];
        let mut w = vec![0.0; n];
        if k < n {
            p[k] = 1.0;
        } else {
            w[k - n] = 1.0;
        }
        transpose.push(pairing(&a_map(model, &PhasePoint::new(x, p, z, w))?));
    }
    // The linear involution sends u to (x, zz; z, v'); the pairing reads
    // it as the covector v' on p and zz on w.
    let image = sigma_l(model, &JetPoint::new(x, z, zz, vv))?;
    let composed: Vec<f64> = image.v.iter().chain(&image.y).copied().collect();
    Ok(transpose.iter().zip(&composed).fold(0.0, |acc, (a, b)| acc.max((a - b).abs())))
}

/// `dL` at `a` as a point of the dual prolongation: `(x, y; rho(dL/dx), dL/dy)`.
pub fn lagrangian_differential(sys: &LagrangianSystem, a: &APoint) -> Result<DualJetPoint> {
    let m = sys.model().base_dim();
    let n = sys.model().fibre_dim();
    let all: Vec<usize> = (0..m + n).collect();
    let d = sys.lagrangian().eval_grad(&a.coords(), &all)?;
    let sv = sys.model().eval(&a.x)?;
    Ok(DualJetPoint {
        x: a.x.clone(),
        z: a.y.clone(),
        cov_t: sv.anchor_dual(&d.grad[..m]),
        cov_v: d.grad[m..].to_vec(),
    })
}

/// Generator of `S_L`: the Tulczyjew preimage of `dL(a)`.
pub fn s_l_point(sys: &LagrangianSystem, a: &APoint) -> Result<PhasePoint> {
    a_map_inverse(sys.model(), &lagrangian_differential(sys, a)?)
}

/// Defect of `point` against the equations of `S_L` over the velocity `a`.
pub fn s_l_residual(sys: &LagrangianSystem, a: &APoint, point: &PhasePoint) -> Result<SubmanifoldResidual> {
    check_phase(sys.model(), point)?;
    if a.x != point.x {
        return Err(Error::Dimension("velocity and phase point lie over different base points".into()));
    }
    let m = sys.model().base_dim();
    let n = sys.model().fibre_dim();
    let all: Vec<usize> = (0..m + n).collect();
    let d = sys.lagrangian().eval_grad(&a.coords(), &all)?;
    let (dx, dy) = d.grad.split_at(m);
    let sv = sys.model().eval(&a.x)?;
    let rhs = momentum_rhs(&sv, &a.y, dx, dy);
    Ok(SubmanifoldResidual {
        point: point.clone(),
        res_p: (0..n).map(|k| point.p[k] - dy[k]).collect(),
        res_z: (0..n).map(|k| point.z[k] - a.y[k]).collect(),
        res_v: (0..n).map(|k| point.w[k] - rhs[k]).collect(),
    })
}

/// The phase point of the Reeb section of a Hamiltonian jet at `q`.
pub fn s_h_point_from_jet(
    model: &AffgebroidModel,
    q: &VStarPoint,
    jet: &HamiltonianJet,
) -> Result<PhasePoint> {
    let n = model.fibre_dim();
    let sv = model.eval(&q.x)?;
    let r = reeb(&sv, &q.p, jet);
    Ok(PhasePoint::new(q.x.clone(), q.p.clone(), r[1..=n].to_vec(), r[n + 1..].to_vec()))
}

/// Generator of `S_h`.
pub fn s_h_point(sys: &HamiltonianSystem, q: &VStarPoint) -> Result<PhasePoint> {
    s_h_point_from_jet(sys.model(), q, &sys.jet(q)?)
}

/// Largest distance of `point` from the Reeb image over its own `(x, p)`.
pub fn s_h_residual_from_jet(
    model: &AffgebroidModel,
    point: &PhasePoint,
    jet: &HamiltonianJet,
) -> Result<f64> {
    let q = VStarPoint::new(point.x.clone(), point.p.clone());
    Ok(s_h_point_from_jet(model, &q, jet)?.max_distance(point))
}

pub fn s_h_residual(sys: &HamiltonianSystem, point: &PhasePoint) -> Result<f64> {
    let q = VStarPoint::new(point.x.clone(), point.p.clone());
    s_h_residual_from_jet(sys.model(), point, &sys.jet(&q)?)
}

/// Cross residuals between `S_L` and `S_{h_L}` at velocity `a`:
/// the `S_L` defect of the `S_{h_L}` point over `leg(a)`, and the
/// `S_{h_L}` defect of the generated `S_L` point.
pub fn cross_residuals(pair: &LegendrePair, a: &APoint) -> Result<(f64, f64)> {
    let lag = pair.lagrangian();
    let model = lag.model();
    let q = pair.leg(a)?;
    let (jet, _) = pair.hl_jet(&q, Some(&a.y))?;
    let from_h = s_h_point_from_jet(model, &q, &jet)?;
    let forward = s_l_residual(lag, a, &from_h)?.max();
    let from_l = s_l_point(lag, a)?;
    let backward = s_h_residual_from_jet(model, &from_l, &jet)?;
    Ok((forward, backward))
}

/// Admissibility defects of a sampled curve `(x, p, z, w)(t)`: the largest
/// `|dx/dt - rho0 - z rho|` and `|dp/dt - w|`.
pub fn admissibility_residual(
    model: &AffgebroidModel,
    times: &[f64],
    curve: &[PhasePoint],
) -> Result<(f64, f64)> {
    if times.len() != curve.len() {
        return Err(Error::Dimension("times and curve differ in length".into()));
    }
    for p in curve {
        check_phase(model, p)?;
    }
    let (m, n) = (model.base_dim(), model.fibre_dim());
    let mut base = 0.0f64;
    let mut fibre = 0.0f64;
    let anchored: Vec<Vec<f64>> =
        curve.iter().map(|p| Ok(model.eval(&p.x)?.anchor(1.0, &p.z))).collect::<Result<_>>()?;
    for i in 0..m {
        let series: Vec<f64> = curve.iter().map(|p| p.x[i]).collect();
        for (k, d) in time_derivative(times, &series).iter().enumerate() {
            base = base.max((d - anchored[k][i]).abs());
        }
    }
    for a in 0..n {
        let series: Vec<f64> = curve.iter().map(|p| p.p[a]).collect();
        for (k, d) in time_derivative(times, &series).iter().enumerate() {
            fibre = fibre.max((d - curve[k].w[a]).abs());
        }
    }
    Ok((base, fibre))
}
