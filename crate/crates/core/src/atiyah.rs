//! Reduced model of a principal connection in a local trivialization.
//!
//! The base is `(t, x^1..x^m)` and the reduced fibre packs the spatial
//! velocities first and the algebra components second, so fibre index
//! `j < m` is spatial and `m + a` is algebra direction `a`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianSystem;
use crate::lagrangian::LagrangianSystem;
use crate::model::{APoint, AffgebroidModel, Chart, ModelBuilder, VStarPoint};
use crate::scalarfield::ast::{self, Expr};
use crate::scalarfield::ScalarField;

/// Tolerance of the Jacobi identity for the algebra constants, relative
/// to the largest squared constant.
const JACOBI_TOL: f64 = 1e-12;

/// Structure constants `c[a][b][c]`, connection coefficients `K0^a` and
/// `K_i^a`, all over the base `(t, x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AtiyahSpec {
    base: Vec<String>,
    fibre_names: Option<Vec<String>>,
    c: Vec<Vec<Vec<f64>>>,
    k0: Vec<ScalarField>,
    k: Vec<Vec<ScalarField>>,
}

/// Curvature as expressions: `b0[i][c]` and `b[i][j][c]`.
#[derive(Debug, Clone)]
pub struct CurvatureFields {
    pub b0: Vec<Vec<ScalarField>>,
    pub b: Vec<Vec<Vec<ScalarField>>>,
}

/// Curvature values at one base point.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureData {
    pub b0: Vec<Vec<f64>>,
    pub b: Vec<Vec<Vec<f64>>>,
}

/// Largest Jacobi defect `sum_d c_ab^d c_dc^e + cyclic` of the constants.
pub fn jacobi_defect(c: &[Vec<Vec<f64>>]) -> f64 {
    let r = c.len();
    let mut worst = 0.0f64;
    for a in 0..r {
        for b in 0..r {
            for cc in 0..r {
                for e in 0..r {
                    let mut s = 0.0;
                    for d in 0..r {
                        s += c[a][b][d] * c[d][cc][e] + c[b][cc][d] * c[d][a][e] + c[cc][a][d] * c[d][b][e];
                    }
                    worst = worst.max(s.abs());
                }
            }
        }
    }
    worst
}

/// Fails with `JacobiViolation` when the constants are not a Lie algebra.
pub fn check_jacobi(c: &[Vec<Vec<f64>>]) -> Result<f64> {
    let scale = c.iter().flatten().flatten().fold(1.0f64, |acc, v| acc.max(v * v));
    let d = jacobi_defect(c);
    if d > JACOBI_TOL * scale {
        return Err(Error::JacobiViolation(d));
    }
    Ok(d)
}

fn check_constants(c: &[Vec<Vec<f64>>]) -> Result<()> {
    let r = c.len();
    if c.iter().any(|row| row.len() != r || row.iter().any(|v| v.len() != r)) {
        return Err(Error::Dimension(format!("structure constants must be {r} x {r} x {r}")));
    }
    for a in 0..r {
        for b in 0..r {
            for cc in 0..r {
                if c[a][b][cc] != -c[b][a][cc] {
                    return Err(Error::Config(format!(
                        "structure constants are not antisymmetric at ({}, {}; {})",
                        a + 1,
                        b + 1,
                        cc + 1
                    )));
                }
            }
        }
    }
    Ok(())
}

fn sum(terms: impl IntoIterator<Item = Expr>) -> Expr {
    terms.into_iter().fold(ast::num(0.0), ast::add)
}

fn scaled(c: f64, e: &Expr) -> Expr {
    ast::mul(ast::num(c), e.clone())
}

/// `sum_ab c_ab^cc left^a right^b`
fn bracket_expr(c: &[Vec<Vec<f64>>], cc: usize, left: &[ScalarField], right: &[ScalarField]) -> Expr {
    let r = c.len();
    let pairs = (0..r).flat_map(|a| (0..r).map(move |b| (a, b)));
    sum(pairs
        .filter(|&(a, b)| c[a][b][cc] != 0.0)
        .map(|(a, b)| scaled(c[a][b][cc], &ast::mul(left[a].expr().clone(), right[b].expr().clone()))))
}

impl AtiyahSpec {
    /// `base[0]` is the time coordinate. `k` has one row of `r` fields per
    /// spatial coordinate.
    pub fn new<S: AsRef<str>>(
        base: &[S],
        c: Vec<Vec<Vec<f64>>>,
        k0: Vec<ScalarField>,
        k: Vec<Vec<ScalarField>>,
    ) -> Result<Self> {
        let base: Vec<String> = base.iter().map(|s| s.as_ref().to_string()).collect();
        if base.is_empty() {
            return Err(Error::Dimension("the base needs a time coordinate".into()));
        }
        let m = base.len() - 1;
        let r = c.len();
        check_constants(&c)?;
        check_jacobi(&c)?;
        if k0.len() != r || k.len() != m || k.iter().any(|row| row.len() != r) {
            return Err(Error::Dimension(format!(
                "connection needs {r} time coefficients and {m} rows of {r}"
            )));
        }
        let bind = |f: ScalarField| f.rebind(&base);
        let k0 = k0.into_iter().map(bind).collect::<Result<_>>()?;
        let k = k
            .into_iter()
            .map(|row| row.into_iter().map(bind).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        Ok(AtiyahSpec { base, fibre_names: None, c, k0, k })
    }

    /// Same as `new` with the connection given as expression strings.
    pub fn parse<S: AsRef<str>, T: AsRef<str>>(
        base: &[S],
        c: Vec<Vec<Vec<f64>>>,
        k0: &[T],
        k: &[Vec<T>],
    ) -> Result<Self> {
        let names: Vec<&str> = base.iter().map(AsRef::as_ref).collect();
        let field = |s: &T| ScalarField::parse(s.as_ref(), &names);
        let k0 = k0.iter().map(field).collect::<Result<_>>()?;
        let k =
            k.iter().map(|row| row.iter().map(field).collect::<Result<Vec<_>>>()).collect::<Result<_>>()?;
        AtiyahSpec::new(base, c, k0, k)
    }

    pub fn with_fibre_names<S: AsRef<str>>(mut self, names: &[S]) -> Self {
        self.fibre_names = Some(names.iter().map(|s| s.as_ref().to_string()).collect());
        self
    }

    pub fn base_names(&self) -> &[String] {
        &self.base
    }

    pub fn space_dim(&self) -> usize {
        self.base.len() - 1
    }

    pub fn algebra_dim(&self) -> usize {
        self.c.len()
    }

    pub fn constants(&self) -> &[Vec<Vec<f64>>] {
        &self.c
    }

    pub fn k0(&self) -> &[ScalarField] {
        &self.k0
    }

    pub fn k(&self) -> &[Vec<ScalarField>] {
        &self.k
    }

    /// Chart of the reduced model with default or given fibre names.
    pub fn chart(&self) -> Result<Chart> {
        let n = self.space_dim() + self.algebra_dim();
        match &self.fibre_names {
            Some(names) => {
                let p: Vec<String> = (1..=n).map(|k| format!("p{k}")).collect();
                Chart::with_names(&self.base, names, &p)
            }
            None => Chart::new(&self.base, n),
        }
    }

    /// Curvature built symbolically from the connection.
    pub fn curvature(&self) -> Result<CurvatureFields> {
        let (m, r) = (self.space_dim(), self.algebra_dim());
        let c = &self.c;
        let d = |f: &ScalarField, var: usize| f.derivative(var).expr().clone();
        let mut b0 = Vec::with_capacity(m);
        for i in 0..m {
            let mut row = Vec::with_capacity(r);
            for cc in 0..r {
                let bracket = bracket_expr(c, cc, &self.k0, &self.k[i]);
                let e = ast::sub(ast::sub(d(&self.k[i][cc], 0), d(&self.k0[cc], 1 + i)), bracket);
                row.push(ScalarField::from_expr(e, &self.base)?);
            }
            b0.push(row);
        }
        let zero = ScalarField::zero(&self.base);
        let mut b = vec![vec![vec![zero; r]; m]; m];
        for i in 0..m {
            for j in i + 1..m {
                for cc in 0..r {
                    let bracket = bracket_expr(c, cc, &self.k[i], &self.k[j]);
                    let e = ast::sub(ast::sub(d(&self.k[j][cc], 1 + i), d(&self.k[i][cc], 1 + j)), bracket);
                    let f = ScalarField::from_expr(e, &self.base)?;
                    b[j][i][cc] = f.neg();
                    b[i][j][cc] = f;
                }
            }
        }
        Ok(CurvatureFields { b0, b })
    }

    /// Curvature values at `point`, with the connection derivatives taken
    /// by forward-mode AD.
    pub fn curvature_at(&self, point: &[f64]) -> Result<CurvatureData> {
        let (m, r) = (self.space_dim(), self.algebra_dim());
        if point.len() != m + 1 {
            return Err(Error::Dimension(format!("base point needs {} coordinates", m + 1)));
        }
        let all: Vec<usize> = (0..=m).collect();
        let k0 = self.k0.iter().map(|f| f.eval_grad(point, &all)).collect::<Result<Vec<_>>>()?;
        let k = self
            .k
            .iter()
            .map(|row| row.iter().map(|f| f.eval_grad(point, &all)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let c = &self.c;
        let mut b0 = vec![vec![0.0; r]; m];
        let mut b = vec![vec![vec![0.0; r]; m]; m];
        for i in 0..m {
            for cc in 0..r {
                let mut v = k[i][cc].grad[0] - k0[cc].grad[1 + i];
                for a in 0..r {
                    for bb in 0..r {
                        v -= k0[a].value * k[i][bb].value * c[a][bb][cc];
                    }
                }
                b0[i][cc] = v;
                for j in i + 1..m {
                    let mut v = k[j][cc].grad[1 + i] - k[i][cc].grad[1 + j];
                    for a in 0..r {
                        for bb in 0..r {
                            v -= c[a][bb][cc] * k[i][a].value * k[j][bb].value;
                        }
                    }
                    b[i][j][cc] = v;
                    b[j][i][cc] = -v;
                }
            }
        }
        Ok(CurvatureData { b0, b })
    }

    /// The reduced model on the spec's own chart.
    pub fn reduce(&self) -> Result<AffgebroidModel> {
        self.reduce_on(self.chart()?)
    }

    /// The reduced model on `chart`, which must have the spec's base names
    /// and fibre dimension `m + r`.
    pub fn reduce_on(&self, chart: Chart) -> Result<AffgebroidModel> {
        let (m, r) = (self.space_dim(), self.algebra_dim());
        if chart.base_names() != self.base.as_slice() || chart.fibre_dim() != m + r {
            return Err(Error::Dimension(format!(
                "reduced chart needs base ({}) and fibre dimension {}",
                self.base.join(", "),
                m + r
            )));
        }
        let curv = self.curvature()?;
        let c = &self.c;
        let field = |e: Expr| ScalarField::from_expr(e, &self.base);
        let one = || ScalarField::constant(1.0, &self.base);
        // `sum_b c_ab^cc K^b` for a connection row `k`.
        let adjoint = |k: &[ScalarField], a: usize, cc: usize| {
            sum((0..r).filter(|&b| c[a][b][cc] != 0.0).map(|b| scaled(c[a][b][cc], k[b].expr())))
        };

        let mut builder = ModelBuilder::new(chart);
        builder.set_rho0(0, one())?;
        for j in 0..m {
            builder.set_rho(j, 1 + j, one())?;
        }
        for j in 0..m {
            for a in 0..r {
                builder.set_c0(j, m + a, curv.b0[j][a].neg())?;
            }
        }
        for a in 0..r {
            for cc in 0..r {
                builder.set_c0(m + a, m + cc, field(adjoint(&self.k0, a, cc))?)?;
            }
        }
        for i in 0..m {
            for j in i + 1..m {
                for a in 0..r {
                    builder.set_c(i, j, m + a, curv.b[i][j][a].neg())?;
                }
            }
            for a in 0..r {
                for cc in 0..r {
                    builder.set_c(i, m + a, m + cc, field(adjoint(&self.k[i], a, cc))?)?;
                }
            }
        }
        for a in 0..r {
            for b in a + 1..r {
                for cc in 0..r {
                    if c[a][b][cc] != 0.0 {
                        builder.set_c(
                            m + a,
                            m + b,
                            m + cc,
                            ScalarField::constant(c[a][b][cc], &self.base),
                        )?;
                    }
                }
            }
        }
        Ok(builder.build())
    }
}

/// A spec together with its reduced model, for repeated equation checks.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    spec: AtiyahSpec,
    model: Arc<AffgebroidModel>,
}

impl ReducedSystem {
    pub fn new(spec: AtiyahSpec) -> Result<Self> {
        let model = Arc::new(spec.reduce()?);
        Ok(ReducedSystem { spec, model })
    }

    pub fn spec(&self) -> &AtiyahSpec {
        &self.spec
    }

    pub fn model(&self) -> &Arc<AffgebroidModel> {
        &self.model
    }

    /// Largest difference between the momentum rates of the generic
    /// Euler-Lagrange engine and the reduced equations written out with
    /// curvature, at the velocity `a = (t, x; xdot, vbar)`.
    pub fn lp_residual(&self, sys: &LagrangianSystem, a: &APoint) -> Result<f64> {
        let (m, r) = (self.spec.space_dim(), self.spec.algebra_dim());
        let n = m + r;
        let base = m + 1;

        // Generic route: d/dt dL/dy = L_yx xdot + W xi along the solution.
        let jet = sys.jet(a)?;
        let section = sys.el_section(a)?;
        let xi = &section[1 + n..];
        let sv = self.model.eval(&a.x)?;
        let xdot = sv.anchor(1.0, &a.y);
        let generic: Vec<f64> = (0..n)
            .map(|al| {
                let mixed: f64 = (0..base).map(|i| jet.wxy[(al, i)] * xdot[i]).sum();
                let accel: f64 = (0..n).map(|be| jet.w[(al, be)] * xi[be]).sum();
                mixed + accel
            })
            .collect();

        // Printed route.
        let curv = self.spec.curvature_at(&a.x)?;
        let k0 = eval_all(&self.spec.k0, &a.x)?;
        let k = self.spec.k.iter().map(|row| eval_all(row, &a.x)).collect::<Result<Vec<_>>>()?;
        let c = &self.spec.c;
        let (v, vbar) = a.y.split_at(m);
        let pbar = &jet.dy[m..];
        let mut printed = vec![0.0; n];
        for i in 0..m {
            let mut s = jet.dx[1 + i];
            for b in 0..r {
                let mut coef = curv.b0[i][b];
                for j in 0..m {
                    coef += curv.b[j][i][b] * v[j];
                }
                for d in 0..r {
                    for cc in 0..r {
                        coef += c[d][cc][b] * k[i][cc] * vbar[d];
                    }
                }
                s -= pbar[b] * coef;
            }
            printed[i] = s;
        }
        for a_ in 0..r {
            let mut s = 0.0;
            for b in 0..r {
                let mut coef = 0.0;
                for cc in 0..r {
                    coef += c[a_][cc][b] * k0[cc];
                    for j in 0..m {
                        coef += c[a_][cc][b] * k[j][cc] * v[j];
                    }
                }
                for d in 0..r {
                    coef -= c[a_][d][b] * vbar[d];
                }
                s += pbar[b] * coef;
            }
            printed[m + a_] = s;
        }
        Ok(max_diff(&generic, &printed))
    }

    /// Largest difference between the generic Hamilton equations and the
    /// reduced equations written out with curvature, at `q = (t, x; p, pbar)`.
    pub fn hp_residual(&self, sys: &HamiltonianSystem, q: &VStarPoint) -> Result<f64> {
        let (m, r) = (self.spec.space_dim(), self.spec.algebra_dim());
        let base = m + 1;
        let generic = sys.hamilton_rhs(&q.coords())?;

        let jet = sys.jet(q)?;
        let curv = self.spec.curvature_at(&q.x)?;
        let k0 = eval_all(&self.spec.k0, &q.x)?;
        let k = self.spec.k.iter().map(|row| eval_all(row, &q.x)).collect::<Result<Vec<_>>>()?;
        let c = &self.spec.c;
        let (hp, hpbar) = jet.dp.split_at(m);
        let pbar = &q.p[m..];
        let mut printed = Vec::with_capacity(base + m + r);
        printed.push(1.0);
        printed.extend_from_slice(hp);
        for i in 0..m {
            let mut s = -jet.dx[1 + i];
            for b in 0..r {
                let mut coef = curv.b0[i][b];
                for kk in 0..m {
                    coef += curv.b[kk][i][b] * hp[kk];
                }
                for a_ in 0..r {
                    for cc in 0..r {
                        coef += c[a_][cc][b] * k[i][cc] * hpbar[a_];
                    }
                }
                s -= pbar[b] * coef;
            }
            printed.push(s);
        }
        for a_ in 0..r {
            let mut s = 0.0;
            for cc in 0..r {
                let mut coef = 0.0;
                for b in 0..r {
                    coef += c[a_][b][cc] * k0[b];
                    for kk in 0..m {
                        coef += c[a_][b][cc] * k[kk][b] * hp[kk];
                    }
                    coef -= c[a_][b][cc] * hpbar[b];
                }
                s += pbar[cc] * coef;
            }
            printed.push(s);
        }
        Ok(max_diff(&generic, &printed))
    }
}

fn eval_all(fields: &[ScalarField], x: &[f64]) -> Result<Vec<f64>> {
    fields.iter().map(|f| f.eval(x)).collect()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (u, v)| acc.max((u - v).abs()))
}

/// Reduced Euler-Lagrange check of `l` at `a`; `l` is over the reduced
/// chart's Lagrangian variables.
pub fn lp_equations_check(spec: &AtiyahSpec, l: &ScalarField, a: &APoint) -> Result<f64> {
    let red = ReducedSystem::new(spec.clone())?;
    let sys = LagrangianSystem::new(red.model.clone(), l.clone())?;
    red.lp_residual(&sys, a)
}

/// Reduced Hamilton check of `h` at `q`.
pub fn hp_equations_check(spec: &AtiyahSpec, h: &ScalarField, q: &VStarPoint) -> Result<f64> {
    let red = ReducedSystem::new(spec.clone())?;
    let sys = HamiltonianSystem::new(red.model.clone(), h.clone())?;
    red.hp_residual(&sys, q)
}
