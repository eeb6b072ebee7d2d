//! Expression fields over named coordinates, with exact forward-mode
//! derivatives and a finite-difference oracle.

pub mod ast;
mod diff;
pub mod dual;
mod eval;
mod parser;
mod printer;

use std::fmt;
use std::sync::Arc;

pub use ast::{Constant, Expr, Func};
pub use dual::{Dual1, Dual2, Number};

use crate::error::{Error, Result};

/// Default central-difference steps.
pub const FD_GRAD_STEP: f64 = 1e-5;
pub const FD_HESS_STEP: f64 = 1e-4;

/// A parsed expression bound to an ordered list of coordinate names.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    expr: Expr,
    vars: Arc<[String]>,
}

impl ScalarField {
    pub fn parse<S: AsRef<str>>(source: &str, vars: &[S]) -> Result<Self> {
        let vars = names(vars);
        let expr = parser::parse_expr(source, &vars)?;
        Ok(ScalarField { expr, vars })
    }

    pub fn constant<S: AsRef<str>>(value: f64, vars: &[S]) -> Self {
        ScalarField { expr: ast::num(value), vars: names(vars) }
    }

    pub fn zero<S: AsRef<str>>(vars: &[S]) -> Self {
        Self::constant(0.0, vars)
    }

    /// Wraps a tree built with the folding constructors in [`ast`].
    pub fn from_expr<S: AsRef<str>>(expr: Expr, vars: &[S]) -> Result<Self> {
        let vars = names(vars);
        check_indices(&expr, vars.len())?;
        Ok(ScalarField { expr, vars })
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn is_zero(&self) -> bool {
        self.expr.is_zero()
    }

    pub fn is_constant(&self) -> bool {
        !self.expr.has_vars()
    }

    pub fn depends_on(&self, var: usize) -> bool {
        self.expr.depends_on(var)
    }

    /// Same expression read over a different variable list; every
    /// variable used must exist in `vars` under the same name.
    pub fn rebind<S: AsRef<str>>(&self, vars: &[S]) -> Result<Self> {
        let new = names(vars);
        let mut map = vec![usize::MAX; self.vars.len()];
        for (i, name) in self.vars.iter().enumerate() {
            if let Some(j) = new.iter().position(|v| v == name) {
                map[i] = j;
            } else if self.expr.depends_on(i) {
                return Err(Error::UnknownVariable(name.clone()));
            }
        }
        Ok(ScalarField { expr: self.expr.remap(&|i| map[i]), vars: new })
    }

    pub fn derivative(&self, var: usize) -> ScalarField {
        ScalarField { expr: diff::derivative(&self.expr, var), vars: self.vars.clone() }
    }

    pub fn neg(&self) -> ScalarField {
        ScalarField { expr: ast::neg(self.expr.clone()), vars: self.vars.clone() }
    }

    fn check_len(&self, point: &[f64]) -> Result<()> {
        if point.len() != self.vars.len() {
            return Err(Error::Dimension(format!(
                "field over {} variables evaluated at a point of length {}",
                self.vars.len(),
                point.len()
            )));
        }
        Ok(())
    }

    fn check_active(&self, active: &[usize]) -> Result<()> {
        if let Some(&bad) = active.iter().find(|&&i| i >= self.vars.len()) {
            return Err(Error::Dimension(format!(
                "active index {bad} out of range for {} variables",
                self.vars.len()
            )));
        }
        Ok(())
    }

    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        self.check_len(point)?;
        eval::eval_f64(&self.expr, point)
    }

    /// Value and gradient over the `active` variable indices.
    pub fn eval_grad(&self, point: &[f64], active: &[usize]) -> Result<Dual1> {
        self.check_len(point)?;
        self.check_active(active)?;
        let k = active.len();
        let vars: Vec<Dual1> = point
            .iter()
            .enumerate()
            .map(|(i, &v)| match active.iter().position(|&a| a == i) {
                Some(slot) => Dual1::variable(v, slot, k),
                None => Dual1::constant(v, k),
            })
            .collect();
        eval::eval(&self.expr, &vars, &Dual1::constant(0.0, k))
    }

    /// Value, gradient and Hessian over the `active` variable indices.
    pub fn eval_dual2(&self, point: &[f64], active: &[usize]) -> Result<Dual2> {
        self.check_len(point)?;
        self.check_active(active)?;
        let k = active.len();
        let vars: Vec<Dual2> = point
            .iter()
            .enumerate()
            .map(|(i, &v)| match active.iter().position(|&a| a == i) {
                Some(slot) => Dual2::variable(v, slot, k),
                None => Dual2::constant(v, k),
            })
            .collect();
        eval::eval(&self.expr, &vars, &Dual2::constant(0.0, k))
    }

    /// Central-difference gradient over `active`.
    pub fn fd_grad(&self, point: &[f64], active: &[usize], step: f64) -> Result<Vec<f64>> {
        check_step(step)?;
        self.check_len(point)?;
        self.check_active(active)?;
        let mut p = point.to_vec();
        active
            .iter()
            .map(|&i| {
                p[i] = point[i] + step;
                let up = self.eval(&p)?;
                p[i] = point[i] - step;
                let down = self.eval(&p)?;
                p[i] = point[i];
                Ok((up - down) / (2.0 * step))
            })
            .collect()
    }

    /// Central-difference Hessian over `active`, row-major.
    pub fn fd_hess(&self, point: &[f64], active: &[usize], step: f64) -> Result<Vec<f64>> {
        check_step(step)?;
        self.check_len(point)?;
        self.check_active(active)?;
        let k = active.len();
        let mut out = vec![0.0; k * k];
        let mut p = point.to_vec();
        let at = |p: &mut Vec<f64>, i: usize, di: f64, j: usize, dj: f64| {
            p[i] += di;
            p[j] += dj;
            let v = self.eval(p);
            p.copy_from_slice(point);
            v
        };
        for a in 0..k {
            let i = active[a];
            for b in a..k {
                let j = active[b];
                let v = if a == b {
                    let up = at(&mut p, i, step, i, step)?;
                    let mid = self.eval(point)?;
                    let down = at(&mut p, i, -step, i, -step)?;
                    (up - 2.0 * mid + down) / (4.0 * step * step)
                } else {
                    let pp = at(&mut p, i, step, j, step)?;
                    let pm = at(&mut p, i, step, j, -step)?;
                    let mp = at(&mut p, i, -step, j, step)?;
                    let mm = at(&mut p, i, -step, j, -step)?;
                    (pp - pm - mp + mm) / (4.0 * step * step)
                };
                out[a * k + b] = v;
                out[b * k + a] = v;
            }
        }
        Ok(out)
    }
}

impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&printer::print(&self.expr, &self.vars))
    }
}

fn names<S: AsRef<str>>(vars: &[S]) -> Arc<[String]> {
    vars.iter().map(|v| v.as_ref().to_string()).collect()
}

fn check_step(step: f64) -> Result<()> {
    if step > 0.0 && step.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("finite-difference step {step} must be positive")))
    }
}

fn check_indices(e: &Expr, n: usize) -> Result<()> {
    let bad = std::cell::Cell::new(None);
    e.remap(&|i| {
        if i >= n {
            bad.set(Some(i));
        }
        i
    });
    match bad.get() {
        Some(i) => Err(Error::Dimension(format!("variable index {i} with {n} variables"))),
        None => Ok(()),
    }
}
