use super::ast::{Expr, Func};
use super::dual::Number;
use crate::error::{Error, Result};

pub(crate) fn eval_f64(expr: &Expr, vars: &[f64]) -> Result<f64> {
    eval(expr, vars, &0.0)
}

/// Evaluates `expr` with variable values `vars`; `zero` fixes the
/// derivative dimension for literals.
pub(crate) fn eval<N: Number>(expr: &Expr, vars: &[N], zero: &N) -> Result<N> {
    Ok(match expr {
        Expr::Num(v) => N::constant_like(*v, zero),
        Expr::Const(c) => N::constant_like(c.value(), zero),
        Expr::Var(i) => vars[*i].clone(),
        Expr::Neg(a) => eval(a, vars, zero)?.neg(),
        Expr::Add(a, b) => eval(a, vars, zero)?.add(&eval(b, vars, zero)?),
        Expr::Sub(a, b) => eval(a, vars, zero)?.sub(&eval(b, vars, zero)?),
        Expr::Mul(a, b) => eval(a, vars, zero)?.mul(&eval(b, vars, zero)?),
        Expr::Div(a, b) => {
            let num = eval(a, vars, zero)?;
            let den = eval(b, vars, zero)?;
            if den.value() == 0.0 {
                return Err(Error::Domain("division by zero".into()));
            }
            num.div(&den)
        }
        Expr::Pow { base, exp, int_exp } => {
            let b = eval(base, vars, zero)?;
            match int_exp {
                Some(k) => int_power(&b, *k, zero)?,
                None => {
                    let e = eval(exp, vars, zero)?;
                    real_power(&b, &e)?
                }
            }
        }
        Expr::Call(f, a) => apply(*f, &eval(a, vars, zero)?)?,
    })
}

fn int_power<N: Number>(base: &N, k: i32, zero: &N) -> Result<N> {
    let mut acc = N::constant_like(1.0, zero);
    let mut sq = base.clone();
    let mut e = k.unsigned_abs();
    while e > 0 {
        if e & 1 == 1 {
            acc = acc.mul(&sq);
        }
        e >>= 1;
        if e > 0 {
            sq = sq.mul(&sq);
        }
    }
    if k < 0 {
        if acc.value() == 0.0 {
            return Err(Error::Domain("division by zero in negative power".into()));
        }
        acc = acc.recip();
    }
    Ok(acc)
}

fn real_power<N: Number>(base: &N, exp: &N) -> Result<N> {
    let a = base.value();
    if a < 0.0 {
        return Err(Error::Domain(format!("negative base {a} with non-integer exponent")));
    }
    if a == 0.0 {
        if N::DIFFERENTIABLE {
            return Err(Error::Domain("zero base with non-integer exponent".into()));
        }
        let v = 0f64.powf(exp.value());
        if !v.is_finite() {
            return Err(Error::Domain("zero base with negative exponent".into()));
        }
        return Ok(base.chain(v, 0.0, 0.0));
    }
    let ln = base.chain(a.ln(), 1.0 / a, -1.0 / (a * a));
    let arg = exp.mul(&ln);
    let v = arg.value().exp();
    Ok(arg.chain(v, v, v))
}

fn apply<N: Number>(f: Func, a: &N) -> Result<N> {
    let x = a.value();
    Ok(match f {
        Func::Sin => a.chain(x.sin(), x.cos(), -x.sin()),
        Func::Cos => a.chain(x.cos(), -x.sin(), -x.cos()),
        Func::Tan => {
            let t = x.tan();
            let s = 1.0 + t * t;
            a.chain(t, s, 2.0 * t * s)
        }
        Func::Exp => {
            let v = x.exp();
            a.chain(v, v, v)
        }
        Func::Log => {
            if x <= 0.0 {
                return Err(Error::Domain(format!("log of non-positive value {x}")));
            }
            a.chain(x.ln(), 1.0 / x, -1.0 / (x * x))
        }
        Func::Sqrt => {
            if x < 0.0 || (N::DIFFERENTIABLE && x == 0.0) {
                return Err(Error::Domain(format!("sqrt of {x}")));
            }
            let s = x.sqrt();
            a.chain(s, 0.5 / s, -0.25 / (s * x))
        }
        Func::Abs => {
            let sign = if x > 0.0 {
                1.0
            } else if x < 0.0 {
                -1.0
            } else {
                0.0
            };
            a.chain(x.abs(), sign, 0.0)
        }
    })
}
