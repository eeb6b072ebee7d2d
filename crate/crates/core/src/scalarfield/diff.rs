use super::ast::{add, call, div, mul, neg, num, powi, sub, Expr, Func};

/// Symbolic partial derivative with respect to variable `var`.
pub(crate) fn derivative(e: &Expr, var: usize) -> Expr {
    if !e.depends_on(var) {
        return Expr::Num(0.0);
    }
    match e {
        Expr::Num(_) | Expr::Const(_) => Expr::Num(0.0),
        Expr::Var(i) => Expr::Num(if *i == var { 1.0 } else { 0.0 }),
        Expr::Neg(a) => neg(derivative(a, var)),
        Expr::Add(a, b) => add(derivative(a, var), derivative(b, var)),
        Expr::Sub(a, b) => sub(derivative(a, var), derivative(b, var)),
        Expr::Mul(a, b) => {
            add(mul(derivative(a, var), (**b).clone()), mul((**a).clone(), derivative(b, var)))
        }
        Expr::Div(a, b) => {
            let da = derivative(a, var);
            let db = derivative(b, var);
            if db.is_zero() {
                return div(da, (**b).clone());
            }
            div(sub(mul(da, (**b).clone()), mul((**a).clone(), db)), powi((**b).clone(), 2))
        }
        Expr::Pow { base, exp, int_exp } => {
            let db = derivative(base, var);
            if let Some(k) = int_exp {
                let outer = mul(num(*k as f64), powi((**base).clone(), k - 1));
                return mul(outer, db);
            }
            let de = derivative(exp, var);
            if de.is_zero() {
                let reduced = Expr::pow((**base).clone(), sub((**exp).clone(), num(1.0)));
                return mul(mul((**exp).clone(), reduced), db);
            }
            // d(a^b) = a^b (b' ln a + b a'/a)
            let ln_term = mul(de, call(Func::Log, (**base).clone()));
            let base_term = div(mul((**exp).clone(), db), (**base).clone());
            mul(e.clone(), add(ln_term, base_term))
        }
        Expr::Call(f, a) => {
            let da = derivative(a, var);
            let u = (**a).clone();
            let outer = match f {
                Func::Sin => call(Func::Cos, u),
                Func::Cos => neg(call(Func::Sin, u)),
                Func::Tan => div(num(1.0), powi(call(Func::Cos, u), 2)),
                Func::Exp => e.clone(),
                Func::Log => return div(da, u),
                Func::Sqrt => div(num(1.0), mul(num(2.0), e.clone())),
                Func::Abs => div(u, e.clone()),
            };
            mul(outer, da)
        }
    }
}
