use super::ast::Expr;
use std::fmt::Write;

const ADD: u8 = 1;
const MUL: u8 = 2;
const NEG: u8 = 3;
const POW: u8 = 4;
const ATOM: u8 = 5;

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => ADD,
        Expr::Mul(..) | Expr::Div(..) => MUL,
        Expr::Neg(_) => NEG,
        Expr::Pow { .. } => POW,
        Expr::Num(_) | Expr::Const(_) | Expr::Var(_) | Expr::Call(..) => ATOM,
    }
}

/// Renders `e` so that parsing the output yields the same tree.
pub(crate) fn print(e: &Expr, names: &[String]) -> String {
    let mut out = String::new();
    write_expr(&mut out, e, names);
    out
}

fn write_at(out: &mut String, e: &Expr, names: &[String], min: u8) {
    if precedence(e) < min {
        out.push('(');
        write_expr(out, e, names);
        out.push(')');
    } else {
        write_expr(out, e, names);
    }
}

fn write_expr(out: &mut String, e: &Expr, names: &[String]) {
    match e {
        Expr::Num(v) => {
            let _ = write!(out, "{v}");
        }
        Expr::Const(c) => out.push_str(c.name()),
        Expr::Var(i) => out.push_str(&names[*i]),
        Expr::Neg(a) => {
            out.push('-');
            write_at(out, a, names, NEG);
        }
        Expr::Add(a, b) | Expr::Sub(a, b) => {
            write_at(out, a, names, ADD);
            out.push_str(if matches!(e, Expr::Add(..)) { " + " } else { " - " });
            write_at(out, b, names, ADD + 1);
        }
        Expr::Mul(a, b) | Expr::Div(a, b) => {
            write_at(out, a, names, MUL);
            out.push(if matches!(e, Expr::Mul(..)) { '*' } else { '/' });
            write_at(out, b, names, MUL + 1);
        }
        Expr::Pow { base, exp, .. } => {
            write_at(out, base, names, ATOM);
            out.push('^');
            write_at(out, exp, names, NEG);
        }
        Expr::Call(f, a) => {
            out.push_str(f.name());
            out.push('(');
            write_expr(out, a, names);
            out.push(')');
        }
    }
}
