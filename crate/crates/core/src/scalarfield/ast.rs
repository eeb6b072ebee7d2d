use std::fmt;

/// Elementary functions accepted by the grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }
}

impl fmt::Display for Func {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Named mathematical constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Constant {
    Pi,
    E,
}

impl Constant {
    pub fn from_name(name: &str) -> Option<Constant> {
        match name {
            "pi" => Some(Constant::Pi),
            "e" => Some(Constant::E),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Constant::Pi => "pi",
            Constant::E => "e",
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Constant::Pi => std::f64::consts::PI,
            Constant::E => std::f64::consts::E,
        }
    }
}

/// Expression tree. Variables are indices into the owning field's
/// variable list. Literals are never negative; a negative constant is
/// `Neg(Num(c))`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Const(Constant),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    /// `int_exp` is set when the exponent is variable-free and integral,
    /// in which case evaluation uses repeated multiplication.
    Pow {
        base: Box<Expr>,
        exp: Box<Expr>,
        int_exp: Option<i32>,
    },
    Call(Func, Box<Expr>),
}

impl Expr {
    /// Builds a power node, detecting integer exponents.
    pub fn pow(base: Expr, exp: Expr) -> Expr {
        let int_exp = exp
            .constant_value()
            .and_then(|v| (v.fract() == 0.0 && v.abs() <= i32::MAX as f64).then_some(v as i32));
        Expr::Pow { base: Box::new(base), exp: Box::new(exp), int_exp }
    }

    /// Value of a variable-free subtree, if it evaluates cleanly.
    pub fn constant_value(&self) -> Option<f64> {
        if self.has_vars() {
            return None;
        }
        super::eval::eval_f64(self, &[]).ok()
    }

    pub fn has_vars(&self) -> bool {
        match self {
            Expr::Num(_) | Expr::Const(_) => false,
            Expr::Var(_) => true,
            Expr::Neg(a) | Expr::Call(_, a) => a.has_vars(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.has_vars() || b.has_vars()
            }
            Expr::Pow { base, exp, .. } => base.has_vars() || exp.has_vars(),
        }
    }

    pub fn depends_on(&self, var: usize) -> bool {
        match self {
            Expr::Num(_) | Expr::Const(_) => false,
            Expr::Var(i) => *i == var,
            Expr::Neg(a) | Expr::Call(_, a) => a.depends_on(var),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.depends_on(var) || b.depends_on(var)
            }
            Expr::Pow { base, exp, .. } => base.depends_on(var) || exp.depends_on(var),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Num(v) if *v == 0.0)
    }

    fn is_one(&self) -> bool {
        matches!(self, Expr::Num(v) if *v == 1.0)
    }

    /// Literal value of `Num(c)` or `Neg(Num(c))`.
    fn literal(&self) -> Option<f64> {
        match self {
            Expr::Num(v) => Some(*v),
            Expr::Neg(a) => match **a {
                Expr::Num(v) => Some(-v),
                _ => None,
            },
            _ => None,
        }
    }

    /// Renumbers variables through `map`.
    pub fn remap(&self, map: &dyn Fn(usize) -> usize) -> Expr {
        match self {
            Expr::Num(v) => Expr::Num(*v),
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var(i) => Expr::Var(map(*i)),
            Expr::Neg(a) => Expr::Neg(Box::new(a.remap(map))),
            Expr::Add(a, b) => Expr::Add(Box::new(a.remap(map)), Box::new(b.remap(map))),
            Expr::Sub(a, b) => Expr::Sub(Box::new(a.remap(map)), Box::new(b.remap(map))),
            Expr::Mul(a, b) => Expr::Mul(Box::new(a.remap(map)), Box::new(b.remap(map))),
            Expr::Div(a, b) => Expr::Div(Box::new(a.remap(map)), Box::new(b.remap(map))),
            Expr::Pow { base, exp, int_exp } => Expr::Pow {
                base: Box::new(base.remap(map)),
                exp: Box::new(exp.remap(map)),
                int_exp: *int_exp,
            },
            Expr::Call(f, a) => Expr::Call(*f, Box::new(a.remap(map))),
        }
    }
}

// Folding constructors used when building expressions programmatically
// (derivatives, reductions). They only remove identities and fold
// literal arithmetic; no rewriting beyond that.

pub fn num(v: f64) -> Expr {
    if v < 0.0 {
        Expr::Neg(Box::new(Expr::Num(-v)))
    } else {
        Expr::Num(v)
    }
}

pub fn neg(a: Expr) -> Expr {
    if a.is_zero() {
        return a;
    }
    match a {
        Expr::Neg(inner) => *inner,
        other => Expr::Neg(Box::new(other)),
    }
}

pub fn add(a: Expr, b: Expr) -> Expr {
    if a.is_zero() {
        return b;
    }
    if b.is_zero() {
        return a;
    }
    if let (Some(x), Some(y)) = (a.literal(), b.literal()) {
        return num(x + y);
    }
    if let Expr::Neg(inner) = b {
        return Expr::Sub(Box::new(a), inner);
    }
    Expr::Add(Box::new(a), Box::new(b))
}

pub fn sub(a: Expr, b: Expr) -> Expr {
    if b.is_zero() {
        return a;
    }
    if a.is_zero() {
        return neg(b);
    }
    if let (Some(x), Some(y)) = (a.literal(), b.literal()) {
        return num(x - y);
    }
    if let Expr::Neg(inner) = b {
        return Expr::Add(Box::new(a), inner);
    }
    Expr::Sub(Box::new(a), Box::new(b))
}

pub fn mul(a: Expr, b: Expr) -> Expr {
    if a.is_zero() || b.is_zero() {
        return Expr::Num(0.0);
    }
    if a.is_one() {
        return b;
    }
    if b.is_one() {
        return a;
    }
    if let (Some(x), Some(y)) = (a.literal(), b.literal()) {
        return num(x * y);
    }
    match (a, b) {
        (Expr::Neg(x), y) if x.is_one() => neg(y),
        (x, Expr::Neg(y)) if y.is_one() => neg(x),
        (x, y) => Expr::Mul(Box::new(x), Box::new(y)),
    }
}

pub fn div(a: Expr, b: Expr) -> Expr {
    if a.is_zero() {
        return Expr::Num(0.0);
    }
    if b.is_one() {
        return a;
    }
    Expr::Div(Box::new(a), Box::new(b))
}

pub fn powi(base: Expr, k: i32) -> Expr {
    match k {
        0 => Expr::Num(1.0),
        1 => base,
        _ => Expr::pow(base, num(k as f64)),
    }
}

pub fn call(f: Func, a: Expr) -> Expr {
    Expr::Call(f, Box::new(a))
}
