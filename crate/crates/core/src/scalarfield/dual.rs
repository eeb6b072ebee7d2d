//! Forward-mode numbers: plain `f64`, first-order `Dual1` and
//! second-order `Dual2`, all carrying dense derivative storage over the
//! active variables.

/// Arithmetic needed by the evaluator.
pub trait Number: Clone {
    /// Whether this number type tracks derivatives (affects which
    /// points count as outside the domain, e.g. `sqrt(0)`).
    const DIFFERENTIABLE: bool;

    fn constant_like(value: f64, like: &Self) -> Self;
    fn value(&self) -> f64;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Applies a scalar function given its value and first two
    /// derivatives at `self.value()`.
    fn chain(&self, f0: f64, f1: f64, f2: f64) -> Self;

    fn recip(&self) -> Self {
        let v = self.value();
        self.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }

    fn div(&self, other: &Self) -> Self {
        self.mul(&other.recip())
    }
}

impl Number for f64 {
    const DIFFERENTIABLE: bool = false;

    fn constant_like(value: f64, _: &Self) -> Self {
        value
    }
    fn value(&self) -> f64 {
        *self
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn chain(&self, f0: f64, _: f64, _: f64) -> Self {
        f0
    }
    fn recip(&self) -> Self {
        1.0 / self
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
}

/// Value and gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct Dual1 {
    pub value: f64,
    pub grad: Vec<f64>,
}

impl Dual1 {
    pub fn constant(value: f64, n: usize) -> Self {
        Dual1 { value, grad: vec![0.0; n] }
    }

    pub fn variable(value: f64, slot: usize, n: usize) -> Self {
        let mut d = Self::constant(value, n);
        d.grad[slot] = 1.0;
        d
    }
}

impl Number for Dual1 {
    const DIFFERENTIABLE: bool = true;

    fn constant_like(value: f64, like: &Self) -> Self {
        Dual1::constant(value, like.grad.len())
    }
    fn value(&self) -> f64 {
        self.value
    }
    fn add(&self, o: &Self) -> Self {
        Dual1 {
            value: self.value + o.value,
            grad: self.grad.iter().zip(&o.grad).map(|(a, b)| a + b).collect(),
        }
    }
    fn sub(&self, o: &Self) -> Self {
        Dual1 {
            value: self.value - o.value,
            grad: self.grad.iter().zip(&o.grad).map(|(a, b)| a - b).collect(),
        }
    }
    fn mul(&self, o: &Self) -> Self {
        Dual1 {
            value: self.value * o.value,
            grad: self.grad.iter().zip(&o.grad).map(|(a, b)| a * o.value + self.value * b).collect(),
        }
    }
    fn neg(&self) -> Self {
        Dual1 { value: -self.value, grad: self.grad.iter().map(|g| -g).collect() }
    }
    fn chain(&self, f0: f64, f1: f64, _: f64) -> Self {
        Dual1 { value: f0, grad: self.grad.iter().map(|g| f1 * g).collect() }
    }
}

/// Value, gradient and dense symmetric Hessian (row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct Dual2 {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: Vec<f64>,
}

impl Dual2 {
    pub fn constant(value: f64, n: usize) -> Self {
        Dual2 { value, grad: vec![0.0; n], hess: vec![0.0; n * n] }
    }

    pub fn variable(value: f64, slot: usize, n: usize) -> Self {
        let mut d = Self::constant(value, n);
        d.grad[slot] = 1.0;
        d
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn hess_at(&self, i: usize, j: usize) -> f64 {
        self.hess[i * self.dim() + j]
    }
}

impl Number for Dual2 {
    const DIFFERENTIABLE: bool = true;

    fn constant_like(value: f64, like: &Self) -> Self {
        Dual2::constant(value, like.dim())
    }
    fn value(&self) -> f64 {
        self.value
    }
    fn add(&self, o: &Self) -> Self {
        Dual2 {
            value: self.value + o.value,
            grad: self.grad.iter().zip(&o.grad).map(|(a, b)| a + b).collect(),
            hess: self.hess.iter().zip(&o.hess).map(|(a, b)| a + b).collect(),
        }
    }
    fn sub(&self, o: &Self) -> Self {
        Dual2 {
            value: self.value - o.value,
            grad: self.grad.iter().zip(&o.grad).map(|(a, b)| a - b).collect(),
            hess: self.hess.iter().zip(&o.hess).map(|(a, b)| a - b).collect(),
        }
    }
    fn mul(&self, o: &Self) -> Self {
        let n = self.dim();
        let (u, v) = (self.value, o.value);
        let mut hess = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                hess[i * n + j] = self.hess[i * n + j] * v
                    + u * o.hess[i * n + j]
                    + self.grad[i] * o.grad[j]
                    + o.grad[i] * self.grad[j];
            }
        }
        Dual2 {
            value: u * v,
            grad: self.grad.iter().zip(&o.grad).map(|(a, b)| a * v + u * b).collect(),
            hess,
        }
    }
    fn neg(&self) -> Self {
        Dual2 {
            value: -self.value,
            grad: self.grad.iter().map(|g| -g).collect(),
            hess: self.hess.iter().map(|h| -h).collect(),
        }
    }
    fn chain(&self, f0: f64, f1: f64, f2: f64) -> Self {
        let n = self.dim();
        let mut hess = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                hess[i * n + j] = f1 * self.hess[i * n + j] + f2 * self.grad[i] * self.grad[j];
            }
        }
        Dual2 { value: f0, grad: self.grad.iter().map(|g| f1 * g).collect(), hess }
    }
}
