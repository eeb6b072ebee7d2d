use thiserror::Error;

/// Every failure the engine can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at position {pos}: expected {expected}, found {found}")]
    Syntax { pos: usize, expected: String, found: String },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite state at step {step} (t = {t})")]
    NonFiniteState { step: usize, t: f64 },
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("singular Lagrangian: |det W| = {det:e} at {at}")]
    SingularLagrangian { det: f64, at: String },
    #[error("singular Hamiltonian: |det H_pp| = {det:e} at {at}")]
    SingularHamiltonian { det: f64, at: String },
    #[error("Newton iteration failed after {iterations} iterations (residual {residual:e})")]
    NewtonDivergence { iterations: usize, residual: f64 },
    #[error("structure constants violate the Jacobi identity (residual {0:e})")]
    JacobiViolation(f64),
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn fmt_point(parts: &[&[f64]]) -> String {
    let coords: Vec<String> = parts.iter().flat_map(|p| p.iter()).map(|v| format!("{v}")).collect();
    format!("({})", coords.join(", "))
}
