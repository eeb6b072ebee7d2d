//! Time-dependent Lagrangian and Hamiltonian mechanics on Lie
//! affgebroids, worked in a single adapted chart.
//!
//! A model is given by its structure functions over the base
//! coordinates. From it the crate builds the Euler-Lagrange and Hamilton
//! dynamics, the Legendre correspondence between them, the canonical
//! involution and Tulczyjew map, and the reduced model of a principal
//! connection. Each construction comes with residual checks.

#![allow(clippy::needless_range_loop)]

pub mod atiyah;
pub mod config;
pub mod error;
pub mod flow;
pub mod hamiltonian;
pub mod lagrangian;
pub mod legendre;
mod linalg;
pub mod model;
pub mod par;
pub mod sampling;
pub mod scalarfield;
pub mod suite;
pub mod tulczyjew;

pub use error::{Error, Result};
pub use model::{APoint, AffgebroidModel, Chart, JetPoint, PhasePoint, VStarPoint};
pub use par::Execution;
pub use scalarfield::ScalarField;
