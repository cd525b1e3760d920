//! Spectral flow toolkit over finite weighted block algebras.
//!
//! The crate computes spectral flow of paths of Hermitian operators by
//! several independent routes (partitioned essential codimension, an
//! eigenvalue-crossing oracle, integral formulas, boundary-value indices)
//! and provides an exact trigonometric-polynomial calculus for winding
//! numbers and almost periodic symbol pairings.

pub mod algebra;
pub mod apflow;
pub mod aps;
pub mod coeff;
pub mod error;
pub mod exec;
pub mod flow;
pub mod fredholm;
pub mod integrals;
pub mod models;
pub mod path;
pub mod quad;
pub mod serialize;
pub mod spectral;
pub mod symbol;
pub mod toeplitz;
pub mod trig;

pub use algebra::{BlockOperator, CMatrix, Projection, WeightedBlockAlgebra};
pub use error::{Result, SfError};
pub use path::{FlowReport, OddFunctionSpec, OperatorPath};
pub use spectral::Tolerances;
