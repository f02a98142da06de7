pub mod bounds;
pub mod empirics;
pub mod error;
pub mod freealg;
pub mod hamiltonian;
pub mod linalg;
pub mod rng;
pub mod scalar;
pub mod schedule;

pub use error::{Error, Result};

/// Dense complex matrix over `f64`.
pub type Matrix = linalg::ComplexMatrix<f64>;
/// Hamiltonian with `f64` coefficients.
pub type Hamiltonian = hamiltonian::Hamiltonian<f64>;
pub type Simulator<'a> = empirics::Simulator<'a, f64>;
pub type BoundParams = bounds::BoundParams<f64>;
pub type PlanResult = bounds::PlanResult<f64>;
