//! Reading a stored qubit state through a two-qubit unitary interaction.
//!
//! A probe qubit interacts with an environment qubit through a two-qubit
//! entangling unitary drawn from the tetrahedron
//! `pi/2 >= alpha_x >= alpha_y >= alpha_z >= 0`. The environment state is the
//! stored quantum information. This crate quantifies how much of it the
//! probe output can reveal, through two figures of merit:
//!
//! - [`capacity`]: a one-shot quantum capacity lower bound built on the
//!   conditional Renyi-2 entropy `H2(B|F)` of the complementary Choi state.
//! - [`fisher`]: the prior-averaged trace of the quantum Fisher information of
//!   the channel output, maximized over the probe, and the resulting Bayesian
//!   Cramer-Rao scalar.
//!
//! All numerical code is generic over the scalar type through [`Real`]
//! (`f32` or `f64`). The aliases at the crate root fix the scalar to `f64`,
//! which is what the tolerances quoted throughout the docs assume.

pub mod capacity;
pub mod channel;
mod error;
pub mod fisher;
pub mod optimize;
pub mod qlin;
pub mod quadrature;
mod scalar;
pub mod unitary;

pub use error::{Error, Result};
pub use scalar::Real;

/// Dense complex matrix over `f64`.
pub type Matrix = qlin::ComplexMatrix<f64>;
/// Hermitian eigendecomposition over `f64`.
pub type Eigh = qlin::HermitianEig<f64>;
/// Point of the two-qubit unitary tetrahedron over `f64`.
pub type Params = unitary::UnitaryParams<f64>;
/// Pure probe state over `f64`.
pub type Probe = channel::ProbeState<f64>;
/// Environment state over `f64`.
pub type Env = channel::EnvState<f64>;
/// Stinespring isometry over `f64`.
pub type Isometry = channel::ChannelIsometry<f64>;
/// Choi state `rho_BF` over `f64`.
pub type Choi = channel::BipartiteState<f64>;
/// Conditioning state `sigma_F` over `f64`.
pub type Sigma = capacity::ConditioningState<f64>;
/// One-shot bound record over `f64`.
pub type Capacity = capacity::CapacityResult<f64>;
/// Quantum Fisher information matrix over `f64`.
pub type Qfi = fisher::QfiMatrix<f64>;
/// Averaged-QFI result over `f64`.
pub type AvgQfi = fisher::AvgQfiResult<f64>;
