//! Simulation and cross-checking of quantum symmetry tests for finite groups.
//!
//! Each test circuit is simulated on dense matrices at small dimension and its
//! acceptance probability is compared with the corresponding closed form:
//! cycle index polynomials for separability tests, commutator series and trace
//! formulas for Hamiltonian covariance, Fourier identities for group-averaged
//! out-of-time-order correlators.

pub mod cli;
pub mod error;
pub mod groups;
pub mod ham_symmetry;
pub mod linalg;
pub mod models;
pub mod separability;
pub mod state_symmetry;

pub use error::{Result, SymError};
pub use groups::{
    CycleIndexPolynomial, CycleType, FiniteGroup, Permutation, PermutationRep, UnitaryRepTable,
};
pub use ham_symmetry::HamiltonianSpec;
pub use linalg::{CMat, CVec, DensityMatrix, PureState};
pub use state_symmetry::{AcceptanceReport, ProverConfig, SymmetryMode};
