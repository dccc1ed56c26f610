//! Numerical laboratory for continuous-time quantum query algorithms on
//! Gram-matrix state-conversion problems, at desk scale and in dense double
//! precision.
//!
//! The crate covers the full chain from problem statement to verified run:
//!
//! - [`matrix`] / [`gram`]: complex dense substrate, Gram-matrix validation
//!   and factorization, γ₂-norm bounds, Hadamard-masked fidelity and trace
//!   distance;
//! - [`adversary`]: coordinate difference masks, witness factorizations
//!   (upper bounds), adversary-matrix certificates (lower bounds), and a
//!   best-effort two-sided solver with a duality-gap report;
//! - [`query`]: the discrete unitary oracle, its Hamiltonian counterpart, and
//!   the equivalence check between the two;
//! - [`convert`]: the adiabatic state-conversion algorithm built from a
//!   witness — interpolation path, dressed states, driver/oracle projectors,
//!   time scale, and the gap-free error-bound machinery;
//! - [`propagate`]: midpoint-exponential Schrödinger integration and the
//!   idealized transport evolution;
//! - [`progress`]: progress-function analysis of simulated runs and the
//!   query-time lower bound it certifies;
//! - [`io`] / [`cli`]: JSON/CSV schemas and the batch command front end.

pub mod adversary;
pub mod cli;
pub mod convert;
pub mod error;
pub mod gram;
pub mod io;
pub mod matrix;
mod opt;
pub mod progress;
pub mod propagate;
pub mod query;

pub use error::{Error, Result};
pub use gram::{GramMatrix, OptimizerConfig, StateRealization};
pub use matrix::{CMatrix, CVector};
