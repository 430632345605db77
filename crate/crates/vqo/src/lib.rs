//! Simulator-backed testbed for variational hybrid quantum-classical
//! optimization.
//!
//! The crate provides, bottom to top:
//!
//! - [`pauli`]: exact symbolic algebra for tensor-product Pauli operators and
//!   positively weighted sums of them (objective observables, pulse
//!   generators).
//! - [`statevector`]: dense complex statevector simulation with Pauli
//!   rotations, controlled Paulis, generic pulse exponentials, and
//!   expectation values.
//! - [`ansatz`]: pulse-sequence state parameterizations, exact objective and
//!   derivative evaluation (used as ground truth), and light-cone supports.
//! - [`derivative`]: expansion of derivative observables into nested
//!   commutators of conjugated Pauli terms, with generalized Hadamard-test
//!   evaluation.
//! - [`oracle`]: the black-box sampling oracle producing single-measurement
//!   unbiased estimates of the objective and its derivatives, with a query
//!   ledger and importance-sampling tables.
//! - [`gradient`]: the two unbiased full-gradient estimators built from
//!   first-order oracle queries.
//! - [`optimize`]: projected SGD, stochastic mirror descent with an l1
//!   setup (plain and strongly convex variants), and a one-point spherical
//!   zeroth-order method.
//! - [`toy`]: a family of 1-local observables with a hidden sign vector,
//!   closed-form objectives, hypercube packings, and parameter
//!   identification.
//! - [`experiment`]: batch runners for convergence, zeroth-vs-first-order
//!   separation sweeps, and identification experiments, with CSV/SVG output
//!   and power-law fits.
//!
//! The `vqo` binary exposes the experiment runners as a small CLI; the
//! `examples/` directory demonstrates each capability in isolation.

pub mod ansatz;
pub mod derivative;
pub mod error;
pub mod experiment;
pub mod gradient;
pub mod optimize;
pub mod oracle;
pub mod pauli;
pub mod rng;
pub mod statevector;
pub mod toy;

pub use error::{Error, Result};
