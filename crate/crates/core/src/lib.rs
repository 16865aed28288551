//! Quantum-link-model lattice gauge theory on qubits.
//!
//! The crate builds U(1) quantum-link Hamiltonians with Wilson fermions in one
//! and two spatial dimensions, assembles gauge-invariant variational circuits,
//! and checks them against exact diagonalization and exact time evolution.
//!
//! Conventions shared by every module:
//! - qubit 0 is the least significant bit of a computational-basis index;
//! - a fermionic qubit in state `|0>` is occupied, `|1>` is empty;
//! - link basis state `j` carries electric flux `S - j`.

pub mod ansatz;
pub mod circuit;
pub mod dynamics;
pub mod encoding;
pub mod error;
pub mod lattice;
pub mod model;
pub mod oracle;
pub mod par;
pub mod pauli;
pub mod qasm;
pub mod sparse;
pub mod statesim;
pub mod vqe;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
