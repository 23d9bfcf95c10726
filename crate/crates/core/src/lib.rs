//! Open quantum system dynamics on finite position lattices.
//!
//! A system and its environment share a pure composite state that is
//! propagated with a Lie–Trotter product formula. The reduced dynamics of the
//! system can then be read off in four equivalent ways, each implemented here
//! and cross-checked against the others and against brute-force references:
//!
//! * [`unravel`]: random pure system states obtained by sampling the
//!   environment coordinate, whose covariance is the reduced density operator;
//! * [`wigner`]: the joint Wigner function, integrated over the environment's
//!   phase space;
//! * [`states`]: the partial trace of the composite projector;
//! * [`hilbert_measure`]: a Gaussian measure on the system's Hilbert space
//!   with the reduced density operator as correlation operator.

pub mod cli;
pub mod config;
pub mod error;
pub mod evolve;
pub mod fixtures;
pub mod hamiltonian;
pub mod hilbert_measure;
pub mod io;
pub mod lattice;
pub mod linalg;
pub mod oracle;
pub mod states;
pub mod unravel;
pub mod verify;
pub mod wigner;

pub use error::{Error, Result};

/// Complex amplitude type used throughout.
pub type C64 = num_complex::Complex<f64>;
