//! Gate-based quantum genetic algorithm for real-valued global optimization.
//!
//! Individuals are layered quantum circuits over a finite gate set. Measurement
//! outcomes of an exact statevector simulation are decoded into real vectors,
//! and the objective function evaluated at the sample mean gives the fitness.
//! The crate provides the circuit genome representation, the simulator, the
//! evolutionary operators (elitism, layer crossover, arity-changing mutation),
//! a pairwise inter-individual entanglement mode, and a CSV-emitting experiment
//! runner exposed through the `qga` binary.
//!
//! Population evaluation and experiment repetitions run on rayon when the
//! default `parallel` feature is enabled; without it everything falls back to
//! sequential loops with identical results, since every stochastic operation
//! draws from an RNG stream derived from the master seed ahead of time.

pub mod encoding;
pub mod entanglement;
pub mod evolution;
pub mod experiments;
pub mod fitness;
pub mod gateset;
pub mod genome;
pub mod parallel;
pub mod rng;
pub mod simulator;
pub mod stats;

use thiserror::Error;

/// Errors surfaced by the library API.
#[derive(Debug, Error)]
pub enum QgaError {
    #[error("invalid genome: {0}")]
    InvalidGenome(#[from] genome::GenomeViolation),
    #[error("circuit has {requested} qubits, exceeding the simulation cap of {cap}")]
    QubitCapExceeded { requested: usize, cap: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid configuration: field `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, QgaError>;
