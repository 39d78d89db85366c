//! Mutation testing for quantum neural networks.
//!
//! The crate bundles a small exact/finite-shot/noisy circuit simulator, QNN
//! construction and training, nine post-training mutation operators, the
//! statistical machinery that decides whether a mutant is killed, and a
//! search that generates effective mutants for scoring test suites.

pub mod circuit;
pub mod error;
pub mod genloop;
pub mod harness;
pub mod mutops;
pub mod qnn;
pub mod rng;
pub mod sim;
pub mod stats;

pub use error::{Error, Result};
