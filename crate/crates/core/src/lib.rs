//! Simulation of quantum generative adversarial games on mixed states.
//!
//! The crate is organized bottom-up:
//!
//! - [`qcore`]: dense complex linear algebra, density matrices, POVM elements,
//!   distance measures and the Helstrom measurement.
//! - [`blochgame`]: the single-qubit game written in Bloch coordinates, with
//!   gradient descent/ascent and optimistic updates.
//! - [`circuits`]: parametrized circuits built from single-qubit rotations and
//!   CNOTs, the purification generator and the ancilla discriminator.
//! - [`gradients`]: parameter-shift and finite-difference gradients.
//! - [`optim`]: GDA, Adam and optimistic mirror descent, and the adversarial
//!   training loop.
//! - [`convexqgan`]: projection-free updates over the convex sets of states and
//!   measurement operators.
//! - [`harness`]: named experiments, configuration files and CSV output.

pub mod blochgame;
pub mod circuits;
pub mod convexqgan;
mod error;
pub mod gradients;
pub mod harness;
pub mod optim;
pub mod qcore;

pub use error::{Error, Result};

/// Library version string recorded in experiment output.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
