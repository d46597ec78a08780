//! Jaynes-Cummings model on a truncated atom ⊗ field space.
//!
//! The crate builds the resonant JCM Hamiltonians, the unitary
//! Û = exp((π/2)𝒪) that diagonalizes the interaction, the dressed ladder
//! operators, the JCM coherent and spin coherent states, and evolves states
//! with exact eigenphases in the dressed frame.

pub mod blocks;
pub mod cli;
pub mod coherent;
pub mod diagonalize;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod par;
pub mod space;
pub mod verify;

pub use error::{JcmError, Result};
pub use space::{Atom, BareLabel, Cutoff, Ket, LinOp, C64};
