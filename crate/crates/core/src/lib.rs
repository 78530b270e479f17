//! Wigner-Smith time delay for layered one-dimensional potentials, resonance
//! counting from the integrated delay, and the classical adiabatic oscillator
//! it is compared against.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod corpus;
pub mod delay;
pub mod engine;
pub mod error;
pub mod io;
pub mod lm;
pub mod oscillator;
pub mod potential;
pub mod quadrature;
pub mod resonance;
pub mod run;
pub mod units;
pub mod verify;
pub mod wigner;

pub use error::{Error, Result};
