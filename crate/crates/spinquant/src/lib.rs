//! Minimization of binary quadratic functionals with quantized couplings.
//!
//! The crate models energies `E(S) = -1/2 S^T A S - B^T S` over spin vectors
//! `S` in `{-1, +1}^N`, descends them by asynchronous single-spin updates,
//! and replaces the real coupling matrix by a small integer-level image to
//! study what that costs. The analytics layer predicts the sign-mismatch
//! probability between exact and quantized local fields, the relative energy
//! the quantized minima give up, and how far they sit from true minima; the
//! experiments layer verifies those predictions against seeded Monte Carlo.

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod problem;
pub(crate) mod quad;
pub mod quantizer;
pub mod theory;

pub use error::{Error, Result};
