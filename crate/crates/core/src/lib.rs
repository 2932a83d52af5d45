//! Open-loop bang-bang steering of a qubit under spin-boson decoherence,
//! with a homodyne feedback scheme as a baseline.

// Negated comparisons deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod decoherence;
pub mod error;
pub mod evolution;
pub mod exec;
pub mod feedback;
pub mod io;
pub mod quad;
pub mod state;
pub mod targeting;

pub use error::{Error, Result};
