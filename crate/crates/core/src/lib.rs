//! Optimal quantum error recovery by semidefinite programming.
//!
//! Channels are stored as Kraus lists or Choi matrices (output ⊗ input,
//! row-major vectorization). The recovery problem for an encoding and a noise
//! channel is a linear objective over trace-preserving Choi matrices, solved
//! by a primal-dual interior-point method that returns a duality certificate.

pub mod channel;
pub mod codes;
pub mod error;
pub mod fidelity;
pub mod linalg;
pub mod random;
pub mod recovery;
pub mod sdp;

pub use error::{Error, Result};
