//! Lasserre-hierarchy relaxations for Balanced Separator and Uniform Sparsest Cut,
//! 3-XOR gadget instances, exact identity checks and desk-scale gap measurement.

pub mod certificates;
pub mod error;
pub mod experiment;
pub mod gadgets;
pub mod graph;
pub mod lasserre;
pub mod partition;
pub mod poly;
pub mod scalar;
pub mod sdp;
pub mod xor3;

pub use error::{Error, Result};
pub use scalar::Rational;
