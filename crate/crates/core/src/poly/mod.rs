//! Subset algebra and multilinear polynomials over binary variables.

mod program;
mod subset;

pub use program::{BinaryProgram, ConstraintKind, MultilinearPoly, PolyJson, Sense, TermJson};
pub use subset::{binomial, canonical_key, count_subsets, enumerate_subsets, SubsetKey};
