//! Small dense SDP solver and SDPA interchange.

mod problem;
mod psd;
mod sdpa;
mod solver;

pub use problem::{
    constraint_violations, evaluate_terms, Block, BlockKind, BlockMatrices, Constraint,
    ConstraintKind, SdpProblem, Term,
};
pub(crate) use psd::symmetric_eigenvalues;
pub use psd::{min_eigenvalue, psd_project};
pub use sdpa::{canonical_form, export_sdpa, parse_sdpa, to_sdpa_string, CanonicalSdpa, SdpaEntry};
pub use solver::{
    solve, solve_with, SdpSolution, SolveStatus, SolverOptions, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
