//! Moment vectors, relaxation assembly, Gram factorization and lifting certificates.

mod certify;
mod gram;
mod lifted;
mod moments;
mod psi;

pub use certify::{certify_lift, LiftCertificate, Rank1Family, VectorFamily};
pub use gram::{
    gram_from_moments, verify_vector_constraints, GramSolution, PairViolation, VectorReport,
};
pub use lifted::{
    build_lifted_sdp, LiftEvaluation, LiftedBlock, LiftedMeta, LiftedSdp, LiftedSolve, LinearRow,
};
pub use moments::{MomentIndex, MomentMatrix, MomentVector};
pub use psi::{balanced_range, build_psi1, build_psi2, solve_family, FamilySolve, BALANCE_SLACK};
