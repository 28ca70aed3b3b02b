//! Completeness side of the gap instances: a 3-XOR Lasserre solution lifted to
//! vectors on H_Φ and on the sparsest-cut graph, with exact identity checks.

mod identities;
mod lift;

pub use identities::{
    balance_over, bound_check, bs_balance_residual, bs_objective, edge_objective, identity_check,
    materialize, usc_objective, EdgeObjective, IdentityCheck, UscObjective,
};
pub use lift::{
    lift_bs_solution, lift_usc_solution, ImplicitLiftedSolution, LiftKind, VertexValue,
};
