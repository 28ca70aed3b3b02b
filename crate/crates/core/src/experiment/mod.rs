//! End-to-end experiment pipeline, reports and the on-disk artifact store.

mod config;
mod identities;
mod pipeline;
mod store;

pub use config::{ExperimentConfig, Tolerances};
pub use identities::planted_identities;
pub use pipeline::{
    gadget_params, instance_for, run_gap, solve_relaxation, Family, FamilyReport, GapReport,
    IntegralReport, MemberRow, MOMENT_GUARD,
};
pub use store::{content_hash, ArtifactStore, SCHEMA, WORKDIR_ENV};
