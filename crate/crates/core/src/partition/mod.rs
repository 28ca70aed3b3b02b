//! Integral oracles for balanced separator and sparsest cut, the literal-set
//! checker for gadget graphs, and soundness reference values.

mod cut;
mod lemma33;
mod search;

pub use cut::{cmp_sparsity, cut_edges, Cut, CutStats};
pub use lemma33::{
    bs_soundness_reference, check_lemma33, usc_soundness_reference, Lemma33Check, Literal,
    SoundnessReference,
};
pub use search::{
    best_balanced_separator, best_sparsest_cut, OracleMode, EXACT_LIMIT, LOCAL_RESTARTS,
};
