//! Weighted l1 recovery: quadratically constrained basis pursuit, LASSO,
//! best-term errors in levels and the data-driven decoders built on them.

mod decoder;
mod lasso;
mod levels_error;
mod qcbp;

#[allow(unused_imports)]
pub(crate) use decoder::{binomial, level_supports};
pub use decoder::{
    cs_lipschitz_cap, data_consistent_select, recovery_bound_check, recovery_constants, BoundCheck,
    Model, MAX_MODEL_SUPPORTS,
};
pub use levels_error::{best_levels_term_error, is_sparse_in_levels, BestTerm};
pub use qcbp::{Recovery, Solution, SolverConfig};
