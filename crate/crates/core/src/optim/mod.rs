//! Shared search machinery: exhaustive sign enumeration, torus grid search,
//! homogeneous local search with restarts, and `p → q` operator norms.
//!
//! Every entry point is deterministic in its [`OptimConfig`]: restart `i`
//! draws from the substream `seed ^ i`, restarts may run in parallel, and the
//! reduction picks the best value with ties broken by the lexicographically
//! smallest witness.

mod config;
mod enumerate;
mod opnorm;
mod search;
mod value;

pub use config::OptimConfig;
pub use enumerate::{
    assignments, count_assignments, set_partitions, sign_supremum, torus_supremum, SetPartition,
};
pub use opnorm::{op_norm_pq, op_norm_quick, op_norm_upper_bound};
pub use search::{ball_linear_max, local_search, ratio_ascent, Ascent, Direction};
pub use value::{NormValue, ValueKind, Witness};
