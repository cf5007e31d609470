//! Brute-force optimal-policy oracles.
//!
//! Everything here is exponential in the number of boxes and exists to be
//! *right*, not fast: a Bellman recursion over (unopened-subset, best-value)
//! states, and an exhaustive search over the succinct committed-prefix
//! policies that the structure of optimal policies guarantees is enough.

mod dp;
mod structured;

pub use dp::{
    classic_optimal_value, optimal_value, optimal_value_with, DpAction, SizeError, SolveLimits,
    ValueTable, ValueTableRow,
};
pub use structured::{
    best_structured_policy, evaluate_structured_policy, PolicyError, StructuredPolicy, Threshold,
};
