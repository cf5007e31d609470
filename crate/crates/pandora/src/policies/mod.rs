//! Executable policies.
//!
//! The index policy as a reproducible Monte-Carlo simulation, the
//! non-exposure check on its traces, the polynomial-time optimum for
//! supports inside {0, 1}, and the half-approximation that seeds the
//! discretization threshold.

mod simulate;
mod support01;

pub use simulate::{
    check_non_exposed, run_index_policy, summarize_traces, PolicyTrace, SimulationConfig,
    TraceAction, TraceError, TraceStep, TraceSummary,
};
pub use support01::{support01_optimal, CommitPolicy, Support01Error, Support01Policy};

use crate::index::max_kappa_expectation;
use crate::instance::PnoiInstance;
use crate::scalar::Scalar;

/// The better of the index policy and the best blind take:
/// `max(E[max(0, max κ)], max_i E[v_i])`.  At least half the optimum.
pub fn half_approx(inst: &PnoiInstance) -> Scalar {
    let blind = inst
        .boxes()
        .iter()
        .map(|b| b.dist().expected_value())
        .max()
        .expect("nonempty instance");
    max_kappa_expectation(inst).max(blind)
}
