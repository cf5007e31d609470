//! The approximation pipeline: discretize values, solve the rounded
//! process exactly, lift the policy back to the raw instance.
//!
//! Small values are floored onto a grid; large values keep their raw
//! payoffs but have the *state* they induce rounded up to one of O(1/ε)
//! points, so the solved process only ever distinguishes a constant number
//! of states.  At this scale the rounded process is handed to an exact
//! subset solver rather than the polynomial block-adaptive machinery the
//! guarantee is usually routed through, which preserves every payoff bound
//! but not polynomial running time in the number of boxes.

mod discretize;
mod lpnoi;
mod pipeline;

pub use discretize::{
    choose_theta, f_value, large_points, s_discretize, w_value, DiscretizeError, LargePoints,
    Theta,
};
pub use lpnoi::{
    build_lpnoi, lift_policy, lift_policy_with, quasi_index_value, solve_ssdp_exact, LpnoiError,
    LpnoiInstance, SsdpAction, SsdpPolicy,
};
pub use pipeline::{ptas_pipeline, PtasError, PtasResult};
