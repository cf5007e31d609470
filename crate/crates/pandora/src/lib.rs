//! Exact tooling for sequential search over costly boxes where inspection is
//! optional: a box may be opened at a cost to reveal its value, or taken
//! sight unseen for its (unknown) value.
//!
//! Everything runs over arbitrary-precision rationals, so payoff identities
//! and oracle equivalences hold as exact equalities rather than to a
//! tolerance.  The crate provides:
//!
//! - index computation, clipped-value distributions, and the closed-form
//!   payoff of the classic descending-index policy ([`index`]);
//! - brute-force optimal-policy oracles: a subset dynamic program and an
//!   exhaustive search over committed-prefix policies ([`exact`]);
//! - runnable policies: reproducible index-policy simulation, the
//!   {0,1}-support polynomial optimum, and the half-approximation
//!   ([`policies`]);
//! - the low-cost-low-return-support-3 instance family, its normal-policy
//!   payoff calculus, and a Partition-to-search reduction generator with
//!   certified rational parameters ([`lclrs3`]);
//! - the two-stage value-discretization pipeline behind the approximation
//!   scheme, solved exactly at desk scale ([`ptas`]);
//! - deterministic random instance generators and randomized verification
//!   suites ([`gen`], [`verify`]).
//!
//! The companion `pandora-cli` crate exposes all of this on the command
//! line; the `book/` directory of the repository walks through the concepts
//! with runnable snippets (mirrored as doc-tests in [`book`]).

// Error payloads carry the offending exact rationals; call rates are tiny.
#![allow(clippy::result_large_err)]

pub mod dist;
pub mod exact;
pub mod exp;
pub mod gen;
pub mod index;
pub mod instance;
pub mod lclrs3;
pub mod policies;
pub mod ptas;
pub mod scalar;
pub mod verify;

pub mod book;

pub use dist::DiscreteDistribution;
pub use instance::{PnoiBox, PnoiInstance};
pub use scalar::Scalar;
