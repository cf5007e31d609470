//! The guide's chapters, mounted as doc-tests.
//!
//! The mdbook under `book/` cannot run its own code fences, so each chapter
//! is included here as module documentation and `cargo test --doc` keeps
//! every snippet in the book compiling and passing.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/instances.md")]
pub mod instances {}

#[doc = include_str!("../../../book/src/index-policy.md")]
pub mod index_policy {}

#[doc = include_str!("../../../book/src/oracles.md")]
pub mod oracles {}

#[doc = include_str!("../../../book/src/hardness.md")]
pub mod hardness {}

#[doc = include_str!("../../../book/src/approximation.md")]
pub mod approximation {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
