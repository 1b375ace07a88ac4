//! Entropy dimension of measure-preserving systems at desk scale.
//!
//! The crate is split into five layers:
//!
//! - [`seqdim`]: integer sequences, their dimension profiles and the
//!   constructive sequence transforms (densification, power merging,
//!   scaling, floor division, block reversal, hereditary extraction).
//! - [`schedule`]: the integer parameter family driving the
//!   cutting-and-stacking construction, with exact big-integer recursions.
//! - [`tower`]: the cutting-and-stacking engine (independent stacking,
//!   repetition stacking, spacer insertion) with exact rational widths and
//!   O(depth) lineage resolution.
//! - [`entropy`]: partitions, exact and Monte-Carlo pattern distributions,
//!   Shannon entropy, conditional entropy and name counting.
//! - [`estimator`]: entropy-dimension estimates and finite machine checks of
//!   the construction's lemmas.

#![forbid(unsafe_code)]

pub mod entropy;
pub mod error;
pub mod estimator;
pub mod ratio;
pub mod schedule;
pub mod seqdim;
pub mod tower;

pub use error::{Error, Result};
pub use ratio::Ratio;

/// Default enumeration budget (cells or columns) for exact computations.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// Current version of every JSON/CSV schema written by this crate.
pub const SCHEMA_VERSION: u32 = 1;
