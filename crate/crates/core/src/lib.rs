//! Join-order optimizer laboratory.
//!
//! A mini-SQL query is parsed into one [`query::QueryGraph`] per block and
//! planned either by exhaustive dynamic programming ([`dp`]) or by a genetic
//! search over join sequences ([`geqo`]). Every planner run is recorded as a
//! [`trace::OptimizationTrace`] that can also be written to and read back
//! from a line-oriented log ([`log`]).

pub mod catalog;
pub mod cost;
pub mod dp;
pub mod fixed;
pub mod geqo;
pub mod log;
pub mod paths;
pub mod pipeline;
pub mod presets;
pub mod query;
pub mod trace;
