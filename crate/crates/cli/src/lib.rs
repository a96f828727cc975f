//! File formats, builtin benchmark systems, statistics, metrics, and the
//! campaign runner behind the `falsify` command-line tool.

pub mod builtin;
pub mod formats;
pub mod metrics;
pub mod runner;
pub mod stats;
