//! Command-line front end for `spinreduce`: TOML run configs, trajectory
//! and portrait files, and the invariant check suite.

pub mod check;
pub mod commands;
pub mod config;
pub mod output;
