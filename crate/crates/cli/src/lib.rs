//! Command-line front end for the flexsim cost model.
//!
//! The library half of this crate holds everything the binary does —
//! configuration resolution, report construction, CSV formats, and the
//! subcommand implementations — so integration tests can drive the same
//! code paths without spawning a process.

pub mod config;
pub mod error;
pub mod report;
pub mod run;
