//! Command-line workbench around the `hexevo-core` library: TOML run
//! configuration, tab-separated run artifacts, parallel trial evaluation,
//! resumable evolution runs, and post-run analysis tables.

pub mod analyze;
pub mod config;
pub mod error;
pub mod formats;
pub mod manifest;
pub mod runner;
