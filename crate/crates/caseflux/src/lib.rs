//! Std companion to `caseflux-core`: config files, CSV and JSON output,
//! rayon drivers and the `caseflux` command line.

pub mod cli;
pub mod config;
pub mod error;
pub mod parallel;
pub mod report;

pub use error::{Error, Result};
