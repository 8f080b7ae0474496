//! Command-line front end: vertex reports, edge sweeps with CSV and SVG
//! output, bound tables and single-point QFI reports.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod report;
pub mod run;
pub mod svg;

pub use error::{HarnessError, Result};
