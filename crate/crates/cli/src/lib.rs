//! Command-line front end: parameter solving, single runs, sweeps with CSV
//! output, and the validation suite.

pub mod app;
pub mod config;
pub mod output;
pub mod validate;
