//! Command-line front end: config parsing, scenario runners, protocol path
//! search and CSV/report output.

pub mod config;
pub mod output;
pub mod scenarios;
pub mod search;
pub mod setup;
