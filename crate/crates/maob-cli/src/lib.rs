//! Command-line front end: config parsing, field-dump I/O, report
//! rendering, and the experiment drivers behind the `maob` binary.

pub mod config;
pub mod experiments;
pub mod fieldio;
pub mod report;
pub mod run;
