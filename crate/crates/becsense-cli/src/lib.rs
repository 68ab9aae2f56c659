//! Library surface of the command line front end: configuration parsing,
//! built-in presets, scenario execution and deterministic output formats.

pub mod config;
pub mod output;
pub mod presets;
pub mod runner;
