//! Command-line front end: configuration, presets, subcommands and the
//! acceptance checks.

pub mod commands;
pub mod config;
pub mod error;
pub mod presets;
pub mod sweep;
pub mod verify;
