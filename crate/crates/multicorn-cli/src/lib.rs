//! Command-line front end and experiment registry for the `multicorn`
//! library.
//!
//! * [`config`] — TOML configuration with path-precise errors.
//! * [`manifest`] — experiment manifests and their JSON schema.
//! * [`experiments`] — experiments E0–E8.
//! * [`cli`] — argument parsing and subcommands.

pub mod cli;
pub mod config;
pub mod experiments;
pub mod manifest;
