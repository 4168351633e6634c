//! Command-line harness for the `foldnoise` toolkit: config handling, the
//! subcommand bodies, output plumbing and the acceptance suite.

pub mod acceptance;
pub mod commands;
pub mod config;
pub mod output;
