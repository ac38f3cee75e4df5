//! Configuration, artifact writers and subcommand drivers behind the
//! `robustq` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod verify;
