//! Configuration, file formats and command dispatch for the piezobrill
//! command-line tool.

pub mod commands;
pub mod config;
pub mod error;
pub mod format;

pub use commands::run;
pub use error::{CliError, CliResult};
