//! File formats, evaluation and the command-line front end for `lumen-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod eval;
pub mod formats;

pub use cli::run_cli;
