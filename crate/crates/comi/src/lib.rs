//! File formats, parallel drivers and the `comi` command line for the
//! `comi-core` compression kernel.

pub mod cli;
pub mod error;
pub mod io;
pub mod manifest;
pub mod parallel;

pub use error::CliError;
pub use io::{read_embeddings, write_embeddings};
pub use parallel::Workers;
