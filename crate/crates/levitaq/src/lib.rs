//! Command-line front end, configuration, and file formats for
//! [`levitaq_core`].
//!
//! The `levitaq` binary is a thin wrapper around [`cli::run`].

pub mod cli;
pub mod commands;
pub mod error;
pub mod io;
pub mod params;

pub use error::CliError;
pub use io::{ingest_spectrum, IngestedSpectrum, SolutionReport};
