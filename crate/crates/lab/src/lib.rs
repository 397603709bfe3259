//! Std companion of `phasestep-core`: a `rustfft` engine, file formats,
//! configuration, parallel sweeps, table rendering and the `phasestep`
//! command line.

pub mod check;
pub mod cli;
pub mod config;
pub mod engine;
pub mod error;
pub mod io;
pub mod sweep;
pub mod table;

pub use cli::run_cli;
pub use engine::RustFftEngine;
pub use error::{LabError, LabResult};
