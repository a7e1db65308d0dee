//! File-based front end to `svarma_core`: simulate, estimate, grid selection,
//! exact Wiener-Hopf factorisation, long-run rotation and residual diagnostics.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;

pub use commands::{run, Command};
pub use config::{Overrides, RunConfig};
pub use error::{CliError, Result};
