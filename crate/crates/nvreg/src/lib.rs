//! Configuration, file formats and the `nvreg` command line on top of `nvreg-core`.
//!
//! Subcommands: `run`, `fit`, `flim`, `fidelity` and `parse`. Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 2 | bad configuration, arguments or input file |
//! | 3 | runtime failure, e.g. eigenstate labeling broke down |
//! | 4 | the geometry fit did not converge |

pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod runner;
pub mod units;

pub use error::{CliError, CliResult};
