//! Dataset pipeline, file formats and evaluation for `hyperrobust`.
//!
//! The `hyperrobust` binary wraps these modules; everything it does can also
//! be driven from code.

pub mod bench;
pub mod config;
pub mod error;
pub mod eval;
pub mod pipeline;
pub mod records;

pub use error::{CliError, Result};
