//! Instance library, oracles, file formats and end-to-end pipeline on top of
//! `spectral_threshold_core`.

pub mod config;
pub mod error;
pub mod format;
pub mod library;
pub mod oracle;
pub mod pipeline;

pub use error::{HarnessError, Result};
