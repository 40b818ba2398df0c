//! File formats, manifests, parallel emulation and the `cnr` command line on
//! top of [`cnr_core`].

pub mod commands;
pub mod error;
pub mod files;
pub mod instance;
pub mod manifest;
pub mod parallel;
pub mod parse;
pub mod tables;

pub use error::{AppError, Result};
