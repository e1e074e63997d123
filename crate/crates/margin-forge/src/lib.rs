//! # margin-forge
//!
//! Standard-library side of the toolkit: the sparse `label index:value`
//! interchange format, the versioned model file, the schema file grammar,
//! CSV ingestion and the `margin-forge` command-line driver. The numerical
//! work lives in [`margin_forge_core`].

pub mod cli;
pub mod csv_input;
mod error;
pub mod model_file;
pub mod real;
pub mod schema_file;
pub mod sparse;

pub use error::{Error, Result};
pub use margin_forge_core;
