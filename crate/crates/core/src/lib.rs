#![cfg_attr(not(test), no_std)]

//! # margin-forge-core
//!
//! Soft-margin support vector machine training and the surrounding pure
//! machinery: kernels, a sequential-minimal-optimization dual solver, the
//! record-to-vector encoder used for clinical and genotype tables, and the
//! evaluation helpers that produce confusion-style reports.
//!
//! The crate needs only `alloc`. File formats, CSV ingestion and the
//! command-line driver live in the `margin-forge` crate.

extern crate alloc;

mod error;

pub mod encoding;
pub mod eval;
pub mod kernel;
pub mod model;
pub mod smo;
pub mod vector;

pub use error::{Error, Result};
pub use kernel::{kernel_eval, Kernel};
pub use model::Model;
pub use smo::{train, train_with_observer, TrainConfig, TrainDiagnostics};
pub use vector::{FeatureVector, Label};

/// A labeled training or test point.
pub type Example = (FeatureVector, Label);
