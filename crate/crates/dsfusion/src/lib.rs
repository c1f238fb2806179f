//! Experiment harness, reference classifiers, file formats and command-line
//! plumbing around `dsfusion-core`.

pub mod classifiers;
pub mod cli;
pub mod config;
pub mod dataset;
mod error;
pub mod formats;
pub mod harness;
pub mod selftest;

pub use dsfusion_core as core;
pub use error::{Error, Result};
