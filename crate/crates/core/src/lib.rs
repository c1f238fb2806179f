//! Evidence-theoretic classifier fusion.
//!
//! The crate is `no_std` and only needs `alloc`. It provides:
//!
//! * [`mass`]: frames of discernment, focal sets, mass functions, belief,
//!   plausibility and Dempster's rule of combination.
//! * [`metrics`]: Deng and Shannon entropy, belief Jensen-Shannon divergence,
//!   evidence distance and the disagreement degree.
//! * [`boe`]: confusion-matrix statistics, weighting schemes and the
//!   construction of bodies of evidence from classifier scores.
//! * [`fusion`]: the credibility-weighted fusion pipeline.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod boe;
mod error;
pub mod fusion;
pub mod mass;
pub mod metrics;

pub use boe::{
    build_boe, build_weight, scalar_dempster, BodyOfEvidence, ConfusionMatrix, ScoreMatrix,
    WeightScheme, WeightVector,
};
pub use error::{Error, Result};
pub use fusion::{
    fuse, fuse_dataset, FusionDiagnostics, FusionResult, FusionRule, PipelineConfig, SampleFusion,
};
pub use mass::{combine_many, FocalSet, Frame, MassFunction};
pub use metrics::{DisagreementConfig, DistanceWeighting};

/// Tolerance on the unit-sum constraint of a mass function.
pub const MASS_SUM_TOLERANCE: f64 = 1e-9;
