//! Sparse regular variation toolkit.
//!
//! Euclidean projection onto the positive sphere (sort-based and randomized
//! pivot algorithms), angular laws `Z = pi(Y Theta)` with Monte-Carlo face
//! estimators, seeded simulation designs, extremal direction detection with a
//! DAMEX baseline, and a replication harness.

pub mod angular;
pub mod datagen;
pub mod detection;
pub mod direction;
pub mod error;
pub mod experiments;
pub mod io;
pub mod projection;
pub mod rng;
pub mod stats;

pub use angular::{AngularEstimate, AngularLaw, McEstimate, SpectralModel};
pub use datagen::{GroundTruth, SampleMatrix};
pub use detection::{damex, detect, DetectionConfig, DetectionReport, ErrorCounts};
pub use direction::Direction;
pub use error::{Error, Result};
pub use experiments::{ExperimentConfig, Scale, TableResult};
pub use projection::{
    project_median, project_sorted, support, NonnegVector, ProjectionDiagnostics, SimplexPoint,
};
