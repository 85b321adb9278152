//! Ground-truth scene simulator and recovery scoring.
//!
//! Agents move along timestamped piecewise-linear paths in overhead meters.
//! Each sample is mapped into the image with the inverse of the scene
//! homography, perturbed with seeded Gaussian pixel noise and written as an
//! ordinary detection record, so simulated clips go through the same entry
//! point as real ones.

mod scene;
mod score;

use std::io;

use thiserror::Error;

use crate::geometry::GeometryError;
use crate::ingest::ConfigError;

pub use scene::{
    simulate, spot_a_spec, write_truth_csv, AgentSpec, ClippedAgent, ContactMode, SceneSpec,
    Simulation, TruthRow, Waypoint,
};
pub use score::{compare_to_truth, AgentScore, RecoveryScore, ScoreParams};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("scene spec has no seed; simulation requires an explicit seed")]
    Unseeded,
    #[error("invalid scene spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("cannot read scene spec: {0}")]
    Io(#[from] io::Error),
    #[error("scene spec: {0}")]
    Parse(#[from] serde_json::Error),
}
