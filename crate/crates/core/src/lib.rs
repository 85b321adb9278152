//! Crosswalk risk analytics.
//!
//! Turns per-frame detections from an oblique CCTV camera into overhead,
//! metric trajectories, extracts behavioral features (speed, acceleration,
//! vehicle–pedestrian distance) and summarizes them with histograms,
//! boxplots and Pearson correlation matrices.
//!
//! The pipeline stages map onto modules:
//!
//! - [`ingest`]: scene configuration, detection JSONL parsing, frame resampling
//! - [`geometry`]: ground contact points and the four-anchor homography
//! - [`tracking`]: greedy minimum-distance association into tracks
//! - [`features`]: per-step speed, acceleration and nearest-opposite distance
//! - [`stats`]: outlier filtering, normalization, histograms, boxplots, correlation
//! - [`synthetic`]: ground-truth scene simulator and recovery scoring
//! - [`pipeline`] and [`cli`]: orchestration and the command-line front end

pub mod cli;
pub mod features;
pub mod geometry;
pub mod ingest;
pub mod pipeline;
pub mod stats;
pub mod synthetic;
pub mod tracking;

pub use features::{FeatureRecord, FeatureTable};
pub use geometry::{Homography, ImagePoint, OverheadPoint};
pub use ingest::{Detection, FrameSeq, ObjectClass, SceneConfig};
pub use tracking::Track;

/// Conversion factor from m/s to km/h.
pub const MPS_TO_KMH: f64 = 3.6;
