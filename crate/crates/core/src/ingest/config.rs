//! Scene (camera and site) configuration.
//!
//! The file is a single JSON document. Only measured inputs are stored; the
//! frame interval `F = stride / fps`, the overhead scale
//! `P = crosswalk_px / crosswalk_m` and the homography are derived at load.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::wire::DEFAULT_MAX_REJECT_FRACTION;
use crate::geometry::{AnchorPair, GeometryError, Homography, LaneAxis, DEFAULT_LEAD_FRACTION};
use crate::stats::OutlierBounds;

/// Per-step association gates in overhead meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub vehicle_m: f64,
    pub pedestrian_m: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            vehicle_m: 12.0,
            pedestrian_m: 2.0,
        }
    }
}

fn default_frame_width() -> f64 {
    1280.0
}

fn default_frame_height() -> f64 {
    720.0
}

fn default_lead_fraction() -> f64 {
    DEFAULT_LEAD_FRACTION
}

fn default_max_reject_fraction() -> f64 {
    DEFAULT_MAX_REJECT_FRACTION
}

/// On-disk layout of the scene configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneConfigFile {
    #[serde(default = "default_frame_width")]
    pub frame_width: f64,
    #[serde(default = "default_frame_height")]
    pub frame_height: f64,
    pub fps: f64,
    pub stride: i64,
    pub anchors: Vec<AnchorPair>,
    pub crosswalk_px: f64,
    pub crosswalk_m: f64,
    pub speed_limit_kmh: f64,
    pub thresholds: Thresholds,
    pub outlier_bounds: OutlierBounds,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lane_axes: Vec<LaneAxis>,
    #[serde(default = "default_lead_fraction")]
    pub vehicle_lead_fraction: f64,
    #[serde(default = "default_max_reject_fraction")]
    pub max_reject_fraction: f64,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read scene config {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("scene config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("scene config field `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("scene config field `anchors`: {0}")]
    Anchors(#[from] GeometryError),
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        reason: reason.into(),
    }
}

fn positive(field: &'static str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(invalid(
            field,
            format!("must be a positive number, got {v}"),
        ))
    }
}

/// Validated scene configuration with its derived homography.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneConfig {
    pub frame_width: f64,
    pub frame_height: f64,
    pub source_fps: f64,
    pub stride: u64,
    pub anchors: [AnchorPair; 4],
    pub crosswalk_px: f64,
    pub crosswalk_m: f64,
    pub speed_limit_kmh: f64,
    pub thresholds: Thresholds,
    pub outlier_bounds: OutlierBounds,
    pub lane_axes: Vec<LaneAxis>,
    pub vehicle_lead_fraction: f64,
    pub max_reject_fraction: f64,
    homography: Homography,
}

impl SceneConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Self::from_file(serde_json::from_str(text)?)
    }

    pub fn from_file(f: SceneConfigFile) -> Result<Self, ConfigError> {
        let source_fps = positive("fps", f.fps)?;
        if f.stride < 1 {
            return Err(invalid(
                "stride",
                format!("must be a positive integer, got {}", f.stride),
            ));
        }
        let anchors: [AnchorPair; 4] = f.anchors.as_slice().try_into().map_err(|_| {
            invalid(
                "anchors",
                format!("exactly 4 anchor pairs required, got {}", f.anchors.len()),
            )
        })?;
        let homography = Homography::estimate(&anchors)?;
        positive("frame_width", f.frame_width)?;
        positive("frame_height", f.frame_height)?;
        positive("crosswalk_px", f.crosswalk_px)?;
        positive("crosswalk_m", f.crosswalk_m)?;
        positive("speed_limit_kmh", f.speed_limit_kmh)?;
        positive("thresholds.vehicle_m", f.thresholds.vehicle_m)?;
        positive("thresholds.pedestrian_m", f.thresholds.pedestrian_m)?;
        f.outlier_bounds
            .validate()
            .map_err(|reason| invalid("outlier_bounds", reason))?;
        if !(0.0..=1.0).contains(&f.vehicle_lead_fraction) || f.vehicle_lead_fraction == 0.0 {
            return Err(invalid("vehicle_lead_fraction", "must lie in (0, 1]"));
        }
        if !(0.0..=1.0).contains(&f.max_reject_fraction) {
            return Err(invalid("max_reject_fraction", "must lie in [0, 1]"));
        }
        if f.lane_axes
            .iter()
            .any(|a| a.from.distance(&a.to) == 0.0 || !a.from.is_finite() || !a.to.is_finite())
        {
            return Err(invalid(
                "lane_axes",
                "each axis needs two distinct finite points",
            ));
        }

        Ok(Self {
            frame_width: f.frame_width,
            frame_height: f.frame_height,
            source_fps,
            stride: f.stride as u64,
            anchors,
            crosswalk_px: f.crosswalk_px,
            crosswalk_m: f.crosswalk_m,
            speed_limit_kmh: f.speed_limit_kmh,
            thresholds: f.thresholds,
            outlier_bounds: f.outlier_bounds,
            lane_axes: f.lane_axes,
            vehicle_lead_fraction: f.vehicle_lead_fraction,
            max_reject_fraction: f.max_reject_fraction,
            homography,
        })
    }

    pub fn to_file(&self) -> SceneConfigFile {
        SceneConfigFile {
            frame_width: self.frame_width,
            frame_height: self.frame_height,
            fps: self.source_fps,
            stride: self.stride as i64,
            anchors: self.anchors.to_vec(),
            crosswalk_px: self.crosswalk_px,
            crosswalk_m: self.crosswalk_m,
            speed_limit_kmh: self.speed_limit_kmh,
            thresholds: self.thresholds,
            outlier_bounds: self.outlier_bounds,
            lane_axes: self.lane_axes.clone(),
            vehicle_lead_fraction: self.vehicle_lead_fraction,
            max_reject_fraction: self.max_reject_fraction,
        }
    }

    /// Same scene sampled with a different stride.
    pub fn with_stride(&self, stride: u64) -> Result<Self, ConfigError> {
        let mut f = self.to_file();
        f.stride = i64::try_from(stride).map_err(|_| invalid("stride", "too large"))?;
        Self::from_file(f)
    }

    /// Seconds between consecutive retained frames (`F`).
    pub fn frame_interval(&self) -> f64 {
        self.stride as f64 / self.source_fps
    }

    /// Overhead pixels per meter (`P`).
    pub fn pixels_per_meter(&self) -> f64 {
        self.crosswalk_px / self.crosswalk_m
    }

    /// Image → overhead mapping fitted to the four anchors.
    pub fn homography(&self) -> &Homography {
        &self.homography
    }
}
