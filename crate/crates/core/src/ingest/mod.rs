//! Detection streams, scene configuration and frame resampling.

pub(crate) mod config;
mod wire;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geometry::ImagePoint;

pub use config::{ConfigError, SceneConfig, SceneConfigFile, Thresholds};
pub use wire::{
    parse_detections, write_detections, DetectionRecord, IngestError, ParseOutcome, RejectReason,
    RejectedLine, DEFAULT_MAX_REJECT_FRACTION,
};

/// Mask vertices may stick out of the bbox by at most this many pixels.
pub const MASK_BBOX_SLACK_PX: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectClass {
    Vehicle,
    Pedestrian,
}

impl ObjectClass {
    pub const ALL: [ObjectClass; 2] = [ObjectClass::Vehicle, ObjectClass::Pedestrian];

    pub fn opposite(self) -> Self {
        match self {
            ObjectClass::Vehicle => ObjectClass::Pedestrian,
            ObjectClass::Pedestrian => ObjectClass::Vehicle,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ObjectClass::Vehicle => "vehicle",
            ObjectClass::Pedestrian => "pedestrian",
        }
    }
}

impl fmt::Display for ObjectClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Axis-aligned box in image pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl From<[f64; 4]> for BBox {
    fn from(b: [f64; 4]) -> Self {
        Self {
            x_min: b[0],
            y_min: b[1],
            x_max: b[2],
            y_max: b[3],
        }
    }
}

impl From<BBox> for [f64; 4] {
    fn from(b: BBox) -> Self {
        [b.x_min, b.y_min, b.x_max, b.y_max]
    }
}

impl BBox {
    pub fn center_x(&self) -> f64 {
        (self.x_min + self.x_max) / 2.0
    }

    pub fn bottom_center(&self) -> ImagePoint {
        ImagePoint::new(self.center_x(), self.y_max)
    }

    pub fn contains_with_slack(&self, p: &ImagePoint, slack: f64) -> bool {
        p.x >= self.x_min - slack
            && p.x <= self.x_max + slack
            && p.y >= self.y_min - slack
            && p.y <= self.y_max + slack
    }
}

/// One validated detection in one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub frame_index: u64,
    pub class: ObjectClass,
    pub score: f64,
    pub bbox: BBox,
    pub mask: Option<Vec<ImagePoint>>,
    pub contact: Option<ImagePoint>,
}

impl Detection {
    /// Neither mask nor contact point: geometry will use the bbox.
    pub fn bbox_fallback(&self) -> bool {
        self.mask.is_none() && self.contact.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub index: u64,
    pub detections: Vec<Detection>,
}

/// Frames in strictly increasing index order.
///
/// `stride` is the index step of the sampling grid: 1 for a raw stream, the
/// resampling step afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSeq {
    pub frames: Vec<Frame>,
    pub source_fps: f64,
    pub stride: u64,
}

impl FrameSeq {
    pub fn new(source_fps: f64) -> Self {
        Self {
            frames: Vec::new(),
            source_fps,
            stride: 1,
        }
    }

    pub fn detection_count(&self) -> usize {
        self.frames.iter().map(|f| f.detections.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Keeps frames whose index is congruent to the first index modulo `stride`.
///
/// The result is laid out on a regular grid from the first to the last kept
/// index: grid positions with no detections are present as empty frames, so
/// consecutive indices always differ by exactly the resulting stride
/// (`lcm(frames.stride, stride)`). Applying the same stride twice is a no-op.
pub fn resample(frames: &FrameSeq, stride: u64) -> FrameSeq {
    assert!(stride >= 1, "stride must be positive");
    let step = frames.stride / gcd(frames.stride, stride) * stride;
    let mut out = FrameSeq {
        frames: Vec::new(),
        source_fps: frames.source_fps,
        stride: step,
    };
    let Some(first) = frames.frames.first().map(|f| f.index) else {
        return out;
    };
    let kept = frames
        .frames
        .iter()
        .filter(|f| (f.index - first) % step == 0);
    let mut next = first;
    for f in kept {
        while next < f.index {
            out.frames.push(Frame {
                index: next,
                detections: Vec::new(),
            });
            next += step;
        }
        out.frames.push(f.clone());
        next = f.index + step;
    }
    out
}
