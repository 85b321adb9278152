//! Detection JSON Lines wire format.
//!
//! One record per line:
//! `{"frame": int, "class": "vehicle"|"pedestrian", "score": float,
//!   "bbox": [x_min, y_min, x_max, y_max], "mask": [[x, y], ...], "contact": [x, y]}`
//! with `mask` and `contact` optional.

use std::fmt;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{BBox, Detection, Frame, FrameSeq, ObjectClass, SceneConfig, MASK_BBOX_SLACK_PX};
use crate::geometry::ImagePoint;

pub const DEFAULT_MAX_REJECT_FRACTION: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub frame: u64,
    pub class: ObjectClass,
    pub score: f64,
    pub bbox: [f64; 4],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contact: Option<[f64; 2]>,
}

impl DetectionRecord {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("detection record serializes")
    }

    /// Validates the record against frame bounds and the detection invariants.
    pub fn validate(&self, frame_width: f64, frame_height: f64) -> Result<Detection, RejectReason> {
        let [x0, y0, x1, y1] = self.bbox;
        let all_coords = self
            .bbox
            .iter()
            .chain(self.mask.iter().flatten().flatten())
            .chain(self.contact.iter().flatten());
        if all_coords.clone().any(|v| !v.is_finite()) || !self.score.is_finite() {
            return Err(RejectReason::NonFinite);
        }
        if !(0.0..=1.0).contains(&self.score) {
            return Err(RejectReason::Score(self.score));
        }
        if !(x0 < x1 && y0 < y1) {
            return Err(RejectReason::DegenerateBbox);
        }
        let in_frame =
            |x: f64, y: f64| (0.0..=frame_width).contains(&x) && (0.0..=frame_height).contains(&y);
        if !(in_frame(x0, y0) && in_frame(x1, y1)) {
            return Err(RejectReason::BboxOutsideFrame);
        }
        let bbox = BBox::from(self.bbox);

        let mask = match self.mask.as_deref() {
            None | Some([]) => None,
            Some(m) if m.len() < 3 => return Err(RejectReason::MaskTooSmall(m.len())),
            Some(m) => {
                let pts: Vec<ImagePoint> = m.iter().copied().map(ImagePoint::from).collect();
                if let Some(i) = pts
                    .iter()
                    .position(|p| !bbox.contains_with_slack(p, MASK_BBOX_SLACK_PX))
                {
                    return Err(RejectReason::MaskOutsideBbox(i));
                }
                Some(pts)
            }
        };
        let contact = match self.contact {
            Some([x, y]) if !in_frame(x, y) => return Err(RejectReason::ContactOutsideFrame),
            c => c.map(ImagePoint::from),
        };

        Ok(Detection {
            frame_index: self.frame,
            class: self.class,
            score: self.score,
            bbox,
            mask,
            contact,
        })
    }
}

impl From<&Detection> for DetectionRecord {
    fn from(d: &Detection) -> Self {
        Self {
            frame: d.frame_index,
            class: d.class,
            score: d.score,
            bbox: d.bbox.into(),
            mask: d
                .mask
                .as_ref()
                .map(|m| m.iter().map(|&p| p.into()).collect()),
            contact: d.contact.map(Into::into),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RejectReason {
    Malformed(String),
    NonFinite,
    Score(f64),
    DegenerateBbox,
    BboxOutsideFrame,
    MaskTooSmall(usize),
    MaskOutsideBbox(usize),
    ContactOutsideFrame,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectReason::Malformed(e) => write!(f, "malformed record: {e}"),
            RejectReason::NonFinite => f.write_str("non-finite value"),
            RejectReason::Score(s) => write!(f, "score {s} outside [0, 1]"),
            RejectReason::DegenerateBbox => f.write_str("degenerate bbox"),
            RejectReason::BboxOutsideFrame => f.write_str("bbox outside frame"),
            RejectReason::MaskTooSmall(n) => write!(f, "mask has {n} vertices (need at least 3)"),
            RejectReason::MaskOutsideBbox(i) => write!(f, "mask vertex {i} outside bbox"),
            RejectReason::ContactOutsideFrame => f.write_str("contact point outside frame"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RejectedLine {
    /// 1-based line number.
    pub line: usize,
    pub reason: RejectReason,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("i/o error reading detections: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: frame index {frame} precedes frame {previous}")]
    FrameRegression {
        line: usize,
        frame: u64,
        previous: u64,
    },
    #[error("{rejected} of {total} detection lines rejected (limit {limit:.0}%)")]
    TooManyRejected {
        rejected: usize,
        total: usize,
        limit: f64,
    },
}

#[derive(Debug, Clone)]
pub struct ParseOutcome {
    pub frames: FrameSeq,
    pub accepted: usize,
    pub rejected: Vec<RejectedLine>,
    /// Accepted detections with neither mask nor contact point.
    pub bbox_fallbacks: usize,
}

impl ParseOutcome {
    pub fn total_lines(&self) -> usize {
        self.accepted + self.rejected.len()
    }

    pub fn reject_fraction(&self) -> f64 {
        match self.total_lines() {
            0 => 0.0,
            n => self.rejected.len() as f64 / n as f64,
        }
    }

    /// Fails when strictly more than `max_fraction` of the lines were rejected.
    pub fn ensure_quality(&self, max_fraction: f64) -> Result<(), IngestError> {
        if self.reject_fraction() > max_fraction {
            return Err(IngestError::TooManyRejected {
                rejected: self.rejected.len(),
                total: self.total_lines(),
                limit: max_fraction * 100.0,
            });
        }
        Ok(())
    }
}

/// Reads detection JSONL, grouping accepted records by frame.
///
/// Bad records are collected with their line numbers and never abort the
/// parse; blank lines are skipped. A frame index lower than an earlier one is
/// fatal.
pub fn parse_detections<R: BufRead>(
    reader: R,
    cfg: &SceneConfig,
) -> Result<ParseOutcome, IngestError> {
    let mut frames = FrameSeq::new(cfg.source_fps);
    let mut rejected = Vec::new();
    let mut accepted = 0;
    let mut bbox_fallbacks = 0;
    let mut previous: Option<u64> = None;

    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: DetectionRecord = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => {
                rejected.push(RejectedLine {
                    line: line_no,
                    reason: RejectReason::Malformed(e.to_string()),
                });
                continue;
            }
        };
        if let Some(prev) = previous {
            if record.frame < prev {
                return Err(IngestError::FrameRegression {
                    line: line_no,
                    frame: record.frame,
                    previous: prev,
                });
            }
        }
        previous = Some(record.frame);

        match record.validate(cfg.frame_width, cfg.frame_height) {
            Ok(d) => {
                accepted += 1;
                bbox_fallbacks += usize::from(d.bbox_fallback());
                match frames.frames.last_mut() {
                    Some(f) if f.index == d.frame_index => f.detections.push(d),
                    _ => frames.frames.push(Frame {
                        index: d.frame_index,
                        detections: vec![d],
                    }),
                }
            }
            Err(reason) => rejected.push(RejectedLine {
                line: line_no,
                reason,
            }),
        }
    }

    Ok(ParseOutcome {
        frames,
        accepted,
        rejected,
        bbox_fallbacks,
    })
}

/// Writes every detection of `frames` as JSONL.
pub fn write_detections<W: Write>(mut w: W, frames: &FrameSeq) -> io::Result<()> {
    for d in frames.frames.iter().flat_map(|f| &f.detections) {
        writeln!(w, "{}", DetectionRecord::from(d).to_json_line())?;
    }
    Ok(())
}
