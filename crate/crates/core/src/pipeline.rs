//! Per-clip orchestration: detections → contact points → overhead points →
//! tracks → features, with record counts for every stage.

use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::features::{extract_features, FeatureParams, FeatureTable};
use crate::geometry::{contact_point, ContactSource};
use crate::ingest::{parse_detections, resample, FrameSeq, IngestError, RejectedLine, SceneConfig};
use crate::tracking::{build_tracks, OverheadFrame, OverheadObject, Track, TrackingParams};

/// Record counts per stage. Every count out of a stage is accounted for by
/// the counts into the next one; see [`StageCounts::reconcile`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCounts {
    pub lines: usize,
    pub lines_rejected: usize,
    pub detections_accepted: usize,
    pub frames_in: usize,
    pub frames_out: usize,
    pub detections_resampled: usize,
    pub detections_skipped_by_stride: usize,
    pub contact_precomputed: usize,
    pub contact_mask: usize,
    pub contact_bbox: usize,
    pub contact_bbox_no_lane_axis: usize,
    pub projected: usize,
    pub discarded_at_infinity: usize,
    pub tracks: usize,
    pub track_points: usize,
    pub feature_records: usize,
}

impl StageCounts {
    /// Checks that no stage lost records silently. Returns the first
    /// violated identity.
    pub fn reconcile(&self) -> Result<(), String> {
        let checks = [
            (
                "lines = accepted + rejected",
                self.lines == self.detections_accepted + self.lines_rejected,
            ),
            (
                "accepted = resampled + skipped by stride",
                self.detections_accepted
                    == self.detections_resampled + self.detections_skipped_by_stride,
            ),
            (
                "resampled = sum of contact sources",
                self.detections_resampled
                    == self.contact_precomputed
                        + self.contact_mask
                        + self.contact_bbox
                        + self.contact_bbox_no_lane_axis,
            ),
            (
                "resampled = projected + discarded",
                self.detections_resampled == self.projected + self.discarded_at_infinity,
            ),
            (
                "projected = track points",
                self.projected == self.track_points,
            ),
            (
                "feature records = track points - tracks",
                self.feature_records + self.tracks == self.track_points,
            ),
        ];
        match checks.iter().find(|(_, ok)| !ok) {
            Some((name, _)) => Err(format!("stage counts do not reconcile: {name}")),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ClipOutput {
    pub clip_id: String,
    pub frames: Vec<OverheadFrame>,
    pub tracks: Vec<Track>,
    pub features: FeatureTable,
    pub rejected: Vec<RejectedLine>,
    pub counts: StageCounts,
}

/// Contact point and projection for every detection of a resampled clip.
///
/// Detections whose contact point maps to infinity are dropped and counted.
pub fn project_frames(
    frames: &FrameSeq,
    cfg: &SceneConfig,
    counts: &mut StageCounts,
) -> Vec<OverheadFrame> {
    let h = cfg.homography();
    frames
        .frames
        .iter()
        .map(|f| {
            let mut objects = Vec::with_capacity(f.detections.len());
            for d in &f.detections {
                let c = contact_point(d, &cfg.lane_axes, cfg.vehicle_lead_fraction);
                *match c.source {
                    ContactSource::Precomputed => &mut counts.contact_precomputed,
                    ContactSource::Mask => &mut counts.contact_mask,
                    ContactSource::Bbox => &mut counts.contact_bbox,
                    ContactSource::BboxNoLaneAxis => &mut counts.contact_bbox_no_lane_axis,
                } += 1;
                match h.project(c.point) {
                    Ok(point) => {
                        counts.projected += 1;
                        objects.push(OverheadObject {
                            class: d.class,
                            point,
                            source: c.source,
                        });
                    }
                    Err(_) => counts.discarded_at_infinity += 1,
                }
            }
            OverheadFrame {
                index: f.index,
                objects,
            }
        })
        .collect()
}

/// Resamples, projects, tracks and extracts features from parsed frames.
pub fn process_frames(
    clip_id: &str,
    raw: &FrameSeq,
    cfg: &SceneConfig,
    counts: &mut StageCounts,
) -> (Vec<OverheadFrame>, Vec<Track>, FeatureTable) {
    counts.frames_in = raw.frames.len();
    let sampled = resample(raw, cfg.stride);
    counts.frames_out = sampled.frames.len();
    counts.detections_resampled = sampled.detection_count();
    counts.detections_skipped_by_stride = raw.detection_count() - counts.detections_resampled;

    let frames = project_frames(&sampled, cfg, counts);
    let mut params = TrackingParams::from_config(cfg);
    params.frame_step = sampled.stride;
    let tracks = build_tracks(&frames, &params);
    counts.tracks = tracks.len();
    counts.track_points = tracks.iter().map(Track::len).sum();

    let features = extract_features(clip_id, &tracks, &frames, &FeatureParams::from_config(cfg));
    counts.feature_records = features.len();
    (frames, tracks, features)
}

/// Full extraction for one clip read from detection JSONL.
///
/// Fails on I/O errors, frame-order violations and when the share of
/// rejected lines exceeds the configured limit.
pub fn run_clip<R: BufRead>(
    clip_id: &str,
    reader: R,
    cfg: &SceneConfig,
) -> Result<ClipOutput, IngestError> {
    let parsed = parse_detections(reader, cfg)?;
    parsed.ensure_quality(cfg.max_reject_fraction)?;
    let mut counts = StageCounts {
        lines: parsed.total_lines(),
        lines_rejected: parsed.rejected.len(),
        detections_accepted: parsed.accepted,
        ..StageCounts::default()
    };
    let (frames, tracks, features) = process_frames(clip_id, &parsed.frames, cfg, &mut counts);
    Ok(ClipOutput {
        clip_id: clip_id.to_string(),
        frames,
        tracks,
        features,
        rejected: parsed.rejected,
        counts,
    })
}
