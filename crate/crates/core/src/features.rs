//! Behavioral features per track step: speed, vehicle acceleration and the
//! distance to the nearest object of the opposite class.
//!
//! Values are left-aligned: a record at frame `f` describes the step from `f`
//! to the next sampled frame. Acceleration is reported in km/h per second.

use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::geometry::OverheadPoint;
use crate::ingest::{ObjectClass, SceneConfig};
use crate::tracking::{OverheadFrame, Track, TrackId};
use crate::MPS_TO_KMH;

/// Speed between two consecutive sampled points, in km/h.
///
/// `frame_interval` is seconds between the samples, `pixels_per_meter` the
/// overhead scale.
pub fn speed(
    p0: OverheadPoint,
    p1: OverheadPoint,
    frame_interval: f64,
    pixels_per_meter: f64,
) -> f64 {
    speed_mps(p0, p1, frame_interval, pixels_per_meter) * MPS_TO_KMH
}

fn speed_mps(
    p0: OverheadPoint,
    p1: OverheadPoint,
    frame_interval: f64,
    pixels_per_meter: f64,
) -> f64 {
    p0.distance(&p1) / (frame_interval * pixels_per_meter)
}

/// Acceleration from consecutive step speeds `v0`, `v` (m/s), in km/h per second.
pub fn acceleration(v0: f64, v: f64, frame_interval: f64) -> f64 {
    (v - v0) / frame_interval * MPS_TO_KMH
}

/// Meters to the closest of `others`; `None` when there are none.
pub fn nearest_opposite_distance(
    subject: OverheadPoint,
    others: &[OverheadPoint],
    pixels_per_meter: f64,
) -> Option<f64> {
    others
        .iter()
        .map(|o| subject.distance(o))
        .min_by(f64::total_cmp)
        .map(|d| d / pixels_per_meter)
}

/// One row of the feature table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRecord {
    pub clip_id: String,
    pub frame: u64,
    pub track_id: TrackId,
    pub class: ObjectClass,
    pub speed_kmh: f64,
    /// Vehicles only, when the following step exists.
    pub accel_kmh_per_s: Option<f64>,
    pub dist_m: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureTable {
    pub rows: Vec<FeatureRecord>,
}

impl FeatureTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> io::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        if self.rows.is_empty() {
            out.write_record([
                "clip_id",
                "frame",
                "track_id",
                "class",
                "speed_kmh",
                "accel_kmh_per_s",
                "dist_m",
            ])?;
        }
        for r in &self.rows {
            out.serialize(r)?;
        }
        out.flush()
    }

    pub fn read_csv<R: io::Read>(r: R) -> csv::Result<Self> {
        let rows = csv::Reader::from_reader(r)
            .deserialize()
            .collect::<csv::Result<_>>()?;
        Ok(Self { rows })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureParams {
    pub frame_interval: f64,
    pub pixels_per_meter: f64,
}

impl FeatureParams {
    pub fn from_config(cfg: &SceneConfig) -> Self {
        Self {
            frame_interval: cfg.frame_interval(),
            pixels_per_meter: cfg.pixels_per_meter(),
        }
    }
}

/// Builds the feature table for one clip.
///
/// Each track of n points yields n − 1 records. Distances are measured
/// against every projected object of the opposite class in the record's
/// frame, tracked or not. Rows are ordered by (frame, track id).
pub fn extract_features(
    clip_id: &str,
    tracks: &[Track],
    frames: &[OverheadFrame],
    params: &FeatureParams,
) -> FeatureTable {
    let by_frame: BTreeMap<u64, &OverheadFrame> = frames.iter().map(|f| (f.index, f)).collect();
    let FeatureParams {
        frame_interval: f,
        pixels_per_meter: p,
    } = *params;

    let mut rows = Vec::new();
    for t in tracks {
        let steps: Vec<f64> = t
            .points
            .windows(2)
            .map(|w| speed_mps(w[0].point, w[1].point, f, p))
            .collect();
        for (i, v) in steps.iter().enumerate() {
            let at = t.points[i];
            let accel = match (t.class, steps.get(i + 1)) {
                (ObjectClass::Vehicle, Some(&next)) => Some(acceleration(*v, next, f)),
                _ => None,
            };
            let others: Vec<OverheadPoint> = by_frame
                .get(&at.frame)
                .map(|fr| {
                    fr.objects
                        .iter()
                        .filter(|o| o.class == t.class.opposite())
                        .map(|o| o.point)
                        .collect()
                })
                .unwrap_or_default();
            rows.push(FeatureRecord {
                clip_id: clip_id.to_string(),
                frame: at.frame,
                track_id: t.id,
                class: t.class,
                speed_kmh: v * MPS_TO_KMH,
                accel_kmh_per_s: accel,
                dist_m: nearest_opposite_distance(at.point, &others, p),
            });
        }
    }
    rows.sort_by_key(|r| (r.frame, r.track_id));
    FeatureTable { rows }
}
