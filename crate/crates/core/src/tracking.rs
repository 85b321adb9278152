//! Frame-to-frame association of overhead contact points into tracks.
//!
//! Association is a greedy global minimum: among all (track, detection) pairs
//! of one class, the closest pair within the gate is linked first, then the
//! next closest among the remaining ones, and so on. Tracks left unmatched
//! terminate immediately; unmatched detections start new tracks.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::geometry::{ContactSource, OverheadPoint};
use crate::ingest::{ObjectClass, SceneConfig};

pub type TrackId = u64;

/// One projected detection in a sampled frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverheadObject {
    pub class: ObjectClass,
    pub point: OverheadPoint,
    pub source: ContactSource,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OverheadFrame {
    pub index: u64,
    pub objects: Vec<OverheadObject>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrackStatus {
    Active,
    Terminated,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackPoint {
    pub frame: u64,
    pub point: OverheadPoint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub id: TrackId,
    pub class: ObjectClass,
    pub points: Vec<TrackPoint>,
    pub status: TrackStatus,
}

impl Track {
    pub fn head(&self) -> TrackHead {
        TrackHead {
            id: self.id,
            point: self.points.last().expect("tracks are never empty").point,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point_at(&self, frame: u64) -> Option<OverheadPoint> {
        self.points
            .binary_search_by_key(&frame, |p| p.frame)
            .ok()
            .map(|i| self.points[i].point)
    }
}

/// Last known position of an active track.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackHead {
    pub id: TrackId,
    pub point: OverheadPoint,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchedPair {
    pub track: TrackId,
    pub detection: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Matching {
    /// In acceptance order, so distances are non-decreasing.
    pub pairs: Vec<MatchedPair>,
    pub unmatched_tracks: Vec<TrackId>,
    pub unmatched_detections: Vec<usize>,
}

/// Greedy globally-minimal matching of track heads to detections.
///
/// `max_distance` is in the same unit as the points. Ties in distance go to
/// the lower track id, then the lower detection index.
pub fn associate(prev: &[TrackHead], next: &[OverheadPoint], max_distance: f64) -> Matching {
    let mut candidates: Vec<MatchedPair> = prev
        .iter()
        .flat_map(|h| {
            next.iter().enumerate().map(move |(j, p)| MatchedPair {
                track: h.id,
                detection: j,
                distance: h.point.distance(p),
            })
        })
        .filter(|c| c.distance <= max_distance)
        .collect();
    candidates.sort_by(|a, b| {
        a.distance
            .total_cmp(&b.distance)
            .then(a.track.cmp(&b.track))
            .then(a.detection.cmp(&b.detection))
    });

    let mut track_used: Vec<TrackId> = Vec::new();
    let mut det_used = vec![false; next.len()];
    let mut pairs = Vec::new();
    for c in candidates {
        if det_used[c.detection] || track_used.contains(&c.track) {
            continue;
        }
        det_used[c.detection] = true;
        track_used.push(c.track);
        pairs.push(c);
    }

    Matching {
        unmatched_tracks: prev
            .iter()
            .map(|h| h.id)
            .filter(|id| !track_used.contains(id))
            .collect(),
        unmatched_detections: (0..next.len()).filter(|&j| !det_used[j]).collect(),
        pairs,
    }
}

/// Parameters for [`build_tracks`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingParams {
    pub vehicle_threshold_m: f64,
    pub pedestrian_threshold_m: f64,
    pub pixels_per_meter: f64,
    /// Expected index difference between consecutive sampled frames.
    pub frame_step: u64,
}

impl TrackingParams {
    pub fn from_config(cfg: &SceneConfig) -> Self {
        Self {
            vehicle_threshold_m: cfg.thresholds.vehicle_m,
            pedestrian_threshold_m: cfg.thresholds.pedestrian_m,
            pixels_per_meter: cfg.pixels_per_meter(),
            frame_step: cfg.stride,
        }
    }

    /// Gate in overhead pixels.
    pub fn max_step_px(&self, class: ObjectClass) -> f64 {
        let m = match class {
            ObjectClass::Vehicle => self.vehicle_threshold_m,
            ObjectClass::Pedestrian => self.pedestrian_threshold_m,
        };
        m * self.pixels_per_meter
    }
}

/// Links consecutive sampled frames into tracks, class by class.
///
/// Frames must be in increasing index order. When two consecutive frames are
/// not exactly `frame_step` apart every active track is terminated first.
/// Ids are allocated from 1 in order of first appearance (vehicles before
/// pedestrians within a frame, then by detection order).
pub fn build_tracks(frames: &[OverheadFrame], params: &TrackingParams) -> Vec<Track> {
    let mut tracks: Vec<Track> = Vec::new();
    // indices into `tracks` of the active ones, per class
    let mut active: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    let mut next_id: TrackId = 1;
    let mut last_index: Option<u64> = None;

    for frame in frames {
        if last_index.is_some_and(|i| frame.index != i + params.frame_step) {
            for slot in active.iter_mut() {
                for t in slot.drain(..) {
                    tracks[t].status = TrackStatus::Terminated;
                }
            }
        }
        last_index = Some(frame.index);

        for (ci, class) in ObjectClass::ALL.into_iter().enumerate() {
            let points: Vec<OverheadPoint> = frame
                .objects
                .iter()
                .filter(|o| o.class == class)
                .map(|o| o.point)
                .collect();
            let heads: Vec<TrackHead> = active[ci].iter().map(|&t| tracks[t].head()).collect();
            let m = associate(&heads, &points, params.max_step_px(class));

            let mut still_active = Vec::with_capacity(points.len());
            for pair in &m.pairs {
                let t = active[ci]
                    .iter()
                    .copied()
                    .find(|&t| tracks[t].id == pair.track)
                    .expect("matched track is active");
                tracks[t].points.push(TrackPoint {
                    frame: frame.index,
                    point: points[pair.detection],
                });
                still_active.push(t);
            }
            for id in &m.unmatched_tracks {
                if let Some(&t) = active[ci].iter().find(|&&t| tracks[t].id == *id) {
                    tracks[t].status = TrackStatus::Terminated;
                }
            }
            for &j in &m.unmatched_detections {
                tracks.push(Track {
                    id: next_id,
                    class,
                    points: vec![TrackPoint {
                        frame: frame.index,
                        point: points[j],
                    }],
                    status: TrackStatus::Active,
                });
                next_id += 1;
                still_active.push(tracks.len() - 1);
            }
            active[ci] = still_active;
        }
    }
    tracks
}

/// One row of the track CSV (`clip_id, track_id, class, frame, x_m, y_m`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackRow {
    pub clip_id: String,
    pub track_id: TrackId,
    pub class: ObjectClass,
    pub frame: u64,
    pub x_m: f64,
    pub y_m: f64,
}

pub fn track_rows(clip_id: &str, tracks: &[Track], pixels_per_meter: f64) -> Vec<TrackRow> {
    tracks
        .iter()
        .flat_map(|t| {
            t.points.iter().map(move |p| {
                let (x_m, y_m) = p.point.to_meters(pixels_per_meter);
                TrackRow {
                    clip_id: clip_id.to_string(),
                    track_id: t.id,
                    class: t.class,
                    frame: p.frame,
                    x_m,
                    y_m,
                }
            })
        })
        .collect()
}

pub fn write_track_csv<W: Write>(w: W, rows: &[TrackRow]) -> io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    if rows.is_empty() {
        out.write_record(["clip_id", "track_id", "class", "frame", "x_m", "y_m"])?;
    }
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()
}

pub fn read_track_csv<R: io::Read>(r: R) -> csv::Result<Vec<TrackRow>> {
    csv::Reader::from_reader(r).deserialize().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn heads(pts: &[(f64, f64)]) -> Vec<TrackHead> {
        pts.iter()
            .enumerate()
            .map(|(i, &(x, y))| TrackHead {
                id: i as TrackId + 1,
                point: OverheadPoint::new(x, y),
            })
            .collect()
    }

    fn points(pts: &[(f64, f64)]) -> Vec<OverheadPoint> {
        pts.iter().map(|&(x, y)| OverheadPoint::new(x, y)).collect()
    }

    #[test]
    fn crossing_scenario_abc_to_de() {
        // A, B, C -> D, E with a 2.0 gate
        let m = associate(
            &heads(&[(0.0, 0.0), (3.0, 0.0), (6.0, 0.0)]),
            &points(&[(3.5, 1.0), (6.5, 1.0)]),
            2.0,
        );
        let pairs: Vec<(TrackId, usize)> = m.pairs.iter().map(|p| (p.track, p.detection)).collect();
        assert_eq!(pairs, vec![(2, 0), (3, 1)]);
        assert_eq!(m.unmatched_tracks, vec![1]);
        assert!(m.unmatched_detections.is_empty());
        assert!((m.pairs[0].distance - 1.25f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn empty_inputs() {
        let m = associate(&[], &points(&[(1.0, 1.0)]), 2.0);
        assert!(m.pairs.is_empty());
        assert_eq!(m.unmatched_detections, vec![0]);
        assert_eq!(associate(&[], &[], 2.0), Matching::default());
    }

    #[test]
    fn identical_point_matches_at_zero() {
        let m = associate(&heads(&[(4.0, 4.0)]), &points(&[(4.0, 4.0)]), 2.0);
        assert_eq!(m.pairs[0].distance, 0.0);
    }

    #[test]
    fn ties_prefer_lower_track_then_detection() {
        let m = associate(
            &heads(&[(0.0, 0.0), (2.0, 0.0)]),
            &points(&[(1.0, 0.0)]),
            2.0,
        );
        assert_eq!((m.pairs[0].track, m.pairs[0].detection), (1, 0));
        let m = associate(
            &heads(&[(0.0, 0.0)]),
            &points(&[(0.0, 1.0), (1.0, 0.0)]),
            2.0,
        );
        assert_eq!(m.pairs[0].detection, 0);
    }

    #[test]
    fn greedy_is_not_always_min_total() {
        // greedy links (1.9 -> 1.0) first and strands the other track
        let m = associate(
            &heads(&[(0.0, 0.0), (1.9, 0.0)]),
            &points(&[(1.0, 0.0), (3.0, 0.0)]),
            2.0,
        );
        assert_eq!(m.pairs.len(), 1);
        assert_eq!((m.pairs[0].track, m.pairs[0].detection), (2, 0));
    }

    fn line_frames(xs: &[f64], step: u64) -> Vec<OverheadFrame> {
        xs.iter()
            .enumerate()
            .map(|(i, &x)| OverheadFrame {
                index: i as u64 * step,
                objects: vec![OverheadObject {
                    class: ObjectClass::Pedestrian,
                    point: OverheadPoint::new(x, 0.0),
                    source: ContactSource::Precomputed,
                }],
            })
            .collect()
    }

    fn params() -> TrackingParams {
        TrackingParams {
            vehicle_threshold_m: 12.0,
            pedestrian_threshold_m: 2.0,
            pixels_per_meter: 1.0,
            frame_step: 5,
        }
    }

    #[test]
    fn straight_line_single_track() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64 * 1.5).collect();
        let tracks = build_tracks(&line_frames(&xs, 5), &params());
        assert_eq!(tracks.len(), 1);
        assert_eq!(tracks[0].len(), 10);
        assert_eq!(tracks[0].status, TrackStatus::Active);
    }

    #[test]
    fn large_step_splits_track() {
        let mut xs: Vec<f64> = (0..10).map(|i| i as f64 * 1.5).collect();
        for x in &mut xs[6..] {
            *x += 5.0;
        }
        let tracks = build_tracks(&line_frames(&xs, 5), &params());
        assert_eq!(tracks.len(), 2);
        assert_eq!((tracks[0].len(), tracks[1].len()), (6, 4));
        assert_eq!(tracks[0].status, TrackStatus::Terminated);
        assert_eq!(tracks[1].points[0].frame, 30);
    }

    #[test]
    fn frame_gap_terminates() {
        let mut frames = line_frames(&[0.0, 1.0, 2.0, 3.0], 5);
        frames[3].index = 20;
        let tracks = build_tracks(&frames, &params());
        assert_eq!(tracks.len(), 2);
    }

    #[test]
    fn classes_never_mix() {
        let frames = vec![
            OverheadFrame {
                index: 0,
                objects: vec![OverheadObject {
                    class: ObjectClass::Vehicle,
                    point: OverheadPoint::new(0.0, 0.0),
                    source: ContactSource::Mask,
                }],
            },
            OverheadFrame {
                index: 5,
                objects: vec![OverheadObject {
                    class: ObjectClass::Pedestrian,
                    point: OverheadPoint::new(0.0, 0.0),
                    source: ContactSource::Mask,
                }],
            },
        ];
        let tracks = build_tracks(&frames, &params());
        assert_eq!(tracks.len(), 2);
        assert_eq!(tracks[0].class, ObjectClass::Vehicle);
        assert_eq!(tracks[0].status, TrackStatus::Terminated);
        assert_eq!(tracks[1].class, ObjectClass::Pedestrian);
    }

    #[test]
    fn track_csv_round_trip() {
        let tracks = build_tracks(
            &line_frames(&[0.0, 64.0, 128.0], 5),
            &TrackingParams {
                pixels_per_meter: 64.0,
                ..params()
            },
        );
        let rows = track_rows("clip", &tracks, 64.0);
        let mut buf = Vec::new();
        write_track_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("clip_id,track_id,class,frame,x_m,y_m\n"));
        assert_eq!(read_track_csv(buf.as_slice()).unwrap(), rows);
        assert_eq!(rows[2].x_m, 2.0);
    }
}
