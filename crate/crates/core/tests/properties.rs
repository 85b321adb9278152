mod common;

use crosswalk::features::{nearest_opposite_distance, speed, FeatureRecord, FeatureTable};
use crosswalk::geometry::{pedestrian_contact_point, ContactSource};
use crosswalk::ingest::{
    parse_detections, resample, write_detections, BBox, Detection, Frame, FrameSeq,
};
use crosswalk::stats::{
    filter_outliers, histogram, minmax_normalize, pearson_matrix, quantile_sorted, OutlierBounds,
};
use crosswalk::tracking::{associate, TrackHead};
use crosswalk::{ImagePoint, ObjectClass, OverheadPoint};
use proptest::prelude::*;

fn seq_from(indices: &[u64]) -> FrameSeq {
    let mut idx = indices.to_vec();
    idx.sort_unstable();
    idx.dedup();
    FrameSeq {
        frames: idx
            .into_iter()
            .map(|i| Frame {
                index: i,
                detections: vec![Detection {
                    frame_index: i,
                    class: ObjectClass::Vehicle,
                    score: 0.5,
                    bbox: BBox::from([1.0, 1.0, 2.0, 2.0]),
                    mask: None,
                    contact: None,
                }],
            })
            .collect(),
        source_fps: 15.0,
        stride: 1,
    }
}

fn point() -> impl Strategy<Value = OverheadPoint> {
    (-100.0f64..100.0, -100.0f64..100.0).prop_map(|(x, y)| OverheadPoint::new(x, y))
}

proptest! {
    #[test]
    fn resample_is_idempotent_and_on_grid(indices in prop::collection::vec(0u64..200, 0..40), k in 1u64..7) {
        let s = seq_from(&indices);
        let once = resample(&s, k);
        prop_assert_eq!(&resample(&once, k), &once);
        for w in once.frames.windows(2) {
            prop_assert_eq!(w[1].index - w[0].index, k);
        }
        // every kept source frame survives unchanged
        if let Some(first) = s.frames.first() {
            for f in s.frames.iter().filter(|f| (f.index - first.index) % k == 0) {
                prop_assert!(once.frames.contains(f));
            }
        }
    }

    #[test]
    fn association_is_an_injective_gated_partition(
        tracks in prop::collection::vec(point(), 0..6),
        dets in prop::collection::vec(point(), 0..6),
        gate in 0.5f64..60.0,
    ) {
        let heads: Vec<TrackHead> = tracks.iter().enumerate().map(|(i, &p)| TrackHead { id: i as u64 + 10, point: p }).collect();
        let m = associate(&heads, &dets, gate);
        let mut seen_t = std::collections::HashSet::new();
        let mut seen_d = std::collections::HashSet::new();
        for p in &m.pairs {
            prop_assert!(seen_t.insert(p.track));
            prop_assert!(seen_d.insert(p.detection));
            prop_assert!(p.distance <= gate);
        }
        prop_assert_eq!(m.pairs.len() + m.unmatched_tracks.len(), heads.len());
        prop_assert_eq!(m.pairs.len() + m.unmatched_detections.len(), dets.len());
        for w in m.pairs.windows(2) {
            prop_assert!(w[0].distance <= w[1].distance);
        }
        // no unmatched pair could still be linked
        for t in &m.unmatched_tracks {
            let h = heads.iter().find(|h| h.id == *t).unwrap();
            for &j in &m.unmatched_detections {
                prop_assert!(h.point.distance(&dets[j]) > gate);
            }
        }
    }

    #[test]
    fn greedy_equals_exhaustive_on_separated_scenes(seed in any::<u64>()) {
        let gate = 2.0;
        let (heads, dets) = common::separated_scene(seed, gate);
        let m = associate(&heads, &dets, gate);
        let mut greedy: Vec<(usize, usize)> = m
            .pairs
            .iter()
            .map(|p| (heads.iter().position(|h| h.id == p.track).unwrap(), p.detection))
            .collect();
        greedy.sort_unstable();
        let (best, _) = common::exhaustive_assignment(&heads, &dets, gate);
        prop_assert_eq!(greedy, best);
    }

    #[test]
    fn pearson_is_invariant_under_minmax_normalization(
        rows in prop::collection::vec(prop::collection::vec(prop::option::weighted(0.85, -1e3f64..1e3), 4), 3..40),
    ) {
        let cols: Vec<Vec<Option<f64>>> = (0..4).map(|c| rows.iter().map(|r| r[c]).collect()).collect();
        let normalized: Vec<Vec<Option<f64>>> = cols
            .iter()
            .map(|col| {
                let present: Vec<f64> = col.iter().flatten().copied().collect();
                if present.is_empty() {
                    return col.clone();
                }
                let mut it = minmax_normalize(&present).unwrap().values.into_iter();
                col.iter().map(|v| v.and_then(|_| it.next())).collect()
            })
            .collect();
        let names = ["a", "b", "c", "d"];
        let raw = pearson_matrix(&names, &cols);
        let norm = pearson_matrix(&names, &normalized);
        for i in 0..4 {
            for j in 0..4 {
                match (raw.r[i][j], norm.r[i][j]) {
                    (Some(a), Some(b)) => prop_assert!((a - b).abs() <= 1e-12, "{} vs {}", a, b),
                    (None, None) => {}
                    other => prop_assert!(false, "definedness differs: {:?}", other),
                }
            }
        }
    }

    #[test]
    fn histogram_counts_sum_to_n(values in prop::collection::vec(-1e6f64..1e6, 1..300), bins in 1usize..50) {
        let h = histogram(&values, bins).unwrap();
        prop_assert_eq!(h.counts.iter().sum::<usize>(), values.len());
        prop_assert_eq!(h.edges.len(), bins + 1);
    }

    #[test]
    fn quantile_matches_sort_and_interpolate(values in prop::collection::vec(-1e6f64..1e6, 1..200), p in 0.0f64..=1.0) {
        // insertion sort, then the textbook (n - 1) p interpolation
        let mut sorted: Vec<f64> = Vec::new();
        for v in &values {
            let at = sorted.iter().position(|s| s > v).unwrap_or(sorted.len());
            sorted.insert(at, *v);
        }
        let h = (sorted.len() - 1) as f64 * p;
        let lo = h.floor() as usize;
        let want = if lo + 1 < sorted.len() && h > lo as f64 {
            sorted[lo] + (h - lo as f64) * (sorted[lo + 1] - sorted[lo])
        } else {
            sorted[lo]
        };
        let mut std_sorted = values.clone();
        std_sorted.sort_by(f64::total_cmp);
        prop_assert_eq!(quantile_sorted(&std_sorted, p), want);
    }

    #[test]
    fn outlier_filter_is_idempotent(rows in prop::collection::vec((-50.0f64..200.0, prop::option::of(-40.0f64..40.0), prop::option::of(-5.0f64..80.0)), 0..60)) {
        let t = FeatureTable {
            rows: rows
                .into_iter()
                .enumerate()
                .map(|(i, (s, a, d))| FeatureRecord {
                    clip_id: "p".into(),
                    frame: i as u64,
                    track_id: 1,
                    class: ObjectClass::Vehicle,
                    speed_kmh: s,
                    accel_kmh_per_s: a,
                    dist_m: d,
                })
                .collect(),
        };
        let (once, _) = filter_outliers(&t, &OutlierBounds::default());
        let (twice, c) = filter_outliers(&once, &OutlierBounds::default());
        prop_assert_eq!(&twice, &once);
        prop_assert_eq!(c.rows_before, c.rows_after);
    }

    #[test]
    fn speed_is_translation_and_rotation_invariant(
        p0 in point(), p1 in point(), (tx, ty) in (-500.0f64..500.0, -500.0f64..500.0), theta in 0.0f64..std::f64::consts::TAU,
    ) {
        let f = 1.0 / 3.0;
        let base = speed(p0, p1, f, 64.0);
        let mv = |p: OverheadPoint| {
            let (s, c) = theta.sin_cos();
            OverheadPoint::new(c * p.x - s * p.y + tx, s * p.x + c * p.y + ty)
        };
        let moved = speed(mv(p0), mv(p1), f, 64.0);
        prop_assert!((base - moved).abs() <= 1e-9 * (1.0 + base));
    }

    #[test]
    fn adding_an_opposite_object_never_increases_distance(v in point(), others in prop::collection::vec(point(), 1..8), extra in point()) {
        let before = nearest_opposite_distance(v, &others, 64.0).unwrap();
        let mut more = others.clone();
        more.push(extra);
        prop_assert!(nearest_opposite_distance(v, &more, 64.0).unwrap() <= before);
    }

    #[test]
    fn step_distances_add_up_to_arc_length(pts in prop::collection::vec(point(), 2..20)) {
        let f = 0.5;
        let p = 10.0;
        let sum_km_h: f64 = pts.windows(2).map(|w| speed(w[0], w[1], f, p)).sum();
        let arc: f64 = pts.windows(2).map(|w| w[0].distance(&w[1])).sum();
        // speed · F · P / 3.6 recovers each pixel step
        prop_assert!((sum_km_h * f * p / 3.6 - arc).abs() <= 1e-9 * (1.0 + arc));
    }

    #[test]
    fn two_legged_contact_is_below_the_centroid(
        cx in 50.0f64..500.0, top in 50.0f64..300.0, h in 20.0f64..200.0, w in 6.0f64..60.0,
        left_lift in 0.0f64..0.3, right_lift in 0.0f64..0.3,
    ) {
        // torso plus two legs reaching into the lower part of the box
        let bottom = top + h;
        let mask = vec![
            ImagePoint::new(cx - w / 2.0, top),
            ImagePoint::new(cx + w / 2.0, top),
            ImagePoint::new(cx + w / 2.0, bottom - right_lift * h),
            ImagePoint::new(cx + w / 6.0, bottom - right_lift * h),
            ImagePoint::new(cx, top + 0.5 * h),
            ImagePoint::new(cx - w / 6.0, bottom - left_lift * h),
            ImagePoint::new(cx - w / 2.0, bottom - left_lift * h),
        ];
        let d = Detection {
            frame_index: 0,
            class: ObjectClass::Pedestrian,
            score: 0.9,
            bbox: BBox::from([cx - w / 2.0, top, cx + w / 2.0, bottom]),
            mask: Some(mask.clone()),
            contact: None,
        };
        let c = pedestrian_contact_point(&d);
        prop_assert_eq!(c.source, ContactSource::Mask);
        let centroid_y = mask.iter().map(|p| p.y).sum::<f64>() / mask.len() as f64;
        prop_assert!(c.point.y >= centroid_y);
    }

    #[test]
    fn wire_format_round_trips(
        dets in prop::collection::vec((0u64..3, any::<bool>(), 0.0f64..=1.0, 0.0f64..600.0, 0.0f64..300.0, 1.0f64..200.0, 1.0f64..200.0, any::<bool>()), 0..30),
    ) {
        let cfg = common::spot_a();
        let mut frames = FrameSeq::new(cfg.source_fps);
        let mut frame = 0;
        for (gap, veh, score, x, y, w, h, with_contact) in dets {
            frame += gap;
            let d = Detection {
                frame_index: frame,
                class: if veh { ObjectClass::Vehicle } else { ObjectClass::Pedestrian },
                score,
                bbox: BBox::from([x, y, x + w, y + h]),
                mask: Some(vec![ImagePoint::new(x, y + h), ImagePoint::new(x + w, y + h), ImagePoint::new(x + w / 2.0, y)]),
                contact: with_contact.then(|| ImagePoint::new(x + w / 2.0, y + h)),
            };
            match frames.frames.last_mut() {
                Some(f) if f.index == frame => f.detections.push(d),
                _ => frames.frames.push(Frame { index: frame, detections: vec![d] }),
            }
        }
        let mut buf = Vec::new();
        write_detections(&mut buf, &frames).unwrap();
        let parsed = parse_detections(buf.as_slice(), &cfg).unwrap();
        prop_assert!(parsed.rejected.is_empty());
        prop_assert_eq!(parsed.frames, frames);
    }
}
