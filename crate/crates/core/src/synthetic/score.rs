use std::collections::BTreeMap;

use serde::Serialize;

use crate::features::speed;
use crate::tracking::{Track, TrackId};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreParams {
    pub pixels_per_meter: f64,
    /// Seconds per source frame (1 / fps).
    pub source_frame_interval: f64,
    /// Largest truth–recovered distance, meters, counted as the same object.
    pub gate_m: f64,
}

/// Recovery quality of one truth agent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentScore {
    pub truth_id: TrackId,
    /// Aligned recovered track, if any.
    pub recovered_id: Option<TrackId>,
    pub matched_frames: usize,
    pub position_rmse_m: Option<f64>,
    pub speed_mae_kmh: Option<f64>,
    pub speed_steps: usize,
}

/// Pipeline recovery against ground truth. `None` marks a metric with no
/// data behind it (for example no recovered tracks).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryScore {
    pub agents: Vec<AgentScore>,
    pub position_rmse_m: Option<f64>,
    pub speed_mae_kmh: Option<f64>,
    /// |recovered tracks − truth tracks|.
    pub track_count_delta: usize,
    pub id_switches: usize,
}

/// Aligns truth and recovered tracks and scores positions and speeds.
///
/// Alignment is greedy one-to-one by overlap: the number of shared frames
/// where the two tracks are within the gate, largest first (ties by truth id,
/// then recovered id). Positions are compared on every shared frame of an
/// aligned pair; speeds on every recovered step whose end frames both have a
/// truth sample. An id switch is a change of the nearest gated recovered
/// track between consecutive matched samples of a truth track.
pub fn compare_to_truth(
    recovered: &[Track],
    truth: &[Track],
    params: &ScoreParams,
) -> RecoveryScore {
    let p = params.pixels_per_meter;
    let gate_px = params.gate_m * p;
    let truth_at: Vec<BTreeMap<u64, _>> = truth
        .iter()
        .map(|t| t.points.iter().map(|q| (q.frame, q.point)).collect())
        .collect();

    let mut overlaps = Vec::new();
    for (ti, t) in truth.iter().enumerate() {
        for (ri, r) in recovered
            .iter()
            .enumerate()
            .filter(|(_, r)| r.class == t.class)
        {
            let n = r
                .points
                .iter()
                .filter(|q| {
                    truth_at[ti]
                        .get(&q.frame)
                        .is_some_and(|tp| tp.distance(&q.point) <= gate_px)
                })
                .count();
            if n > 0 {
                overlaps.push((n, ti, ri));
            }
        }
    }
    overlaps.sort_by(|a, b| {
        b.0.cmp(&a.0)
            .then(truth[a.1].id.cmp(&truth[b.1].id))
            .then(recovered[a.2].id.cmp(&recovered[b.2].id))
    });
    let mut aligned: Vec<Option<usize>> = vec![None; truth.len()];
    let mut used = vec![false; recovered.len()];
    for (_, ti, ri) in overlaps {
        if aligned[ti].is_none() && !used[ri] {
            aligned[ti] = Some(ri);
            used[ri] = true;
        }
    }

    let mut agents = Vec::with_capacity(truth.len());
    let (mut sq_sum, mut sq_n) = (0.0, 0usize);
    let (mut abs_sum, mut abs_n) = (0.0, 0usize);
    for (ti, t) in truth.iter().enumerate() {
        let mut score = AgentScore {
            truth_id: t.id,
            recovered_id: None,
            matched_frames: 0,
            position_rmse_m: None,
            speed_mae_kmh: None,
            speed_steps: 0,
        };
        if let Some(ri) = aligned[ti] {
            let r = &recovered[ri];
            score.recovered_id = Some(r.id);
            let (mut sq, mut ab) = (0.0, 0.0);
            for q in &r.points {
                if let Some(tp) = truth_at[ti].get(&q.frame) {
                    sq += (tp.distance(&q.point) / p).powi(2);
                    score.matched_frames += 1;
                }
            }
            for w in r.points.windows(2) {
                let (Some(t0), Some(t1)) =
                    (truth_at[ti].get(&w[0].frame), truth_at[ti].get(&w[1].frame))
                else {
                    continue;
                };
                let dt = (w[1].frame - w[0].frame) as f64 * params.source_frame_interval;
                ab += (speed(w[0].point, w[1].point, dt, p) - speed(*t0, *t1, dt, p)).abs();
                score.speed_steps += 1;
            }
            if score.matched_frames > 0 {
                score.position_rmse_m = Some((sq / score.matched_frames as f64).sqrt());
            }
            if score.speed_steps > 0 {
                score.speed_mae_kmh = Some(ab / score.speed_steps as f64);
            }
            sq_sum += sq;
            sq_n += score.matched_frames;
            abs_sum += ab;
            abs_n += score.speed_steps;
        }
        agents.push(score);
    }

    RecoveryScore {
        agents,
        position_rmse_m: (sq_n > 0).then(|| (sq_sum / sq_n as f64).sqrt()),
        speed_mae_kmh: (abs_n > 0).then(|| abs_sum / abs_n as f64),
        track_count_delta: recovered.len().abs_diff(truth.len()),
        id_switches: id_switches(recovered, truth, gate_px),
    }
}

fn id_switches(recovered: &[Track], truth: &[Track], gate_px: f64) -> usize {
    let mut at_frame: BTreeMap<u64, Vec<(&Track, usize)>> = BTreeMap::new();
    for r in recovered {
        for (i, q) in r.points.iter().enumerate() {
            at_frame.entry(q.frame).or_default().push((r, i));
        }
    }
    let mut switches = 0;
    for t in truth {
        let mut last: Option<TrackId> = None;
        for q in &t.points {
            let Some(cands) = at_frame.get(&q.frame) else {
                continue;
            };
            let nearest = cands
                .iter()
                .filter(|(r, _)| r.class == t.class)
                .map(|(r, i)| (r.points[*i].point.distance(&q.point), r.id))
                .filter(|(d, _)| *d <= gate_px)
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            if let Some((_, id)) = nearest {
                if last.is_some_and(|l| l != id) {
                    switches += 1;
                }
                last = Some(id);
            }
        }
    }
    switches
}
