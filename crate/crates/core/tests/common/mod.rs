#![allow(dead_code)]

use std::path::PathBuf;

use crosswalk::geometry::{AnchorPair, Homography, OverheadPoint};
use crosswalk::ingest::write_detections;
use crosswalk::pipeline::{run_clip, ClipOutput};
use crosswalk::synthetic::{simulate, spot_a_spec, AgentSpec, SceneSpec, Simulation, Waypoint};
use crosswalk::tracking::TrackHead;
use crosswalk::{ImagePoint, ObjectClass, SceneConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SPOT_A: &str = r#"{
    "fps": 15, "stride": 5,
    "anchors": [
        {"image": [310, 620], "overhead": [0, 0]},
        {"image": [1020, 600], "overhead": [960, 0]},
        {"image": [860, 380], "overhead": [960, 256]},
        {"image": [420, 390], "overhead": [0, 256]}
    ],
    "crosswalk_px": 960, "crosswalk_m": 15,
    "speed_limit_kmh": 30,
    "thresholds": {"vehicle_m": 12.0, "pedestrian_m": 2.0},
    "outlier_bounds": {}
}"#;

pub fn spot_a() -> SceneConfig {
    SceneConfig::from_json(SPOT_A).unwrap()
}

pub fn spot_b() -> SceneConfig {
    SceneConfig::from_json(&SPOT_A.replace("\"fps\": 15", "\"fps\": 11")).unwrap()
}

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/spot_a")
}

/// 30 km/h is 25/3 m/s.
pub const KMH_30_MPS: f64 = 25.0 / 3.0;

/// A vehicle approaching the camera along the near lane at 30 km/h.
pub fn vehicle_30kmh_spec(seed: u64, noise_px: f64) -> SceneSpec {
    let (y0, y1) = (12.0, -0.5);
    let dur = (y0 - y1) / KMH_30_MPS;
    let agent = AgentSpec::new(
        ObjectClass::Vehicle,
        vec![Waypoint::new(0.0, 4.0, y0), Waypoint::new(dur, 4.0, y1)],
    );
    let mut spec = spot_a_spec(vec![agent], dur, seed);
    spec.noise_px = noise_px;
    spec
}

/// Simulates, serializes to JSONL and runs the extraction pipeline.
pub fn run_simulated(spec: &SceneSpec) -> (Simulation, ClipOutput) {
    let sim = simulate(spec).unwrap();
    let mut buf = Vec::new();
    write_detections(&mut buf, &sim.frames).unwrap();
    let out = run_clip("sim", buf.as_slice(), &sim.config).unwrap();
    (sim, out)
}

/// Vehicles approach a waiting pedestrian one after another. With
/// `speeding_up` each vehicle accelerates as it closes in; otherwise it
/// brakes.
pub fn approach_scene(speeding_up: bool, seed: u64) -> SceneSpec {
    let mut agents = Vec::new();
    let ys = [14.0, 11.0, 8.0, 5.0, 2.5];
    let speeds_kmh = if speeding_up {
        [12.0, 18.0, 26.0, 34.0]
    } else {
        [34.0, 26.0, 18.0, 12.0]
    };
    let mut t0 = 0.0;
    for _ in 0..4 {
        let mut t = t0;
        let mut wps = vec![Waypoint::new(t, 4.0, ys[0])];
        for (w, v) in ys.windows(2).zip(speeds_kmh) {
            t += (w[0] - w[1]) / (v / 3.6);
            wps.push(Waypoint::new(t, 4.0, w[1]));
        }
        agents.push(AgentSpec::new(ObjectClass::Vehicle, wps));
        t0 = t + 1.0;
    }
    agents.push(AgentSpec::new(
        ObjectClass::Pedestrian,
        vec![Waypoint::new(0.0, 6.5, 1.0), Waypoint::new(t0, 6.5, 1.0)],
    ));
    let mut spec = spot_a_spec(agents, t0, seed);
    spec.noise_px = 0.5;
    spec
}

pub fn random_homography(rng: &mut ChaCha8Rng) -> Homography {
    loop {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                let base = if i == j { 1.0 } else { 0.0 };
                *v = base + rng.random_range(-0.5..0.5);
            }
        }
        m[2][0] *= 1e-3;
        m[2][1] *= 1e-3;
        if let Ok(h) = Homography::from_matrix(m) {
            return h;
        }
    }
}

/// Four anchors in general position: image corners of a jittered rectangle
/// and their images under `h`.
pub fn anchors_for(h: &Homography, rng: &mut ChaCha8Rng) -> Option<[AnchorPair; 4]> {
    let corners = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
    let mut out = Vec::new();
    for (cx, cy) in corners {
        let x = 100.0 + cx * 800.0 + rng.random_range(-60.0..60.0);
        let y = 100.0 + cy * 500.0 + rng.random_range(-60.0..60.0);
        let (ox, oy) = h.apply(x, y).ok()?;
        out.push(AnchorPair::new(
            ImagePoint::new(x, y),
            OverheadPoint::new(ox, oy),
        ));
    }
    out.try_into().ok()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Minimum-total-distance assignment among matchings of maximum size within
/// the gate, by enumeration. Returns (pairs as (track index, detection index)
/// sorted by track, total distance).
pub fn exhaustive_assignment(
    heads: &[TrackHead],
    dets: &[OverheadPoint],
    gate: f64,
) -> (Vec<(usize, usize)>, f64) {
    #[allow(clippy::too_many_arguments)]
    fn go(
        i: usize,
        heads: &[TrackHead],
        dets: &[OverheadPoint],
        gate: f64,
        used: &mut Vec<bool>,
        cur: &mut Vec<(usize, usize)>,
        cost: f64,
        best: &mut (Vec<(usize, usize)>, f64),
    ) {
        if i == heads.len() {
            let better = cur.len() > best.0.len() || (cur.len() == best.0.len() && cost < best.1);
            if better {
                *best = (cur.clone(), cost);
            }
            return;
        }
        go(i + 1, heads, dets, gate, used, cur, cost, best);
        for j in 0..dets.len() {
            let d = heads[i].point.distance(&dets[j]);
            if !used[j] && d <= gate {
                used[j] = true;
                cur.push((i, j));
                go(i + 1, heads, dets, gate, used, cur, cost + d, best);
                cur.pop();
                used[j] = false;
            }
        }
    }
    let mut best = (Vec::new(), f64::INFINITY);
    go(
        0,
        heads,
        dets,
        gate,
        &mut vec![false; dets.len()],
        &mut Vec::new(),
        0.0,
        &mut best,
    );
    if best.0.is_empty() {
        best.1 = 0.0;
    }
    best
}

/// Up to three tracks and three detections per scene, spread so that no two
/// track heads are within twice the gate. Each track moves less than the gate,
/// may vanish, and unrelated detections may appear far from every head.
pub fn separated_scene(seed: u64, gate: f64) -> (Vec<TrackHead>, Vec<OverheadPoint>) {
    let mut r = rng(seed);
    let n_tracks = r.random_range(0..=3usize);
    let mut heads: Vec<TrackHead> = Vec::new();
    while heads.len() < n_tracks {
        let p = OverheadPoint::new(
            r.random_range(0.0..40.0 * gate),
            r.random_range(0.0..40.0 * gate),
        );
        if heads.iter().all(|h| h.point.distance(&p) > 3.0 * gate) {
            heads.push(TrackHead {
                id: heads.len() as u64 + 1,
                point: p,
            });
        }
    }
    let mut dets = Vec::new();
    for h in &heads {
        if dets.len() < 3 && r.random_bool(0.8) {
            let a: f64 = r.random_range(0.0..std::f64::consts::TAU);
            let d = r.random_range(0.0..0.95 * gate);
            dets.push(OverheadPoint::new(
                h.point.x + d * a.cos(),
                h.point.y + d * a.sin(),
            ));
        }
    }
    while dets.len() < 3 && r.random_bool(0.3) {
        let p = OverheadPoint::new(
            r.random_range(0.0..40.0 * gate),
            r.random_range(0.0..40.0 * gate),
        );
        if heads.iter().all(|h| h.point.distance(&p) > 1.5 * gate) {
            dets.push(p);
        }
    }
    // shuffle detection order so index order carries no information
    for i in (1..dets.len()).rev() {
        let j = r.random_range(0..=i);
        dets.swap(i, j);
    }
    (heads, dets)
}
