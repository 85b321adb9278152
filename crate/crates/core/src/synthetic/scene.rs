use std::fs;
use std::io::{self, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::SynthError;
use crate::geometry::{AnchorPair, ImagePoint, LaneAxis, OverheadPoint};
use crate::ingest::{
    BBox, Detection, Frame, FrameSeq, ObjectClass, SceneConfig, SceneConfigFile, Thresholds,
};
use crate::stats::OutlierBounds;
use crate::tracking::{Track, TrackPoint, TrackStatus};

/// A timestamped position in overhead meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub t: f64,
    pub x_m: f64,
    pub y_m: f64,
}

impl Waypoint {
    pub fn new(t: f64, x_m: f64, y_m: f64) -> Self {
        Self { t, x_m, y_m }
    }
}

/// An agent moving along a piecewise-linear path. It exists from the first
/// to the last waypoint time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSpec {
    pub class: ObjectClass,
    pub waypoints: Vec<Waypoint>,
}

impl AgentSpec {
    pub fn new(class: ObjectClass, waypoints: Vec<Waypoint>) -> Self {
        Self { class, waypoints }
    }

    /// Position at time `t`, or `None` outside the waypoint span.
    pub fn position(&self, t: f64) -> Option<(f64, f64)> {
        let first = self.waypoints.first()?;
        let last = self.waypoints.last()?;
        if t < first.t || t > last.t {
            return None;
        }
        if self.waypoints.len() == 1 || t == first.t {
            return Some((first.x_m, first.y_m));
        }
        let i = self
            .waypoints
            .windows(2)
            .position(|w| t <= w[1].t)
            .expect("t lies in the span");
        let (a, b) = (self.waypoints[i], self.waypoints[i + 1]);
        let s = (t - a.t) / (b.t - a.t);
        Some((a.x_m + s * (b.x_m - a.x_m), a.y_m + s * (b.y_m - a.y_m)))
    }
}

/// How detections describe the ground contact.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContactMode {
    /// Emit the contact point and a mask around it.
    #[default]
    Contact,
    /// Emit only the mask; the pipeline must recover the contact from it.
    Mask,
}

fn default_frame_width() -> f64 {
    1280.0
}

fn default_frame_height() -> f64 {
    720.0
}

fn default_speed_limit() -> f64 {
    30.0
}

fn default_pedestrian_mask_px() -> f64 {
    3.0
}

fn default_vehicle_mask_px() -> f64 {
    8.0
}

/// Ground-truth scene description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub duration_s: f64,
    pub fps: f64,
    pub stride: i64,
    #[serde(default = "default_frame_width")]
    pub frame_width: f64,
    #[serde(default = "default_frame_height")]
    pub frame_height: f64,
    pub anchors: Vec<AnchorPair>,
    pub crosswalk_px: f64,
    pub crosswalk_m: f64,
    #[serde(default = "default_speed_limit")]
    pub speed_limit_kmh: f64,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub outlier_bounds: OutlierBounds,
    pub agents: Vec<AgentSpec>,
    /// Gaussian σ of image-space contact noise, pixels.
    #[serde(default)]
    pub noise_px: f64,
    /// Probability that a single detection is missing.
    #[serde(default)]
    pub dropout: f64,
    #[serde(default)]
    pub contact_mode: ContactMode,
    /// Half-width of the synthesized pedestrian mask, pixels.
    #[serde(default = "default_pedestrian_mask_px")]
    pub pedestrian_mask_px: f64,
    /// Half-width of the synthesized vehicle mask, pixels.
    #[serde(default = "default_vehicle_mask_px")]
    pub vehicle_mask_px: f64,
    /// Required; there is no unseeded mode.
    pub seed: Option<u64>,
}

impl SceneSpec {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, SynthError> {
        let text = fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Scene configuration matching this spec, with one lane axis per
    /// vehicle agent (image of its first and last waypoint).
    pub fn scene_config(&self) -> Result<SceneConfig, SynthError> {
        let camera = Camera::new(&SceneConfig::from_file(self.config_file(Vec::new()))?)?;
        let mut lane_axes: Vec<LaneAxis> = Vec::new();
        for a in self
            .agents
            .iter()
            .filter(|a| a.class == ObjectClass::Vehicle)
        {
            let (Some(first), Some(last)) = (a.waypoints.first(), a.waypoints.last()) else {
                continue;
            };
            let from = camera.to_image(first.x_m, first.y_m);
            let to = camera.to_image(last.x_m, last.y_m);
            if let (Some(from), Some(to)) = (from, to) {
                let axis = LaneAxis::new(from, to);
                if from.distance(&to) > 0.0 && !lane_axes.contains(&axis) {
                    lane_axes.push(axis);
                }
            }
        }
        Ok(SceneConfig::from_file(self.config_file(lane_axes))?)
    }

    fn config_file(&self, lane_axes: Vec<LaneAxis>) -> SceneConfigFile {
        SceneConfigFile {
            frame_width: self.frame_width,
            frame_height: self.frame_height,
            fps: self.fps,
            stride: self.stride,
            anchors: self.anchors.clone(),
            crosswalk_px: self.crosswalk_px,
            crosswalk_m: self.crosswalk_m,
            speed_limit_kmh: self.speed_limit_kmh,
            thresholds: self.thresholds,
            outlier_bounds: self.outlier_bounds,
            lane_axes,
            vehicle_lead_fraction: crate::geometry::DEFAULT_LEAD_FRACTION,
            max_reject_fraction: crate::ingest::DEFAULT_MAX_REJECT_FRACTION,
        }
    }

    fn validate(&self) -> Result<u64, SynthError> {
        let invalid = |m: String| Err(SynthError::InvalidSpec(m));
        let Some(seed) = self.seed else {
            return Err(SynthError::Unseeded);
        };
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return invalid(format!(
                "duration_s must be positive, got {}",
                self.duration_s
            ));
        }
        if !(self.noise_px.is_finite() && self.noise_px >= 0.0) {
            return invalid(format!(
                "noise_px must be non-negative, got {}",
                self.noise_px
            ));
        }
        if !(0.0..=1.0).contains(&self.dropout) {
            return invalid(format!("dropout must lie in [0, 1], got {}", self.dropout));
        }
        if !(self.pedestrian_mask_px > 0.0 && self.vehicle_mask_px > 0.0) {
            return invalid("mask sizes must be positive".to_string());
        }
        for (i, a) in self.agents.iter().enumerate() {
            if a.waypoints.is_empty() {
                return invalid(format!("agent {i} has no waypoints"));
            }
            if a.waypoints
                .iter()
                .any(|w| !(w.t.is_finite() && w.x_m.is_finite() && w.y_m.is_finite()))
            {
                return invalid(format!("agent {i} has a non-finite waypoint"));
            }
            if a.waypoints.windows(2).any(|w| w[1].t <= w[0].t) {
                return invalid(format!(
                    "agent {i} waypoint times are not strictly increasing"
                ));
            }
        }
        Ok(seed)
    }
}

/// Overhead meters → image pixels for points in front of the camera.
struct Camera {
    m: [[f64; 3]; 3],
    /// Sign of the homogeneous coordinate on the visible side of the horizon.
    sign: f64,
    pixels_per_meter: f64,
}

impl Camera {
    fn new(cfg: &SceneConfig) -> Result<Self, SynthError> {
        let m = cfg.homography().inverse()?.matrix();
        let (cx, cy) = cfg.anchors.iter().fold((0.0, 0.0), |(x, y), a| {
            (x + a.overhead.x / 4.0, y + a.overhead.y / 4.0)
        });
        let w = m[2][0] * cx + m[2][1] * cy + m[2][2];
        Ok(Self {
            m,
            sign: w.signum(),
            pixels_per_meter: cfg.pixels_per_meter(),
        })
    }

    fn to_image(&self, x_m: f64, y_m: f64) -> Option<ImagePoint> {
        let (x, y) = (x_m * self.pixels_per_meter, y_m * self.pixels_per_meter);
        let m = &self.m;
        let w = m[2][0] * x + m[2][1] * y + m[2][2];
        if w * self.sign < 1e-12 {
            return None;
        }
        let p = ImagePoint::new(
            (m[0][0] * x + m[0][1] * y + m[0][2]) / w,
            (m[1][0] * x + m[1][1] * y + m[1][2]) / w,
        );
        p.is_finite().then_some(p)
    }
}

/// Samples an agent dropped because they left the image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ClippedAgent {
    /// Index into [`SceneSpec::agents`].
    pub agent: usize,
    pub samples: usize,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub config: SceneConfig,
    /// Every source frame with at least one detection.
    pub frames: FrameSeq,
    /// One track per agent (id = agent index + 1), overhead pixels, every
    /// source frame the agent exists in.
    pub truth: Vec<Track>,
    pub clipped: Vec<ClippedAgent>,
    pub dropped: usize,
}

/// Renders the scene into detections.
///
/// Every sample draws one uniform (dropout) and two standard normals (noise)
/// in agent order, so the noise realization does not depend on σ.
pub fn simulate(spec: &SceneSpec) -> Result<Simulation, SynthError> {
    let seed = spec.validate()?;
    let config = spec.scene_config()?;
    let camera = Camera::new(&config)?;
    let p = config.pixels_per_meter();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let n_frames = (spec.duration_s * spec.fps + 1e-9).floor() as u64 + 1;
    let mut frames = FrameSeq::new(spec.fps);
    let mut truth: Vec<Track> = spec
        .agents
        .iter()
        .enumerate()
        .map(|(i, a)| Track {
            id: i as u64 + 1,
            class: a.class,
            points: Vec::new(),
            status: TrackStatus::Terminated,
        })
        .collect();
    let mut clipped = vec![0usize; spec.agents.len()];
    let mut dropped = 0;

    for index in 0..n_frames {
        let t = index as f64 / spec.fps;
        let mut detections = Vec::new();
        for (i, agent) in spec.agents.iter().enumerate() {
            let Some((x_m, y_m)) = agent.position(t) else {
                continue;
            };
            let u: f64 = rng.random();
            let nx: f64 = rng.sample(StandardNormal);
            let ny: f64 = rng.sample(StandardNormal);

            let d = camera.to_image(x_m, y_m).and_then(|c| {
                let c = ImagePoint::new(c.x + spec.noise_px * nx, c.y + spec.noise_px * ny);
                render(spec, &config, agent.class, c, index)
            });
            let Some(d) = d else {
                clipped[i] += 1;
                continue;
            };
            truth[i].points.push(TrackPoint {
                frame: index,
                point: OverheadPoint::from_meters(x_m, y_m, p),
            });
            if u < spec.dropout {
                dropped += 1;
                continue;
            }
            detections.push(d);
        }
        if !detections.is_empty() {
            frames.frames.push(Frame { index, detections });
        }
    }

    Ok(Simulation {
        config,
        frames,
        truth: truth.into_iter().filter(|t| !t.points.is_empty()).collect(),
        clipped: clipped
            .into_iter()
            .enumerate()
            .filter(|&(_, n)| n > 0)
            .map(|(agent, samples)| ClippedAgent { agent, samples })
            .collect(),
        dropped,
    })
}

/// Builds the detection for contact point `c`, or `None` when any part of
/// it falls outside the frame.
fn render(
    spec: &SceneSpec,
    cfg: &SceneConfig,
    class: ObjectClass,
    c: ImagePoint,
    index: u64,
) -> Option<Detection> {
    if !c.is_finite() {
        return None;
    }
    let mask: Vec<ImagePoint> = match class {
        ObjectClass::Pedestrian => {
            // square standing on the contact point; its lower corners are the feet
            let s = spec.pedestrian_mask_px;
            vec![
                ImagePoint::new(c.x - s, c.y),
                ImagePoint::new(c.x - s, c.y - 2.0 * s),
                ImagePoint::new(c.x + s, c.y - 2.0 * s),
                ImagePoint::new(c.x + s, c.y),
            ]
        }
        ObjectClass::Vehicle => {
            // pentagon pointing along the lane with its tip on the contact point
            let s = spec.vehicle_mask_px;
            let axis = cfg
                .lane_axes
                .iter()
                .min_by(|a, b| a.distance_to(&c).total_cmp(&b.distance_to(&c)));
            let (ux, uy) = match axis {
                Some(a) => {
                    let (dx, dy) = (a.to.x - a.from.x, a.to.y - a.from.y);
                    let len = dx.hypot(dy);
                    (dx / len, dy / len)
                }
                None => (1.0, 0.0),
            };
            let (nx, ny) = (-uy, ux);
            vec![
                c,
                ImagePoint::new(c.x + s * nx - s * ux, c.y + s * ny - s * uy),
                ImagePoint::new(c.x + s * nx - 4.0 * s * ux, c.y + s * ny - 4.0 * s * uy),
                ImagePoint::new(c.x - s * nx - 4.0 * s * ux, c.y - s * ny - 4.0 * s * uy),
                ImagePoint::new(c.x - s * nx - s * ux, c.y - s * ny - s * uy),
            ]
        }
    };
    let (mut x0, mut y0) = (f64::INFINITY, f64::INFINITY);
    let (mut x1, mut y1) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for v in &mask {
        x0 = x0.min(v.x);
        y0 = y0.min(v.y);
        x1 = x1.max(v.x);
        y1 = y1.max(v.y);
    }
    let inside = |x: f64, y: f64| {
        (0.0..=cfg.frame_width).contains(&x) && (0.0..=cfg.frame_height).contains(&y)
    };
    if !(inside(x0, y0) && inside(x1, y1)) {
        return None;
    }
    Some(Detection {
        frame_index: index,
        class,
        score: 0.9,
        bbox: BBox::from([x0, y0, x1, y1]),
        mask: Some(mask),
        contact: (spec.contact_mode == ContactMode::Contact).then_some(c),
    })
}

/// Track CSV row of a ground-truth track, flagged with `truth = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthRow {
    pub clip_id: String,
    pub track_id: u64,
    pub class: ObjectClass,
    pub frame: u64,
    pub x_m: f64,
    pub y_m: f64,
    pub truth: u8,
}

pub fn write_truth_csv<W: Write>(
    w: W,
    clip_id: &str,
    truth: &[Track],
    pixels_per_meter: f64,
) -> io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    if truth.iter().all(|t| t.points.is_empty()) {
        out.write_record([
            "clip_id", "track_id", "class", "frame", "x_m", "y_m", "truth",
        ])?;
    }
    for t in truth {
        for p in &t.points {
            let (x_m, y_m) = p.point.to_meters(pixels_per_meter);
            out.serialize(TruthRow {
                clip_id: clip_id.to_string(),
                track_id: t.id,
                class: t.class,
                frame: p.frame,
                x_m,
                y_m,
                truth: 1,
            })?;
        }
    }
    out.flush()
}

/// A spot-A-like camera: 1280×720 image, 15 fps, stride 5, a 15 m crosswalk
/// spanning 960 overhead pixels.
pub fn spot_a_spec(agents: Vec<AgentSpec>, duration_s: f64, seed: u64) -> SceneSpec {
    let pair =
        |ix, iy, ox, oy| AnchorPair::new(ImagePoint::new(ix, iy), OverheadPoint::new(ox, oy));
    SceneSpec {
        duration_s,
        fps: 15.0,
        stride: 5,
        frame_width: 1280.0,
        frame_height: 720.0,
        anchors: vec![
            pair(310.0, 620.0, 0.0, 0.0),
            pair(1020.0, 600.0, 960.0, 0.0),
            pair(860.0, 380.0, 960.0, 256.0),
            pair(420.0, 390.0, 0.0, 256.0),
        ],
        crosswalk_px: 960.0,
        crosswalk_m: 15.0,
        speed_limit_kmh: 30.0,
        thresholds: Thresholds::default(),
        outlier_bounds: OutlierBounds::default(),
        agents,
        noise_px: 0.0,
        dropout: 0.0,
        contact_mode: ContactMode::Contact,
        pedestrian_mask_px: default_pedestrian_mask_px(),
        vehicle_mask_px: default_vehicle_mask_px(),
        seed: Some(seed),
    }
}
