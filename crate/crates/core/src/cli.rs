//! Command-line front end.
//!
//! Exit codes: 0 success, 1 I/O or invalid invocation, 2 scene configuration
//! or calibration failure, 3 detection input quality, 4 nothing left to
//! analyze.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::features::FeatureTable;
use crate::geometry::OverheadPoint;
use crate::ingest::{write_detections, ConfigError, IngestError, SceneConfig};
use crate::pipeline::{run_clip, ClipOutput, StageCounts};
use crate::stats::{
    render_comparison, summarize, write_boxplot_csv, write_histogram_csv, OutlierBounds,
    StatsError, SummaryReport,
};
use crate::synthetic::{
    compare_to_truth, simulate, write_truth_csv, SceneSpec, ScoreParams, SynthError, TruthRow,
};
use crate::tracking::{
    read_track_csv, track_rows, write_track_csv, Track, TrackPoint, TrackStatus,
};

#[derive(Debug, Parser)]
#[command(
    name = "crosswalk",
    version,
    about = "Crosswalk risk analytics from oblique-camera detections"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the homography and print it with anchor residuals, F and P.
    Calibrate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Detections JSONL → tracks.csv, features.csv and a manifest.
    Extract {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the configured stride.
        #[arg(long)]
        stride: Option<u64>,
        /// One JSONL file per clip; the clip id is the file stem.
        #[arg(required = true)]
        detections: Vec<PathBuf>,
    },
    /// Feature CSVs → per-input reports and a side-by-side comparison.
    Analyze {
        /// Scene config supplying outlier bounds.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 20)]
        bins: usize,
        /// Outlier bounds as inline JSON or a path to a JSON file.
        #[arg(long)]
        bounds: Option<String>,
        /// Report label per input, in order. Defaults to the single clip id
        /// in the file, else the file stem.
        #[arg(long)]
        label: Vec<String>,
        #[arg(required = true)]
        features: Vec<PathBuf>,
    },
    /// Render a scene spec into detections, ground truth and a scene config.
    Simulate {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the spec's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Clip id for the outputs; defaults to the scene file stem.
        #[arg(long)]
        clip_id: Option<String>,
    },
    /// Score a tracks CSV against a ground-truth CSV.
    Evaluate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        tracks: PathBuf,
        /// Largest truth–recovered distance counted as a match, meters.
        #[arg(long, default_value_t = 2.0)]
        gate_m: f64,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(ConfigError),
    #[error("{}: {source}", path.display())]
    Ingest { path: PathBuf, source: IngestError },
    #[error("{label}: {source}")]
    Analysis { label: String, source: StatsError },
    #[error(transparent)]
    Synth(SynthError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. }
            | CliError::Csv { .. }
            | CliError::Usage(_)
            | CliError::Synth(_) => 1,
            CliError::Config(ConfigError::Io { .. }) => 1,
            CliError::Config(_) => 2,
            CliError::Ingest {
                source: IngestError::Io(_),
                ..
            } => 1,
            CliError::Ingest { .. } => 3,
            CliError::Analysis {
                source: StatsError::NoUsableRows,
                ..
            } => 4,
            CliError::Analysis { .. } => 1,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(io_err(path))
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, Serialize)]
pub struct InputFile {
    pub path: String,
    pub sha256: String,
}

impl InputFile {
    fn read(path: &Path) -> Result<(Self, Vec<u8>), CliError> {
        let bytes = read_bytes(path)?;
        let f = Self {
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        };
        Ok((f, bytes))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Artifact {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Provenance of one command run. Stage timings live in a separate
/// `timings.json` so the manifest itself is reproducible.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: Option<InputFile>,
    pub inputs: Vec<InputFile>,
    pub parameters: serde_json::Value,
    pub stages: serde_json::Value,
    pub artifacts: Vec<Artifact>,
}

/// Writes output files of one run and records their hashes.
struct OutDir {
    dir: PathBuf,
    artifacts: Vec<Artifact>,
}

impl OutDir {
    fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            artifacts: Vec::new(),
        })
    }

    fn write_raw(&self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(io_err(&path))
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        self.write_raw(name, bytes)?;
        self.artifacts.push(Artifact {
            name: name.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len(),
        });
        Ok(())
    }

    fn finish(
        self,
        name: &str,
        mut manifest: RunManifest,
        timings: &Timings,
    ) -> Result<(), CliError> {
        manifest.artifacts = self.artifacts.clone();
        self.write_raw(name, &to_json_bytes(&manifest))?;
        self.write_raw("timings.json", &to_json_bytes(&timings.0))
    }
}

fn to_json_bytes<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("serializable");
    s.push(b'\n');
    s
}

fn buffer(f: impl FnOnce(&mut Vec<u8>) -> io::Result<()>) -> Vec<u8> {
    let mut buf = Vec::new();
    f(&mut buf).expect("writing to memory");
    buf
}

#[derive(Default)]
struct Timings(BTreeMap<&'static str, f64>);

impl Timings {
    fn time<T>(&mut self, stage: &'static str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.0.insert(stage, start.elapsed().as_secs_f64());
        out
    }
}

fn manifest(command: &'static str) -> RunManifest {
    RunManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command,
        config: None,
        inputs: Vec::new(),
        parameters: serde_json::Value::Null,
        stages: serde_json::Value::Null,
        artifacts: Vec::new(),
    }
}

fn load_config(path: &Path) -> Result<(SceneConfig, InputFile), CliError> {
    let (file, bytes) = InputFile::read(path)?;
    let text = String::from_utf8(bytes).map_err(|e| {
        CliError::Config(ConfigError::Invalid {
            field: "(file)",
            reason: e.to_string(),
        })
    })?;
    let cfg = SceneConfig::from_json(&text).map_err(CliError::Config)?;
    Ok((cfg, file))
}

fn fmt_num(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{v:.0}")
    } else {
        format!("{v}")
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Text of the calibration report.
pub fn calibration_report(cfg: &SceneConfig) -> String {
    let mut out = String::new();
    let m = cfg.homography().matrix();
    out.push_str("Homography (image -> overhead, h33 = 1):\n");
    for row in m {
        out.push_str(&format!(
            "  [{:>16.9e} {:>16.9e} {:>16.9e}]\n",
            row[0], row[1], row[2]
        ));
    }
    out.push_str("Anchor residuals (overhead px):\n");
    for (i, (a, r)) in cfg
        .anchors
        .iter()
        .zip(cfg.homography().residuals(&cfg.anchors))
        .enumerate()
    {
        out.push_str(&format!(
            "  anchor {i}: image ({}, {}) -> overhead ({}, {}): {r:.3e}\n",
            fmt_num(a.image.x),
            fmt_num(a.image.y),
            fmt_num(a.overhead.x),
            fmt_num(a.overhead.y)
        ));
    }

    let f = cfg.frame_interval();
    let fps = cfg.source_fps;
    let exact = if fps == fps.trunc() && fps >= 1.0 {
        let d = gcd(cfg.stride, fps as u64);
        format!("{}/{} s = ", cfg.stride / d, fps as u64 / d)
    } else {
        String::new()
    };
    out.push_str(&format!(
        "Frame interval F = stride / fps = {} / {} = {exact}{f:.6} s\n",
        cfg.stride,
        fmt_num(fps)
    ));
    let p = cfg.pixels_per_meter();
    out.push_str(&format!(
        "Overhead scale P = crosswalk_px / crosswalk_m = {} / {} = {} px/m\n",
        fmt_num(cfg.crosswalk_px),
        fmt_num(cfg.crosswalk_m),
        fmt_num(p)
    ));
    if cfg.crosswalk_px == 960.0 && cfg.crosswalk_m == 15.0 {
        out.push_str(
            "Note: 960 px / 15 m is 64 px/m. The figure of 46 px/m sometimes quoted for this crosswalk \
             does not follow from these operands; 64 px/m is used.\n",
        );
    }
    out
}

fn cmd_calibrate(config: &Path) -> Result<(), CliError> {
    let (cfg, _) = load_config(config)?;
    print!("{}", calibration_report(&cfg));
    Ok(())
}

#[derive(Serialize)]
struct ClipSummary<'a> {
    clip_id: &'a str,
    counts: StageCounts,
    rejected: Vec<RejectedEntry>,
}

#[derive(Serialize)]
struct RejectedEntry {
    line: usize,
    reason: String,
}

fn clip_ids(paths: &[PathBuf]) -> Result<Vec<String>, CliError> {
    let ids: Vec<String> = paths
        .iter()
        .map(|p| {
            p.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .ok_or_else(|| CliError::Usage(format!("{}: not a file path", p.display())))
        })
        .collect::<Result<_, _>>()?;
    for (i, id) in ids.iter().enumerate() {
        if ids[..i].contains(id) {
            return Err(CliError::Usage(format!(
                "clip id `{id}` appears twice; rename one of the inputs"
            )));
        }
    }
    Ok(ids)
}

fn cmd_extract(
    config: &Path,
    out: &Path,
    stride: Option<u64>,
    detections: &[PathBuf],
) -> Result<(), CliError> {
    let mut timings = Timings::default();
    let (mut cfg, cfg_file) = load_config(config)?;
    if let Some(s) = stride {
        if s == 0 {
            return Err(CliError::Usage("--stride must be at least 1".into()));
        }
        cfg = cfg.with_stride(s).map_err(CliError::Config)?;
    }
    let ids = clip_ids(detections)?;

    let inputs: Vec<(InputFile, Vec<u8>)> = detections
        .iter()
        .map(|p| InputFile::read(p))
        .collect::<Result<_, _>>()?;
    let results: Vec<Result<ClipOutput, CliError>> = timings.time("pipeline", || {
        inputs
            .par_iter()
            .zip(&ids)
            .zip(detections)
            .map(|(((_, bytes), id), path)| {
                run_clip(id, BufReader::new(bytes.as_slice()), &cfg).map_err(|source| {
                    CliError::Ingest {
                        path: path.clone(),
                        source,
                    }
                })
            })
            .collect()
    });
    let clips: Vec<ClipOutput> = results.into_iter().collect::<Result<_, _>>()?;
    for c in &clips {
        c.counts
            .reconcile()
            .map_err(|e| CliError::Usage(format!("{}: {e}", c.clip_id)))?;
        for r in &c.rejected {
            eprintln!("warning: {}: line {}: {}", c.clip_id, r.line, r.reason);
        }
    }

    let mut dir = OutDir::create(out)?;
    timings.time("write", || -> Result<(), CliError> {
        let p = cfg.pixels_per_meter();
        let rows: Vec<_> = clips
            .iter()
            .flat_map(|c| track_rows(&c.clip_id, &c.tracks, p))
            .collect();
        dir.write("tracks.csv", &buffer(|b| write_track_csv(b, &rows)))?;
        let features = FeatureTable {
            rows: clips
                .iter()
                .flat_map(|c| c.features.rows.iter().cloned())
                .collect(),
        };
        dir.write("features.csv", &buffer(|b| features.write_csv(b)))
    })?;

    let mut m = manifest("extract");
    m.config = Some(cfg_file);
    m.inputs = inputs.into_iter().map(|(f, _)| f).collect();
    m.parameters = serde_json::json!({
        "stride": cfg.stride,
        "frame_interval_s": cfg.frame_interval(),
        "pixels_per_meter": cfg.pixels_per_meter(),
    });
    let summaries: Vec<ClipSummary> = clips
        .iter()
        .map(|c| ClipSummary {
            clip_id: &c.clip_id,
            counts: c.counts,
            rejected: c
                .rejected
                .iter()
                .map(|r| RejectedEntry {
                    line: r.line,
                    reason: r.reason.to_string(),
                })
                .collect(),
        })
        .collect();
    m.stages = serde_json::to_value(summaries).expect("serializable");
    dir.finish("extract_manifest.json", m, &timings)
}

fn parse_bounds(arg: &str) -> Result<OutlierBounds, CliError> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        fs::read_to_string(arg).map_err(io_err(Path::new(arg)))?
    };
    let b: OutlierBounds =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("--bounds: {e}")))?;
    b.validate()
        .map_err(|e| CliError::Usage(format!("--bounds: {e}")))?;
    Ok(b)
}

fn default_label(path: &Path, table: &FeatureTable) -> String {
    match table.rows.first() {
        Some(first) if table.rows.iter().all(|r| r.clip_id == first.clip_id) => {
            first.clip_id.clone()
        }
        _ => path.file_stem().map_or_else(
            || path.display().to_string(),
            |s| s.to_string_lossy().into_owned(),
        ),
    }
}

fn safe_name(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "-_.".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn cmd_analyze(
    config: Option<&Path>,
    out: &Path,
    bins: usize,
    bounds: Option<&str>,
    labels: &[String],
    features: &[PathBuf],
) -> Result<(), CliError> {
    let mut timings = Timings::default();
    if bins == 0 {
        return Err(CliError::Usage("--bins must be at least 1".into()));
    }
    if !labels.is_empty() && labels.len() != features.len() {
        return Err(CliError::Usage(format!(
            "{} labels given for {} feature files",
            labels.len(),
            features.len()
        )));
    }
    let mut m = manifest("analyze");
    let bounds = match (bounds, config) {
        (Some(b), _) => parse_bounds(b)?,
        (None, Some(c)) => {
            let (cfg, file) = load_config(c)?;
            m.config = Some(file);
            cfg.outlier_bounds
        }
        (None, None) => OutlierBounds::default(),
    };

    let mut tables = Vec::new();
    for (i, path) in features.iter().enumerate() {
        let (file, bytes) = InputFile::read(path)?;
        let table = FeatureTable::read_csv(bytes.as_slice()).map_err(|source| CliError::Csv {
            path: path.clone(),
            source,
        })?;
        let label = labels
            .get(i)
            .cloned()
            .unwrap_or_else(|| default_label(path, &table));
        if tables
            .iter()
            .any(|(l, _): &(String, _)| safe_name(l) == safe_name(&label))
        {
            return Err(CliError::Usage(format!(
                "report label `{label}` used twice; pass --label"
            )));
        }
        m.inputs.push(file);
        tables.push((label, table));
    }

    let reports: Vec<SummaryReport> = timings.time("summarize", || {
        tables
            .par_iter()
            .map(|(label, t)| {
                summarize(label, t, &bounds, bins).map_err(|source| CliError::Analysis {
                    label: label.clone(),
                    source,
                })
            })
            .collect::<Result<_, _>>()
    })?;

    let mut dir = OutDir::create(out)?;
    for r in &reports {
        let stem = safe_name(&r.label);
        dir.write(&format!("{stem}.report.json"), r.to_json().as_bytes())?;
        dir.write(&format!("{stem}.report.txt"), r.render_text().as_bytes())?;
        dir.write(
            &format!("{stem}.histograms.csv"),
            &buffer(|b| write_histogram_csv(b, r)),
        )?;
        dir.write(
            &format!("{stem}.boxplots.csv"),
            &buffer(|b| write_boxplot_csv(b, r)),
        )?;
    }
    if reports.len() > 1 {
        dir.write("comparison.txt", render_comparison(&reports).as_bytes())?;
    }
    m.parameters = serde_json::json!({ "bins": bins, "outlier_bounds": bounds });
    m.stages = serde_json::to_value(
        reports
            .iter()
            .map(
                |r| serde_json::json!({ "label": r.label, "filter": r.filter, "frames": r.frames }),
            )
            .collect::<Vec<_>>(),
    )
    .expect("serializable");
    dir.finish("analyze_manifest.json", m, &timings)
}

fn cmd_simulate(
    scene: &Path,
    out: &Path,
    seed: Option<u64>,
    clip_id: Option<&str>,
) -> Result<(), CliError> {
    let mut timings = Timings::default();
    let (file, bytes) = InputFile::read(scene)?;
    let mut spec: SceneSpec =
        serde_json::from_slice(&bytes).map_err(|e| CliError::Synth(e.into()))?;
    if seed.is_some() {
        spec.seed = seed;
    }
    let sim = timings
        .time("simulate", || simulate(&spec))
        .map_err(CliError::Synth)?;
    for c in &sim.clipped {
        eprintln!(
            "warning: agent {} left the image; {} samples clipped",
            c.agent, c.samples
        );
    }

    let clip_id = safe_name(&match clip_id {
        Some(c) => c.to_string(),
        None => scene
            .file_stem()
            .map_or_else(|| "scene".to_string(), |s| s.to_string_lossy().into_owned()),
    });
    let mut dir = OutDir::create(out)?;
    dir.write(
        &format!("{clip_id}.jsonl"),
        &buffer(|b| write_detections(b, &sim.frames)),
    )?;
    dir.write(
        "truth.csv",
        &buffer(|b| write_truth_csv(b, &clip_id, &sim.truth, sim.config.pixels_per_meter())),
    )?;
    dir.write("config.json", &to_json_bytes(&sim.config.to_file()))?;

    let mut m = manifest("simulate");
    m.inputs.push(file);
    m.parameters = serde_json::json!({ "seed": spec.seed, "noise_px": spec.noise_px, "dropout": spec.dropout });
    m.stages = serde_json::json!({
        "frames": sim.frames.frames.len(),
        "detections": sim.frames.detection_count(),
        "truth_samples": sim.truth.iter().map(Track::len).sum::<usize>(),
        "dropped": sim.dropped,
        "clipped": sim.clipped,
    });
    dir.finish("simulate_manifest.json", m, &timings)
}

fn tracks_from_rows(
    rows: impl IntoIterator<Item = (String, u64, crate::ingest::ObjectClass, u64, f64, f64)>,
    p: f64,
) -> BTreeMap<String, Vec<Track>> {
    let mut by_clip: BTreeMap<String, BTreeMap<u64, Track>> = BTreeMap::new();
    for (clip, id, class, frame, x_m, y_m) in rows {
        let t = by_clip
            .entry(clip)
            .or_default()
            .entry(id)
            .or_insert_with(|| Track {
                id,
                class,
                points: Vec::new(),
                status: TrackStatus::Terminated,
            });
        t.points.push(TrackPoint {
            frame,
            point: OverheadPoint::from_meters(x_m, y_m, p),
        });
    }
    by_clip
        .into_iter()
        .map(|(clip, tracks)| {
            let mut v: Vec<Track> = tracks.into_values().collect();
            for t in &mut v {
                t.points.sort_by_key(|q| q.frame);
            }
            (clip, v)
        })
        .collect()
}

fn cmd_evaluate(config: &Path, truth: &Path, tracks: &Path, gate_m: f64) -> Result<(), CliError> {
    let (cfg, _) = load_config(config)?;
    let p = cfg.pixels_per_meter();
    let csv_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CliError::Csv { path, source }
    };
    let truth_rows: Vec<TruthRow> = csv::Reader::from_reader(read_bytes(truth)?.as_slice())
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(csv_err(truth))?;
    let track_rows = read_track_csv(read_bytes(tracks)?.as_slice()).map_err(csv_err(tracks))?;

    let truth = tracks_from_rows(
        truth_rows
            .into_iter()
            .map(|r| (r.clip_id, r.track_id, r.class, r.frame, r.x_m, r.y_m)),
        p,
    );
    let recovered = tracks_from_rows(
        track_rows
            .into_iter()
            .map(|r| (r.clip_id, r.track_id, r.class, r.frame, r.x_m, r.y_m)),
        p,
    );
    let params = ScoreParams {
        pixels_per_meter: p,
        source_frame_interval: 1.0 / cfg.source_fps,
        gate_m,
    };
    let scores: BTreeMap<&String, _> = truth
        .iter()
        .map(|(clip, t)| {
            let rec = recovered.get(clip).map_or(&[][..], |v| v.as_slice());
            (clip, compare_to_truth(rec, t, &params))
        })
        .collect();
    let mut stdout = io::stdout().lock();
    stdout
        .write_all(&to_json_bytes(&scores))
        .map_err(io_err(Path::new("<stdout>")))
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Calibrate { config } => cmd_calibrate(&config),
        Command::Extract {
            config,
            out,
            stride,
            detections,
        } => cmd_extract(&config, &out, stride, &detections),
        Command::Analyze {
            config,
            out,
            bins,
            bounds,
            label,
            features,
        } => cmd_analyze(
            config.as_deref(),
            &out,
            bins,
            bounds.as_deref(),
            &label,
            &features,
        ),
        Command::Simulate {
            scene,
            out,
            seed,
            clip_id,
        } => cmd_simulate(&scene, &out, seed, clip_id.as_deref()),
        Command::Evaluate {
            config,
            truth,
            tracks,
            gate_m,
        } => cmd_evaluate(&config, &truth, &tracks, gate_m),
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::config::tests::spot_a;

    #[test]
    fn calibration_report_prints_constants() {
        let text = calibration_report(&spot_a());
        assert!(
            text.contains("F = stride / fps = 5 / 15 = 1/3 s = 0.333333 s"),
            "{text}"
        );
        assert!(text.contains("= 960 / 15 = 64 px/m"));
        assert!(text.contains("46 px/m"));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Usage(String::new()).exit_code(), 1);
        let cfg = CliError::Config(ConfigError::Invalid {
            field: "fps",
            reason: String::new(),
        });
        assert_eq!(cfg.exit_code(), 2);
        let ingest = CliError::Ingest {
            path: PathBuf::new(),
            source: IngestError::TooManyRejected {
                rejected: 2,
                total: 3,
                limit: 50.0,
            },
        };
        assert_eq!(ingest.exit_code(), 3);
        let empty = CliError::Analysis {
            label: String::new(),
            source: StatsError::NoUsableRows,
        };
        assert_eq!(empty.exit_code(), 4);
    }

    #[test]
    fn duplicate_clip_ids_are_refused() {
        let paths = [PathBuf::from("a/x.jsonl"), PathBuf::from("b/x.jsonl")];
        assert!(matches!(clip_ids(&paths), Err(CliError::Usage(_))));
    }

    #[test]
    fn help_exits_zero() {
        assert_eq!(main_with_args(["crosswalk", "--help"]), 0);
        assert_eq!(main_with_args(["crosswalk", "frobnicate"]), 1);
    }
}
