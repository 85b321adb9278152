use std::fmt::Write as _;
use std::io::{self, Write};

use serde::Serialize;

use super::{
    boxplot_summary, describe, filter_outliers, frame_table, histogram, minmax_normalize,
    pearson_matrix, CorrelationMatrix, Describe, DropCounts, Feature, FiveNumber, Histogram,
    OutlierBounds, StatsError,
};
use crate::features::FeatureTable;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureSummary {
    pub feature: Feature,
    pub stats: Describe,
    pub histogram: Histogram,
    pub boxplot: FiveNumber,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryReport {
    pub label: String,
    pub bounds: OutlierBounds,
    pub filter: DropCounts,
    /// Number of (clip, frame) rows used for correlation.
    pub frames: usize,
    pub features: Vec<FeatureSummary>,
    /// Features with no values after filtering.
    pub missing_features: Vec<Feature>,
    /// Columns whose values are all equal; their correlations are undefined.
    pub constant_features: Vec<Feature>,
    pub correlation: CorrelationMatrix,
}

/// Filters outliers, then computes per-feature statistics and the correlation
/// matrix over min-max normalized per-frame columns.
/// (object, statistic, feature, accessor) of one comparison table row.
type TableRow = (&'static str, &'static str, Feature, fn(&Describe) -> f64);

pub fn summarize(
    label: &str,
    table: &FeatureTable,
    bounds: &OutlierBounds,
    bins: usize,
) -> Result<SummaryReport, StatsError> {
    if bins == 0 {
        return Err(StatsError::ZeroBins);
    }
    let (kept, filter) = filter_outliers(table, bounds);
    if kept.is_empty() {
        return Err(StatsError::NoUsableRows);
    }

    let mut features = Vec::new();
    let mut missing_features = Vec::new();
    for f in Feature::ALL {
        let values = f.values(&kept);
        if values.is_empty() {
            missing_features.push(f);
            continue;
        }
        features.push(FeatureSummary {
            feature: f,
            stats: describe(&values)?,
            histogram: histogram(&values, bins)?,
            boxplot: boxplot_summary(&values)?,
        });
    }

    let rows = frame_table(&kept);
    let mut constant_features = Vec::new();
    let mut columns = Vec::new();
    for f in Feature::ALL {
        let raw: Vec<Option<f64>> = rows.iter().map(|r| r.get(f)).collect();
        let present: Vec<f64> = raw.iter().flatten().copied().collect();
        if present.is_empty() {
            columns.push(raw);
            continue;
        }
        let norm = minmax_normalize(&present)?;
        if norm.constant {
            constant_features.push(f);
        }
        let mut it = norm.values.into_iter();
        columns.push(raw.iter().map(|v| v.and_then(|_| it.next())).collect());
    }
    let names: Vec<&str> = Feature::ALL.iter().map(|f| f.column()).collect();

    Ok(SummaryReport {
        label: label.to_string(),
        bounds: *bounds,
        filter,
        frames: rows.len(),
        features,
        missing_features,
        constant_features,
        correlation: pearson_matrix(&names, &columns),
    })
}

impl SummaryReport {
    pub fn feature(&self, f: Feature) -> Option<&FeatureSummary> {
        self.features.iter().find(|s| s.feature == f)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Human-readable report: min/max/average block, boxplots and correlations.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let f = &self.filter;
        let _ = writeln!(out, "Report: {}", self.label);
        let _ = writeln!(
            out,
            "Records: {} before filtering, {} after (out of bounds: speed {}, acceleration {}, distance {})",
            f.rows_before, f.rows_after, f.speed_kmh, f.accel_kmh_per_s, f.dist_m
        );
        let _ = writeln!(out, "Frames: {}\n", self.frames);
        out.push_str(&render_stat_block(std::slice::from_ref(self)));

        let _ = writeln!(out, "\nBoxplots");
        let _ = writeln!(
            out,
            "{:<32}{:>10}{:>10}{:>10}{:>10}{:>10}{:>8}",
            "Feature", "min", "Q1", "median", "Q3", "max", "fliers"
        );
        for s in &self.features {
            let b = &s.boxplot;
            let _ = writeln!(
                out,
                "{:<32}{:>10.2}{:>10.2}{:>10.2}{:>10.2}{:>10.2}{:>8}",
                s.feature.label(),
                b.min,
                b.q1,
                b.median,
                b.q3,
                b.max,
                b.fliers.len()
            );
        }

        let _ = writeln!(out, "\nCorrelation (Pearson r, pairwise-complete frames)");
        out.push_str(&render_matrix(&self.correlation));
        out
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.2}"))
}

fn render_stat_block(reports: &[SummaryReport]) -> String {
    let mut out = String::new();
    let _ = write!(out, "{:<12}{:<36}", "Object", "Statistic");
    for r in reports {
        let _ = write!(out, "{:>14}", r.label);
    }
    out.push('\n');
    let rows: [TableRow; 12] = [
        ("Vehicle", "Min. speed (km/h)", Feature::VehicleSpeed, |d| {
            d.min
        }),
        ("", "Max. speed (km/h)", Feature::VehicleSpeed, |d| d.max),
        ("", "Avg. speed (km/h)", Feature::VehicleSpeed, |d| d.mean),
        (
            "",
            "Min. acceleration (km/h/s)",
            Feature::VehicleAcceleration,
            |d| d.min,
        ),
        (
            "",
            "Max. acceleration (km/h/s)",
            Feature::VehicleAcceleration,
            |d| d.max,
        ),
        (
            "",
            "Avg. acceleration (km/h/s)",
            Feature::VehicleAcceleration,
            |d| d.mean,
        ),
        (
            "Pedestrian",
            "Min. speed (km/h)",
            Feature::PedestrianSpeed,
            |d| d.min,
        ),
        ("", "Max. speed (km/h)", Feature::PedestrianSpeed, |d| d.max),
        ("", "Avg. speed (km/h)", Feature::PedestrianSpeed, |d| {
            d.mean
        }),
        (
            "Interaction",
            "Min. distance (m)",
            Feature::VehiclePedestrianDistance,
            |d| d.min,
        ),
        (
            "",
            "Max. distance (m)",
            Feature::VehiclePedestrianDistance,
            |d| d.max,
        ),
        (
            "",
            "Avg. distance (m)",
            Feature::VehiclePedestrianDistance,
            |d| d.mean,
        ),
    ];
    for (object, stat, feature, pick) in rows {
        let _ = write!(out, "{object:<12}{stat:<36}");
        for r in reports {
            let _ = write!(
                out,
                "{:>14}",
                fmt_opt(r.feature(feature).map(|s| pick(&s.stats)))
            );
        }
        out.push('\n');
    }
    out
}

fn render_matrix(m: &CorrelationMatrix) -> String {
    let mut out = String::new();
    let _ = write!(out, "{:<28}", "");
    for c in &m.columns {
        let _ = write!(out, "{:>28}", c);
    }
    out.push('\n');
    for (name, row) in m.columns.iter().zip(&m.r) {
        let _ = write!(out, "{name:<28}");
        for v in row {
            let _ = write!(out, "{:>28}", fmt_opt(*v));
        }
        out.push('\n');
    }
    out
}

/// Side-by-side statistics for several sites plus each correlation matrix.
pub fn render_comparison(reports: &[SummaryReport]) -> String {
    let mut out = String::new();
    out.push_str(&render_stat_block(reports));
    for r in reports {
        let _ = writeln!(out, "\nCorrelation: {}", r.label);
        out.push_str(&render_matrix(&r.correlation));
    }
    out
}

#[derive(Serialize)]
struct HistogramRow<'a> {
    label: &'a str,
    feature: Feature,
    bin: usize,
    lower: f64,
    upper: f64,
    count: usize,
}

/// One row per bin: `label, feature, bin, lower, upper, count`.
pub fn write_histogram_csv<W: Write>(w: W, report: &SummaryReport) -> io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    if report.features.is_empty() {
        out.write_record(["label", "feature", "bin", "lower", "upper", "count"])?;
    }
    for s in &report.features {
        let h = &s.histogram;
        for (bin, &count) in h.counts.iter().enumerate() {
            out.serialize(HistogramRow {
                label: &report.label,
                feature: s.feature,
                bin,
                lower: h.edges[bin],
                upper: h.edges[bin + 1],
                count,
            })?;
        }
    }
    out.flush()
}

#[derive(Serialize)]
struct BoxplotRow<'a> {
    label: &'a str,
    feature: Feature,
    n: usize,
    min: f64,
    q1: f64,
    median: f64,
    q3: f64,
    max: f64,
    lower_fence: f64,
    upper_fence: f64,
    whisker_low: f64,
    whisker_high: f64,
    fliers: usize,
}

pub fn write_boxplot_csv<W: Write>(w: W, report: &SummaryReport) -> io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    if report.features.is_empty() {
        out.write_record([
            "label",
            "feature",
            "n",
            "min",
            "q1",
            "median",
            "q3",
            "max",
            "lower_fence",
            "upper_fence",
            "whisker_low",
            "whisker_high",
            "fliers",
        ])?;
    }
    for s in &report.features {
        let b = &s.boxplot;
        out.serialize(BoxplotRow {
            label: &report.label,
            feature: s.feature,
            n: s.stats.n,
            min: b.min,
            q1: b.q1,
            median: b.median,
            q3: b.q3,
            max: b.max,
            lower_fence: b.lower_fence,
            upper_fence: b.upper_fence,
            whisker_low: b.whisker_low,
            whisker_high: b.whisker_high,
            fliers: b.fliers.len(),
        })?;
    }
    out.flush()
}
