//! Preprocessing and summary statistics over feature tables.
//!
//! Quantiles use linear interpolation between order statistics
//! (Hyndman–Fan type 7). Correlations are Pearson r over pairwise-complete
//! rows.

mod describe;
mod frames;
mod report;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{FeatureRecord, FeatureTable};

pub use describe::{
    boxplot_summary, describe, histogram, minmax_normalize, pearson, pearson_matrix,
    quantile_sorted, CorrelationMatrix, Describe, FiveNumber, Histogram, Normalized,
};
pub use frames::{frame_table, Feature, FrameRow};
pub use report::{
    render_comparison, summarize, write_boxplot_csv, write_histogram_csv, FeatureSummary,
    SummaryReport,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("empty series")]
    EmptySeries,
    #[error("bin count must be at least 1")]
    ZeroBins,
    #[error("series contains a non-finite value")]
    NonFinite,
    #[error("no usable rows after outlier filtering")]
    NoUsableRows,
}

fn default_speed_bounds() -> Option<[f64; 2]> {
    Some([0.0, 120.0])
}

fn default_accel_bounds() -> Option<[f64; 2]> {
    Some([-15.0, 15.0])
}

fn default_dist_bounds() -> Option<[f64; 2]> {
    Some([0.0, 50.0])
}

/// Inclusive `[min, max]` bounds per feature; `null` disables a bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutlierBounds {
    #[serde(default = "default_speed_bounds")]
    pub speed_kmh: Option<[f64; 2]>,
    #[serde(default = "default_accel_bounds")]
    pub accel_kmh_per_s: Option<[f64; 2]>,
    #[serde(default = "default_dist_bounds")]
    pub dist_m: Option<[f64; 2]>,
}

impl Default for OutlierBounds {
    fn default() -> Self {
        Self {
            speed_kmh: default_speed_bounds(),
            accel_kmh_per_s: default_accel_bounds(),
            dist_m: default_dist_bounds(),
        }
    }
}

impl OutlierBounds {
    pub fn validate(&self) -> Result<(), String> {
        for (name, b) in [
            ("speed_kmh", self.speed_kmh),
            ("accel_kmh_per_s", self.accel_kmh_per_s),
            ("dist_m", self.dist_m),
        ] {
            if let Some([lo, hi]) = b {
                if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                    return Err(format!("{name} bounds must be finite with min <= max"));
                }
            }
        }
        Ok(())
    }
}

fn outside(v: Option<f64>, b: Option<[f64; 2]>) -> bool {
    match (v, b) {
        (Some(v), Some([lo, hi])) => !(lo..=hi).contains(&v),
        _ => false,
    }
}

/// Per-feature counts of out-of-bound values, plus rows dropped overall.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DropCounts {
    pub rows_before: usize,
    pub rows_after: usize,
    pub speed_kmh: usize,
    pub accel_kmh_per_s: usize,
    pub dist_m: usize,
}

/// Drops every row with a present feature outside its bound.
pub fn filter_outliers(table: &FeatureTable, bounds: &OutlierBounds) -> (FeatureTable, DropCounts) {
    let mut counts = DropCounts {
        rows_before: table.len(),
        ..DropCounts::default()
    };
    let kept: Vec<FeatureRecord> = table
        .rows
        .iter()
        .filter(|r| {
            let s = outside(Some(r.speed_kmh), bounds.speed_kmh);
            let a = outside(r.accel_kmh_per_s, bounds.accel_kmh_per_s);
            let d = outside(r.dist_m, bounds.dist_m);
            counts.speed_kmh += usize::from(s);
            counts.accel_kmh_per_s += usize::from(a);
            counts.dist_m += usize::from(d);
            !(s || a || d)
        })
        .cloned()
        .collect();
    counts.rows_after = kept.len();
    (FeatureTable { rows: kept }, counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::ObjectClass;

    fn row(speed: f64, accel: Option<f64>, dist: Option<f64>) -> FeatureRecord {
        FeatureRecord {
            clip_id: "c".into(),
            frame: 0,
            track_id: 1,
            class: ObjectClass::Vehicle,
            speed_kmh: speed,
            accel_kmh_per_s: accel,
            dist_m: dist,
        }
    }

    #[test]
    fn observed_maximum_speed_survives_defaults() {
        let t = FeatureTable {
            rows: vec![
                row(89.6, Some(-11.9), Some(3.0)),
                row(200.0, None, None),
                row(10.0, Some(10.0), None),
            ],
        };
        let (kept, counts) = filter_outliers(&t, &OutlierBounds::default());
        assert_eq!(kept.rows.len(), 2);
        assert_eq!(kept.rows[0].speed_kmh, 89.6);
        assert_eq!(counts.speed_kmh, 1);
        assert_eq!((counts.rows_before, counts.rows_after), (3, 2));
    }

    #[test]
    fn in_bound_table_is_unchanged_and_filter_idempotent() {
        let t = FeatureTable {
            rows: vec![
                row(1.0, Some(0.0), Some(2.0)),
                row(120.0, Some(-15.0), Some(50.0)),
            ],
        };
        let (kept, _) = filter_outliers(&t, &OutlierBounds::default());
        assert_eq!(kept, t);
        let noisy = FeatureTable {
            rows: vec![
                row(1.0, Some(-40.0), None),
                row(3.0, None, Some(80.0)),
                row(5.0, None, None),
            ],
        };
        let (once, c) = filter_outliers(&noisy, &OutlierBounds::default());
        assert_eq!((c.accel_kmh_per_s, c.dist_m), (1, 1));
        assert_eq!(filter_outliers(&once, &OutlierBounds::default()).0, once);
    }

    #[test]
    fn bounds_json_defaults_and_null() {
        let b: OutlierBounds =
            serde_json::from_str(r#"{"speed_kmh": [0, 60], "dist_m": null}"#).unwrap();
        assert_eq!(b.speed_kmh, Some([0.0, 60.0]));
        assert_eq!(b.accel_kmh_per_s, Some([-15.0, 15.0]));
        assert_eq!(b.dist_m, None);
        let bad = OutlierBounds {
            speed_kmh: Some([5.0, 1.0]),
            ..OutlierBounds::default()
        };
        assert!(bad.validate().is_err());
    }
}
