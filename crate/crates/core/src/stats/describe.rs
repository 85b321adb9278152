use serde::Serialize;

use super::StatsError;

fn check(series: &[f64]) -> Result<(), StatsError> {
    if series.is_empty() {
        return Err(StatsError::EmptySeries);
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Describe {
    pub n: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

pub fn describe(series: &[f64]) -> Result<Describe, StatsError> {
    check(series)?;
    Ok(Describe {
        n: series.len(),
        min: series.iter().copied().fold(f64::INFINITY, f64::min),
        max: series.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean: series.iter().sum::<f64>() / series.len() as f64,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    pub values: Vec<f64>,
    /// All inputs were equal; `values` is all zeros.
    pub constant: bool,
}

/// Affine rescale to [0, 1]: `(d - min) / (max - min)`.
pub fn minmax_normalize(series: &[f64]) -> Result<Normalized, StatsError> {
    let d = describe(series)?;
    let range = d.max - d.min;
    if range == 0.0 {
        return Ok(Normalized {
            values: vec![0.0; series.len()],
            constant: true,
        });
    }
    Ok(Normalized {
        values: series.iter().map(|v| (v - d.min) / range).collect(),
        constant: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    /// `counts.len() + 1` edges.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

/// Equal-width bins over [min, max]; the last bin is closed on the right.
pub fn histogram(series: &[f64], bin_count: usize) -> Result<Histogram, StatsError> {
    if bin_count == 0 {
        return Err(StatsError::ZeroBins);
    }
    let d = describe(series)?;
    let range = d.max - d.min;
    let width = range / bin_count as f64;
    let edges = (0..=bin_count)
        .map(|i| {
            if i == bin_count {
                d.max
            } else {
                d.min + width * i as f64
            }
        })
        .collect();
    let mut counts = vec![0usize; bin_count];
    for v in series {
        let bin = if range == 0.0 {
            0
        } else {
            (((v - d.min) / range * bin_count as f64) as usize).min(bin_count - 1)
        };
        counts[bin] += 1;
    }
    Ok(Histogram { edges, counts })
}

/// Type-7 quantile of an ascending slice, `p` in [0, 1].
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty slice");
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    match sorted.get(lo + 1) {
        Some(&next) if frac > 0.0 => sorted[lo] + frac * (next - sorted[lo]),
        _ => sorted[lo],
    }
}

/// Boxplot statistics: quartiles, Tukey fences at 1.5·IQR, whisker ends and fliers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiveNumber {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub iqr: f64,
    pub lower_fence: f64,
    pub upper_fence: f64,
    /// Most extreme data points inside the fences.
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub fliers: Vec<f64>,
}

pub fn boxplot_summary(series: &[f64]) -> Result<FiveNumber, StatsError> {
    check(series)?;
    let mut s = series.to_vec();
    s.sort_by(f64::total_cmp);
    let q1 = quantile_sorted(&s, 0.25);
    let q3 = quantile_sorted(&s, 0.75);
    let iqr = q3 - q1;
    let lower_fence = q1 - 1.5 * iqr;
    let upper_fence = q3 + 1.5 * iqr;
    let inside = |v: &&f64| (lower_fence..=upper_fence).contains(*v);
    Ok(FiveNumber {
        min: s[0],
        q1,
        median: quantile_sorted(&s, 0.5),
        q3,
        max: s[s.len() - 1],
        iqr,
        lower_fence,
        upper_fence,
        whisker_low: *s
            .iter()
            .find(inside)
            .expect("quartiles lie inside the fences"),
        whisker_high: *s
            .iter()
            .rev()
            .find(inside)
            .expect("quartiles lie inside the fences"),
        fliers: s
            .iter()
            .copied()
            .filter(|v| !(lower_fence..=upper_fence).contains(v))
            .collect(),
    })
}

/// Pearson r of paired samples; `None` when fewer than two pairs or either
/// side is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len(), "paired samples");
    let n = x.len();
    if n < 2 || x.iter().all(|v| *v == x[0]) || y.iter().all(|v| *v == y[0]) {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationMatrix {
    pub columns: Vec<String>,
    /// `None` marks an undefined entry (constant column or < 2 complete pairs).
    pub r: Vec<Vec<Option<f64>>>,
    /// Pairwise-complete row counts.
    pub n: Vec<Vec<usize>>,
}

impl CorrelationMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.columns.iter().position(|c| c == a)?;
        let j = self.columns.iter().position(|c| c == b)?;
        self.r[i][j]
    }
}

/// Symmetric Pearson matrix over pairwise-complete rows of equally long
/// columns. Diagonal entries are exactly 1 for non-constant columns.
pub fn pearson_matrix(names: &[&str], columns: &[Vec<Option<f64>>]) -> CorrelationMatrix {
    assert_eq!(names.len(), columns.len());
    let k = columns.len();
    let mut r = vec![vec![None; k]; k];
    let mut n = vec![vec![0; k]; k];
    for i in 0..k {
        for j in i..k {
            let (x, y): (Vec<f64>, Vec<f64>) = columns[i]
                .iter()
                .zip(&columns[j])
                .filter_map(|(a, b)| Some(((*a)?, (*b)?)))
                .filter(|(a, b)| a.is_finite() && b.is_finite())
                .unzip();
            let v = pearson(&x, &y).map(|v| if i == j { 1.0 } else { v });
            r[i][j] = v;
            r[j][i] = v;
            n[i][j] = x.len();
            n[j][i] = x.len();
        }
    }
    CorrelationMatrix {
        columns: names.iter().map(|s| s.to_string()).collect(),
        r,
        n,
    }
}
