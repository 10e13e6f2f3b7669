//! Exploratory statistics over dataset columns.

use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};

/// Quantile of already-sorted data by linear interpolation between the
/// closest order statistics (position `q * (n - 1)`).
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    assert!(n > 0, "quantile of empty slice");
    let pos = q.clamp(0.0, 1.0) * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    if lo == hi || frac == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] + (sorted[hi] - sorted[lo]) * frac
    }
}

pub(crate) fn sorted_copy(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (n - 1 denominator); 0 for a single value.
pub(crate) fn sample_std(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (n - 1) as f64).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnSummary {
    pub name: String,
    pub count: usize,
    pub mean: f64,
    pub std_dev: f64,
    /// Delta degrees of freedom used for `std_dev` (1 = sample estimate).
    pub std_ddof: u8,
    pub min: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub max: f64,
}

impl ColumnSummary {
    pub fn of(name: &str, values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty);
        }
        let sorted = sorted_copy(values);
        Ok(Self {
            name: name.to_string(),
            count: values.len(),
            mean: mean(values),
            std_dev: sample_std(values),
            std_ddof: 1,
            min: sorted[0],
            q25: quantile(&sorted, 0.25),
            q50: quantile(&sorted, 0.5),
            q75: quantile(&sorted, 0.75),
            max: sorted[sorted.len() - 1],
        })
    }
}

/// One summary row per feature column, in schema order.
pub fn describe(data: &Dataset) -> Result<Vec<ColumnSummary>> {
    if data.n_rows() == 0 {
        return Err(Error::Empty);
    }
    data.names()
        .iter()
        .zip(data.columns())
        .map(|(n, c)| ColumnSummary::of(n, c))
        .collect()
}

/// Pearson correlation of two equal-length series; `None` when either has
/// zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let mx = mean(x);
    let my = mean(y);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub names: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl CorrelationMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }
}

/// Symmetric Pearson matrix over all feature columns, unit diagonal.
pub fn pearson_matrix(data: &Dataset) -> Result<CorrelationMatrix> {
    if data.n_rows() == 0 {
        return Err(Error::Empty);
    }
    let p = data.n_features();
    // centre and normalise once; each entry is then a dot product
    let mut normed = Vec::with_capacity(p);
    for (name, col) in data.names().iter().zip(data.columns()) {
        let m = mean(col);
        let centred: Vec<f64> = col.iter().map(|v| v - m).collect();
        let norm = centred.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::ZeroVariance(name.clone()));
        }
        normed.push(centred.into_iter().map(|v| v / norm).collect::<Vec<_>>());
    }
    let mut values = vec![vec![0.0; p]; p];
    for i in 0..p {
        values[i][i] = 1.0;
        for j in i + 1..p {
            let r: f64 = normed[i].iter().zip(&normed[j]).map(|(a, b)| a * b).sum();
            let r = r.clamp(-1.0, 1.0);
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    Ok(CorrelationMatrix {
        names: data.names().to_vec(),
        values,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassCount {
    pub name: String,
    pub count: usize,
    pub fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassDistribution {
    pub n_rows: usize,
    pub classes: Vec<ClassCount>,
}

pub fn class_distribution(data: &Dataset) -> Result<ClassDistribution> {
    let n = data.n_rows();
    if n == 0 {
        return Err(Error::Empty);
    }
    let mut counts = vec![0usize; data.n_classes()];
    for &l in data.labels() {
        counts[l] += 1;
    }
    Ok(ClassDistribution {
        n_rows: n,
        classes: data
            .class_vocab()
            .iter()
            .zip(counts)
            .map(|(name, count)| ClassCount {
                name: name.clone(),
                count,
                fraction: count as f64 / n as f64,
            })
            .collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

/// Equal-width bins over `[min, max]`; the last bin is closed on the right.
/// A constant column yields one zero-width bin holding every value.
pub fn histogram(values: &[f64], n_bins: usize) -> Result<Vec<HistogramBin>> {
    if values.is_empty() {
        return Err(Error::Empty);
    }
    if n_bins == 0 {
        return Err(Error::param("histogram needs at least one bin"));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        return Ok(vec![HistogramBin {
            lo,
            hi,
            count: values.len(),
        }]);
    }
    let width = (hi - lo) / n_bins as f64;
    let mut counts = vec![0usize; n_bins];
    for &v in values {
        let b = (((v - lo) / width) as usize).min(n_bins - 1);
        counts[b] += 1;
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(b, count)| HistogramBin {
            lo: lo + width * b as f64,
            hi: if b + 1 == n_bins { hi } else { lo + width * (b + 1) as f64 },
            count,
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxplotStats {
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub whisker_lo: f64,
    pub whisker_hi: f64,
    pub outliers: Vec<f64>,
}

/// Box-and-whisker summary: whiskers reach the most extreme data points
/// within 1.5 IQR of the box; everything beyond is listed as an outlier.
pub fn boxplot_stats(values: &[f64]) -> Result<BoxplotStats> {
    if values.is_empty() {
        return Err(Error::Empty);
    }
    let sorted = sorted_copy(values);
    let q25 = quantile(&sorted, 0.25);
    let q50 = quantile(&sorted, 0.5);
    let q75 = quantile(&sorted, 0.75);
    let iqr = q75 - q25;
    let (fence_lo, fence_hi) = (q25 - 1.5 * iqr, q75 + 1.5 * iqr);
    let inside = sorted.iter().filter(|&&v| v >= fence_lo && v <= fence_hi);
    let whisker_lo = inside.clone().next().copied().unwrap_or(q25);
    let whisker_hi = inside.last().copied().unwrap_or(q75);
    let outliers = sorted
        .iter()
        .copied()
        .filter(|&v| v < fence_lo || v > fence_hi)
        .collect();
    Ok(BoxplotStats {
        q25,
        q50,
        q75,
        whisker_lo,
        whisker_hi,
        outliers,
    })
}
