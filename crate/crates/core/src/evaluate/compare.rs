//! Side-by-side cross-validation of several model specs on shared folds.

use serde::{Deserialize, Serialize};

use super::cv::{cv_prepared, Folds, PreparedFolds};
use super::metrics::Metric;
use crate::data::stats::{boxplot_stats, BoxplotStats};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::preprocess::StageSpec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub rank: usize,
    pub model: String,
    pub spec: String,
    pub mean: f64,
    pub std: f64,
    pub scores: Vec<f64>,
    pub box_stats: BoxplotStats,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub model: String,
    pub spec: String,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub k: usize,
    pub stratified: bool,
    pub metric: Metric,
    /// Ranked by mean score, best first; equal means keep roster order.
    pub rows: Vec<ComparisonRow>,
    pub failures: Vec<Failure>,
}

pub fn compare(
    specs: &[ModelSpec],
    stages: &[StageSpec],
    data: &Dataset,
    k: usize,
    seed: u64,
    stratified: bool,
) -> Result<Comparison> {
    let folds = Folds::new(data.labels(), data.n_classes(), k, seed, stratified)?;
    let prepared = PreparedFolds::new(data, stages, folds)?;
    compare_prepared(specs, &prepared, Metric::WeightedF1, seed)
}

/// Every spec sees the same folds and the same per-fold seeds. A spec that
/// fails to fit is listed under `failures` instead of aborting the run.
pub fn compare_prepared(
    specs: &[ModelSpec],
    prepared: &PreparedFolds,
    metric: Metric,
    seed: u64,
) -> Result<Comparison> {
    if specs.is_empty() {
        return Err(Error::param("no models to compare"));
    }
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for spec in specs {
        match cv_prepared(spec, prepared, metric, seed) {
            Ok(r) => rows.push(ComparisonRow {
                rank: 0,
                model: spec.label().to_string(),
                spec: spec.describe(),
                mean: r.mean,
                std: r.std,
                box_stats: boxplot_stats(&r.scores)?,
                scores: r.scores,
                warnings: r.warnings,
            }),
            Err(e) => failures.push(Failure {
                model: spec.label().to_string(),
                spec: spec.describe(),
                reason: e.to_string(),
            }),
        }
    }
    rows.sort_by(|a, b| b.mean.total_cmp(&a.mean));
    for (i, r) in rows.iter_mut().enumerate() {
        r.rank = i + 1;
    }
    Ok(Comparison { k: prepared.folds.k, stratified: prepared.folds.stratified, metric, rows, failures })
}

impl Comparison {
    pub fn rank_of(&self, model: &str) -> Option<usize> {
        self.rows.iter().find(|r| r.model == model).map(|r| r.rank)
    }

    /// Aligned ranking table.
    pub fn to_text(&self) -> String {
        let w = self.rows.iter().map(|r| r.model.len()).max().unwrap_or(5).max(5);
        let mut s = format!("{:>4}  {:w$}  {:>8}  {:>8}\n", "rank", "model", "mean", "std");
        for r in &self.rows {
            s += &format!("{:>4}  {:w$}  {:>8.4}  {:>8.4}\n", r.rank, r.model, r.mean, r.std);
        }
        for f in &self.failures {
            s += &format!("{:>4}  {:w$}  failed: {}\n", "-", f.model, f.reason);
        }
        s
    }

    /// `rank,model,spec,mean,std` at full precision.
    pub fn ranking_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["rank", "model", "spec", "mean", "std"])?;
        for r in &self.rows {
            w.write_record([r.rank.to_string(), r.model.clone(), r.spec.clone(), r.mean.to_string(), r.std.to_string()])?;
        }
        finish(w)
    }

    /// One row per fold, one column per model (roster order as ranked):
    /// the layout box-plot tools expect.
    pub fn fold_scores_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["fold".to_string()];
        header.extend(self.rows.iter().map(|r| r.model.clone()));
        w.write_record(&header)?;
        for f in 0..self.k {
            let mut rec = vec![f.to_string()];
            rec.extend(self.rows.iter().map(|r| r.scores[f].to_string()));
            w.write_record(&rec)?;
        }
        finish(w)
    }

    /// `model,q25,q50,q75,whisker_lo,whisker_hi,n_outliers`.
    pub fn box_stats_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["model", "q25", "q50", "q75", "whisker_lo", "whisker_hi", "n_outliers"])?;
        for r in &self.rows {
            let b = &r.box_stats;
            w.write_record([
                r.model.clone(),
                b.q25.to_string(),
                b.q50.to_string(),
                b.q75.to_string(),
                b.whisker_lo.to_string(),
                b.whisker_hi.to_string(),
                b.outliers.len().to_string(),
            ])?;
        }
        finish(w)
    }
}

pub(crate) fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::InvalidData(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::InvalidData(e.to_string()))
}
