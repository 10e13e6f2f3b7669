//! k-fold cross-validation with per-fold transform refitting.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::confusion::ConfusionMatrix;
use super::metrics::{metrics, Metric};
use crate::data::stats::{mean, sample_std};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::learners::class_counts;
use crate::matrix::Matrix;
use crate::model::{Classifier, ModelSpec};
use crate::preprocess::{StageSpec, Transforms};
use crate::rng::{child_rng, derive_seed};

pub const DEFAULT_K: usize = 10;

/// Fold membership of every row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Folds {
    pub k: usize,
    pub fold_of: Vec<usize>,
    pub stratified: bool,
    pub warnings: Vec<String>,
}

impl Folds {
    /// Stratified assignment shuffles each class (one random stream per
    /// class), concatenates the classes in vocabulary order and deals rows to
    /// folds round-robin, so fold sizes differ by at most one. When some class
    /// has fewer than `k` members the assignment falls back to an unstratified
    /// shuffle and records a warning.
    pub fn new(labels: &[usize], n_classes: usize, k: usize, seed: u64, stratified: bool) -> Result<Self> {
        let n = labels.len();
        if k < 2 || k > n {
            return Err(Error::param(format!("k = {k} must lie in 2..={n}")));
        }
        let mut warnings = Vec::new();
        let counts = class_counts(labels, n_classes);
        let small = counts.iter().any(|&c| c > 0 && c < k);
        let use_strata = stratified && !small;
        if stratified && small {
            warnings.push(format!(
                "a class has fewer than {k} members; folds are not stratified"
            ));
        }
        let order: Vec<usize> = if use_strata {
            let mut by_class = vec![Vec::new(); n_classes];
            for (i, &l) in labels.iter().enumerate() {
                by_class[l].push(i);
            }
            by_class
                .into_iter()
                .enumerate()
                .flat_map(|(c, mut rows)| {
                    rows.shuffle(&mut child_rng(seed, c as u64));
                    rows
                })
                .collect()
        } else {
            let mut rows: Vec<usize> = (0..n).collect();
            rows.shuffle(&mut child_rng(seed, u64::MAX));
            rows
        };
        let mut fold_of = vec![0; n];
        for (pos, &row) in order.iter().enumerate() {
            fold_of[row] = pos % k;
        }
        Ok(Self { k, fold_of, stratified: use_strata, warnings })
    }

    pub fn test_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len()).filter(|&i| self.fold_of[i] == fold).collect()
    }

    pub fn train_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len()).filter(|&i| self.fold_of[i] != fold).collect()
    }
}

#[derive(Clone, Debug)]
struct PreparedFold {
    train_x: Matrix,
    train_y: Vec<usize>,
    test_x: Matrix,
    test_y: Vec<usize>,
}

/// Folds with their transforms already fitted on each training part, so
/// several models (or grid points) reuse the same transformed matrices.
#[derive(Clone, Debug)]
pub struct PreparedFolds {
    pub folds: Folds,
    pub classes: Vec<String>,
    data: Vec<PreparedFold>,
}

impl PreparedFolds {
    pub fn new(data: &Dataset, stages: &[StageSpec], folds: Folds) -> Result<Self> {
        if folds.fold_of.len() != data.n_rows() {
            return Err(Error::LengthMismatch { expected: data.n_rows(), got: folds.fold_of.len() });
        }
        let prepared = (0..folds.k)
            .into_par_iter()
            .map(|f| {
                let train = data.select_rows(&folds.train_rows(f));
                let test = data.select_rows(&folds.test_rows(f));
                let (transforms, train_t) = Transforms::fit(stages, &train)?;
                let test_t = transforms.apply(&test)?;
                Ok(PreparedFold {
                    train_x: train_t.to_matrix(),
                    train_y: train_t.labels().to_vec(),
                    test_x: test_t.to_matrix(),
                    test_y: test_t.labels().to_vec(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { folds, classes: data.class_vocab().to_vec(), data: prepared })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldScore {
    pub fold: usize,
    pub n_test: usize,
    pub weighted_f1: f64,
    pub macro_f1: f64,
    pub accuracy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub model: String,
    pub metric: Metric,
    /// Selected metric per fold.
    pub scores: Vec<f64>,
    pub folds: Vec<FoldScore>,
    pub mean: f64,
    /// Sample standard deviation over folds.
    pub std: f64,
    pub warnings: Vec<String>,
}

/// Fits `spec` on each prepared training part (seed derived per fold) and
/// scores the held-out part.
pub fn cv_prepared(spec: &ModelSpec, prepared: &PreparedFolds, metric: Metric, seed: u64) -> Result<CvResult> {
    let k = prepared.classes.len();
    let per_fold = prepared
        .data
        .par_iter()
        .enumerate()
        .map(|(f, d)| {
            let model = spec.fit(&d.train_x, &d.train_y, k, None, derive_seed(seed, f as u64))?;
            let pred = model.predict(&d.test_x);
            let m = metrics(&ConfusionMatrix::from_indices(&d.test_y, &pred, &prepared.classes)?)?;
            let score = FoldScore {
                fold: f,
                n_test: d.test_y.len(),
                weighted_f1: m.weighted_avg.f1,
                macro_f1: m.macro_avg.f1,
                accuracy: m.accuracy,
            };
            Ok((metric.of(&m), score, model.warnings()))
        })
        .collect::<Result<Vec<_>>>()?;
    let scores: Vec<f64> = per_fold.iter().map(|p| p.0).collect();
    let mut warnings = prepared.folds.warnings.clone();
    for (f, (_, _, w)) in per_fold.iter().enumerate() {
        warnings.extend(w.iter().map(|m| format!("fold {f}: {m}")));
    }
    warnings.dedup();
    Ok(CvResult {
        model: spec.describe(),
        metric,
        mean: mean(&scores),
        std: sample_std(&scores),
        scores,
        folds: per_fold.into_iter().map(|p| p.1).collect(),
        warnings,
    })
}

pub fn kfold_cv(
    spec: &ModelSpec,
    stages: &[StageSpec],
    data: &Dataset,
    k: usize,
    seed: u64,
    stratified: bool,
) -> Result<CvResult> {
    let folds = Folds::new(data.labels(), data.n_classes(), k, seed, stratified)?;
    let prepared = PreparedFolds::new(data, stages, folds)?;
    cv_prepared(spec, &prepared, Metric::WeightedF1, seed)
}
