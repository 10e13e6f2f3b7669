//! Feature importance by drop-column refitting and by held-out permutation,
//! both measured as the drop in a metric relative to the full model.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::evaluate::compare::finish;
use crate::evaluate::Metric;
use crate::model::ModelSpec;
use crate::preprocess::{Pipeline, StageSpec};
use crate::rng::{child_rng, derive_seed};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImportanceMethod {
    DropColumn,
    Permutation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportance {
    pub feature: String,
    pub score_without: f64,
    /// `baseline - score_without`; negative when losing the feature helps.
    pub delta: f64,
    /// Per-repeat shuffled scores (permutation only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub repeat_scores: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub method: ImportanceMethod,
    pub metric: Metric,
    pub baseline: f64,
    /// Sorted by descending delta; equal deltas keep schema order.
    pub features: Vec<FeatureImportance>,
    pub n_repeats: Option<usize>,
    pub seed: Option<u64>,
    /// Features whose refit failed, with the reason.
    pub failures: Vec<(String, String)>,
}

impl ImportanceReport {
    pub fn get(&self, feature: &str) -> Option<&FeatureImportance> {
        self.features.iter().find(|f| f.feature == feature)
    }

    /// `rank,feature,delta,score_without,baseline`, ready for a horizontal
    /// bar chart.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["rank", "feature", "delta", "score_without", "baseline"])?;
        for (i, f) in self.features.iter().enumerate() {
            w.write_record([
                (i + 1).to_string(),
                f.feature.clone(),
                f.delta.to_string(),
                f.score_without.to_string(),
                self.baseline.to_string(),
            ])?;
        }
        finish(w)
    }

    pub fn to_text(&self) -> String {
        let w = self.features.iter().map(|f| f.feature.len()).max().unwrap_or(7).max(7);
        let mut s = format!("baseline {:.4}\n{:w$}  {:>8}  {:>8}\n", self.baseline, "feature", "delta", "without");
        for f in &self.features {
            s += &format!("{:w$}  {:>8.4}  {:>8.4}\n", f.feature, f.delta, f.score_without);
        }
        for (name, why) in &self.failures {
            s += &format!("{name:w$}  failed: {why}\n");
        }
        s
    }
}

fn score_pipeline(p: &Pipeline, test: &Dataset, metric: Metric) -> Result<f64> {
    metric.score(test.labels(), &p.predict(test)?, test.class_vocab())
}

fn sort_desc(features: &mut [FeatureImportance]) {
    features.sort_by(|a, b| b.delta.total_cmp(&a.delta));
}

/// Refits the whole pipeline once per feature with that feature removed and
/// scores each refit on `test`.
pub fn drop_column_importance(
    spec: &ModelSpec,
    stages: &[StageSpec],
    train: &Dataset,
    test: &Dataset,
    metric: Metric,
    seed: u64,
) -> Result<ImportanceReport> {
    if train.n_features() < 2 {
        return Err(Error::param("drop-column importance needs at least two features"));
    }
    let baseline = score_pipeline(&Pipeline::fit(stages, spec, train, seed)?, test, metric)?;
    let outcomes: Vec<Result<f64>> = train
        .names()
        .par_iter()
        .map(|name| {
            let drop = [name.clone()];
            let tr = train.drop_columns(&drop)?;
            let te = test.drop_columns(&drop)?;
            score_pipeline(&Pipeline::fit(stages, spec, &tr, seed)?, &te, metric)
        })
        .collect();
    let mut features = Vec::new();
    let mut failures = Vec::new();
    for (name, r) in train.names().iter().zip(outcomes) {
        match r {
            Ok(s) => features.push(FeatureImportance {
                feature: name.clone(),
                score_without: s,
                delta: baseline - s,
                repeat_scores: Vec::new(),
            }),
            Err(e) => failures.push((name.clone(), e.to_string())),
        }
    }
    sort_desc(&mut features);
    Ok(ImportanceReport {
        method: ImportanceMethod::DropColumn,
        metric,
        baseline,
        features,
        n_repeats: None,
        seed: Some(seed),
        failures,
    })
}

/// Shuffles one input column of `test` at a time, `n_repeats` times, with
/// the fitted pipeline held fixed.
pub fn permutation_importance(
    pipeline: &Pipeline,
    test: &Dataset,
    metric: Metric,
    n_repeats: usize,
    seed: u64,
) -> Result<ImportanceReport> {
    if n_repeats == 0 {
        return Err(Error::param("n_repeats must be >= 1"));
    }
    let baseline = score_pipeline(pipeline, test, metric)?;
    let names = pipeline.transforms.input_columns.clone();
    let jobs: Vec<(usize, usize)> = (0..names.len()).flat_map(|j| (0..n_repeats).map(move |r| (j, r))).collect();
    let scores = jobs
        .par_iter()
        .map(|&(j, r)| {
            let mut col = test.column(&names[j])?.to_vec();
            col.shuffle(&mut child_rng(derive_seed(seed, j as u64), r as u64));
            score_pipeline(pipeline, &test.replace_column(&names[j], col)?, metric)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut features: Vec<FeatureImportance> = names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let reps = scores[j * n_repeats..(j + 1) * n_repeats].to_vec();
            let mean = if reps.iter().all(|&s| s == reps[0]) {
                reps[0]
            } else {
                reps.iter().sum::<f64>() / n_repeats as f64
            };
            FeatureImportance { feature: name.clone(), score_without: mean, delta: baseline - mean, repeat_scores: reps }
        })
        .collect();
    sort_desc(&mut features);
    Ok(ImportanceReport {
        method: ImportanceMethod::Permutation,
        metric,
        baseline,
        features,
        n_repeats: Some(n_repeats),
        seed: Some(seed),
        failures: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(n: usize, offset: usize) -> Dataset {
        let y: Vec<usize> = (0..n).map(|i| ((i + offset) * 7 / 3) % 3).collect();
        let copy: Vec<f64> = y.iter().map(|&l| l as f64).collect();
        let noise: Vec<f64> = (0..n).map(|i| ((i * 31 + offset) % 17) as f64).collect();
        let constant = vec![2.5; n];
        Dataset::new(
            vec!["noise".into(), "copy".into(), "constant".into()],
            vec![noise, copy, constant],
            y,
            vec!["a".into(), "b".into(), "c".into()],
        )
        .unwrap()
    }

    #[test]
    fn label_copy_dominates_drop_column() {
        let r = drop_column_importance(&ModelSpec::parse("cart").unwrap(), &[], &data(90, 0), &data(45, 1), Metric::WeightedF1, 0).unwrap();
        assert_eq!(r.features[0].feature, "copy");
        assert!(r.features[0].delta > 0.3);
        for f in &r.features {
            assert_eq!(f.delta + f.score_without, r.baseline);
        }
    }

    #[test]
    fn constant_column_permutation_is_zero() {
        let p = Pipeline::fit(&[], &ModelSpec::parse("cart").unwrap(), &data(60, 0), 0).unwrap();
        let r = permutation_importance(&p, &data(30, 2), Metric::WeightedF1, 3, 9).unwrap();
        assert_eq!(r.get("constant").unwrap().delta, 0.0);
        assert_eq!(r, permutation_importance(&p, &data(30, 2), Metric::WeightedF1, 3, 9).unwrap());
        assert_eq!(r.features[0].feature, "copy");
    }

    #[test]
    fn sorted_descending() {
        let p = Pipeline::fit(&[], &ModelSpec::parse("knn").unwrap(), &data(60, 0), 0).unwrap();
        let r = permutation_importance(&p, &data(30, 2), Metric::Accuracy, 2, 1).unwrap();
        assert!(r.features.windows(2).all(|w| w[0].delta >= w[1].delta));
        assert!(r.to_csv().unwrap().starts_with("rank,feature"));
    }
}
