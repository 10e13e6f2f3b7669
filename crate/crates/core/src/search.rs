//! Exhaustive grid search scored by k-fold cross-validation.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::evaluate::compare::finish;
use crate::evaluate::cv::{cv_prepared, Folds, PreparedFolds};
use crate::evaluate::Metric;
use crate::model::{ModelSpec, ParamValue};
use crate::preprocess::{Pipeline, StageSpec};

/// Ordered parameter names with ordered candidate lists. Combinations are
/// enumerated like an odometer: the first parameter varies slowest.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ParamGrid {
    pub params: Vec<(String, Vec<ParamValue>)>,
}

impl ParamGrid {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, values: Vec<ParamValue>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::param(format!("grid entry {name:?} has no values")));
        }
        if self.params.iter().any(|(n, _)| n == name) {
            return Err(Error::param(format!("grid entry {name:?} given twice")));
        }
        self.params.push((name.to_string(), values));
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.params.iter().map(|(_, v)| v.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn combinations(&self) -> Vec<Vec<(String, ParamValue)>> {
        let mut out = vec![Vec::new()];
        for (name, values) in &self.params {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    values.iter().map(move |v| {
                        let mut c = prefix.clone();
                        c.push((name.clone(), v.clone()));
                        c
                    })
                })
                .collect();
        }
        out
    }

    /// Named presets: `cart-depth` (max_depth 1..=80 and unbounded) and
    /// `rf-wide` (n_estimators x max_depth x bootstrap).
    pub fn preset(name: &str) -> Result<(ModelSpec, ParamGrid)> {
        match name {
            "cart-depth" => {
                let mut depths: Vec<ParamValue> = (1..=80usize).map(Into::into).collect();
                depths.push(ParamValue::Null);
                Ok((ModelSpec::parse("cart")?, ParamGrid::new().with("max_depth", depths)?))
            }
            "rf-wide" => Ok((
                ModelSpec::parse("rf")?,
                ParamGrid::new()
                    .with("n_estimators", [10usize, 50, 100, 156].map(Into::into).to_vec())?
                    .with("max_depth", vec![5usize.into(), 17usize.into(), ParamValue::Null])?
                    .with("bootstrap", vec![true.into(), false.into()])?,
            )),
            _ => Err(Error::param(format!("unknown grid preset {name:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub params: Vec<(String, ParamValue)>,
    pub scores: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    /// Reason the combination could not be fitted; such points are never best.
    pub failed: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub model: String,
    pub metric: Metric,
    pub k: usize,
    pub points: Vec<GridPoint>,
    /// Index into `points`.
    pub best: usize,
    pub best_spec: ModelSpec,
}

impl SearchResult {
    pub fn best_point(&self) -> &GridPoint {
        &self.points[self.best]
    }

    /// One row per combination, with each grid parameter as a column.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let names: Vec<String> = self.points.first().map(|p| p.params.iter().map(|(n, _)| n.clone()).collect()).unwrap_or_default();
        let mut header = names.clone();
        header.extend(["mean", "std", "scores", "failed"].map(String::from));
        w.write_record(&header)?;
        for p in &self.points {
            let mut rec: Vec<String> = p.params.iter().map(|(_, v)| v.to_string()).collect();
            rec.push(p.mean.to_string());
            rec.push(p.std.to_string());
            rec.push(p.scores.iter().map(f64::to_string).collect::<Vec<_>>().join(";"));
            rec.push(p.failed.clone().unwrap_or_default());
            w.write_record(&rec)?;
        }
        finish(w)
    }
}

/// Scores every combination on the same prepared folds and seeds.
pub fn search_prepared(
    base: &ModelSpec,
    grid: &ParamGrid,
    prepared: &PreparedFolds,
    metric: Metric,
    seed: u64,
) -> Result<SearchResult> {
    if grid.is_empty() {
        return Err(Error::param("parameter grid is empty"));
    }
    let mut points: Vec<GridPoint> = Vec::with_capacity(grid.len());
    let mut best: Option<(usize, ModelSpec)> = None;
    for params in grid.combinations() {
        let outcome = base
            .with_params(&params)
            .and_then(|spec| cv_prepared(&spec, prepared, metric, seed).map(|r| (spec, r)));
        match outcome {
            Ok((spec, r)) => {
                if best.as_ref().is_none_or(|(b, _)| r.mean > points[*b].mean) {
                    best = Some((points.len(), spec));
                }
                points.push(GridPoint { params, mean: r.mean, std: r.std, scores: r.scores, failed: None });
            }
            Err(e) => points.push(GridPoint {
                params,
                scores: Vec::new(),
                mean: f64::NAN,
                std: f64::NAN,
                failed: Some(e.to_string()),
            }),
        }
    }
    let (best, best_spec) = best.ok_or_else(|| Error::param("every grid combination failed to fit"))?;
    Ok(SearchResult { model: base.label().to_string(), metric, k: prepared.folds.k, points, best, best_spec })
}

/// Grid search followed by a refit of the winning spec (with `stages`) on
/// all of `data`.
#[allow(clippy::too_many_arguments)]
pub fn grid_search(
    base: &ModelSpec,
    grid: &ParamGrid,
    stages: &[StageSpec],
    data: &Dataset,
    k: usize,
    metric: Metric,
    seed: u64,
    stratified: bool,
) -> Result<(SearchResult, Pipeline)> {
    let folds = Folds::new(data.labels(), data.n_classes(), k, seed, stratified)?;
    let prepared = PreparedFolds::new(data, stages, folds)?;
    let result = search_prepared(base, grid, &prepared, metric, seed)?;
    let pipeline = Pipeline::fit(stages, &result.best_spec, data, seed)?;
    Ok((result, pipeline))
}
