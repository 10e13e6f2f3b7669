//! Fit/apply transforms and the leakage-safe pipeline that chains them in
//! front of a classifier.

pub mod boxcox;
pub mod cap;
pub mod minmax;
pub mod prune;
pub mod split;

pub use boxcox::{boxcox_apply, boxcox_fit, BoxCoxParams};
pub use cap::{cap_apply, cap_fit, CapBounds};
pub use minmax::{minmax_apply, minmax_fit, MinMaxParams};
pub use prune::{corr_prune, corr_prune_fit, ColumnSelection, PruneOptions, PruneStep, TieBreak};
pub use split::{split, split_indices, SplitIndices};

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::{Classifier, Model, ModelSpec};

/// Version tag written into serialized pipelines.
pub const PIPELINE_FORMAT_VERSION: u32 = 1;

/// An unfitted transform stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "stage", rename_all = "snake_case")]
pub enum StageSpec {
    Cap,
    CorrPrune {
        #[serde(default = "default_threshold")]
        threshold: f64,
    },
    MinMax,
    BoxCox,
}

fn default_threshold() -> f64 {
    prune::DEFAULT_THRESHOLD
}

impl StageSpec {
    /// Parses the short names used in config files and on the command line:
    /// `cap`, `prune`, `prune:<threshold>`, `minmax`, `boxcox`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "cap" => Ok(StageSpec::Cap),
            "minmax" => Ok(StageSpec::MinMax),
            "boxcox" => Ok(StageSpec::BoxCox),
            "prune" => Ok(StageSpec::CorrPrune { threshold: prune::DEFAULT_THRESHOLD }),
            _ => match s.strip_prefix("prune:") {
                Some(t) => t
                    .parse()
                    .map(|threshold| StageSpec::CorrPrune { threshold })
                    .map_err(|_| Error::param(format!("bad prune threshold {t:?}"))),
                None => Err(Error::param(format!("unknown stage {s:?}"))),
            },
        }
    }

    pub fn fit(&self, train: &Dataset) -> Result<FittedStage> {
        Ok(match self {
            StageSpec::Cap => FittedStage::Cap(cap_fit(train)?),
            StageSpec::CorrPrune { threshold } => FittedStage::CorrPrune(corr_prune_fit(
                train,
                &PruneOptions { threshold: *threshold, ..Default::default() },
            )?),
            StageSpec::MinMax => FittedStage::MinMax(minmax_fit(train)?),
            StageSpec::BoxCox => FittedStage::BoxCox(boxcox_fit(train)?),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "stage", rename_all = "snake_case")]
pub enum FittedStage {
    Cap(CapBounds),
    CorrPrune(ColumnSelection),
    MinMax(MinMaxParams),
    BoxCox(BoxCoxParams),
}

impl FittedStage {
    pub fn apply(&self, data: &Dataset) -> Result<Dataset> {
        match self {
            FittedStage::Cap(b) => cap_apply(data, b),
            FittedStage::CorrPrune(s) => data.select_columns(&s.keep),
            FittedStage::MinMax(p) => minmax_apply(data, p),
            FittedStage::BoxCox(p) => boxcox_apply(data, p),
        }
    }
}

/// Ordered fitted stages. Each stage is fitted on the output of the previous
/// one, over training rows only.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Transforms {
    pub input_columns: Vec<String>,
    pub stages: Vec<FittedStage>,
}

impl Transforms {
    /// Fits every stage and returns the transformed training data alongside.
    pub fn fit(specs: &[StageSpec], train: &Dataset) -> Result<(Self, Dataset)> {
        let mut current = train.clone();
        let mut stages = Vec::with_capacity(specs.len());
        for spec in specs {
            let fitted = spec.fit(&current)?;
            current = fitted.apply(&current)?;
            stages.push(fitted);
        }
        Ok((
            Self {
                input_columns: train.names().to_vec(),
                stages,
            },
            current,
        ))
    }

    pub fn apply(&self, data: &Dataset) -> Result<Dataset> {
        let mut current = data.select_columns(&self.input_columns)?;
        for s in &self.stages {
            current = s.apply(&current)?;
        }
        Ok(current)
    }
}

/// Fitted transforms plus the terminal model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pipeline {
    pub format_version: u32,
    pub class_vocab: Vec<String>,
    pub transforms: Transforms,
    /// Feature columns seen by the model, after all transforms.
    pub model_columns: Vec<String>,
    pub model: Model,
}

impl Pipeline {
    pub fn fit(stages: &[StageSpec], spec: &ModelSpec, train: &Dataset, seed: u64) -> Result<Self> {
        let (transforms, transformed) = Transforms::fit(stages, train)?;
        let model = spec.fit(
            &transformed.to_matrix(),
            transformed.labels(),
            train.n_classes(),
            None,
            seed,
        )?;
        Ok(Self {
            format_version: PIPELINE_FORMAT_VERSION,
            class_vocab: train.class_vocab().to_vec(),
            transforms,
            model_columns: transformed.names().to_vec(),
            model,
        })
    }

    pub fn transform(&self, data: &Dataset) -> Result<Matrix> {
        Ok(self.transforms.apply(data)?.to_matrix())
    }

    pub fn predict(&self, data: &Dataset) -> Result<Vec<usize>> {
        Ok(self.model.predict(&self.transform(data)?))
    }

    pub fn predict_proba(&self, data: &Dataset) -> Result<Matrix> {
        Ok(self.model.predict_proba(&self.transform(data)?))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(s)?;
        if p.format_version != PIPELINE_FORMAT_VERSION {
            return Err(Error::InvalidData(format!(
                "unsupported pipeline format version {}",
                p.format_version
            )));
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::cart::CartParams;

    fn toy() -> Dataset {
        let x: Vec<f64> = (0..40).map(|i| (i as f64 * 0.37).sin() * 5.0 + i as f64 * 0.1).collect();
        let y: Vec<f64> = (0..40).map(|i| ((i * 7) % 11) as f64 + 0.5).collect();
        let labels: Vec<usize> = (0..40).map(|i| usize::from(x[i] + 0.3 * y[i] > 2.0)).collect();
        Dataset::new(vec!["x".into(), "y".into()], vec![x, y], labels, vec!["a".into(), "b".into()]).unwrap()
    }

    #[test]
    fn stage_names_parse() {
        assert_eq!(StageSpec::parse("minmax").unwrap(), StageSpec::MinMax);
        assert_eq!(StageSpec::parse("prune:0.9").unwrap(), StageSpec::CorrPrune { threshold: 0.9 });
        assert!(StageSpec::parse("yeo").is_err());
    }

    #[test]
    fn empty_stage_list_equals_bare_model() {
        let d = toy();
        let spec = ModelSpec::Cart(CartParams::default());
        let p = Pipeline::fit(&[], &spec, &d, 0).unwrap();
        let bare = spec.fit(&d.to_matrix(), d.labels(), 2, None, 0).unwrap();
        assert_eq!(p.model, bare);
        assert_eq!(p.predict(&d).unwrap(), bare.predict(&d.to_matrix()));
    }

    #[test]
    fn manual_chain_matches_pipeline() {
        let d = toy();
        let (train, test) = (d.select_rows(&(0..30).collect::<Vec<_>>()), d.select_rows(&(30..40).collect::<Vec<_>>()));
        let spec = ModelSpec::Cart(CartParams::default());
        let p = Pipeline::fit(&[StageSpec::MinMax, StageSpec::BoxCox], &spec, &train, 0).unwrap();

        let mm = minmax_fit(&train).unwrap();
        let t1 = minmax_apply(&train, &mm).unwrap();
        let bc = boxcox_fit(&t1).unwrap();
        let t2 = boxcox_apply(&t1, &bc).unwrap();
        let model = spec.fit(&t2.to_matrix(), t2.labels(), 2, None, 0).unwrap();
        let test_m = boxcox_apply(&minmax_apply(&test, &mm).unwrap(), &bc).unwrap().to_matrix();
        assert_eq!(p.predict(&test).unwrap(), model.predict(&test_m));
        assert_eq!(p.transforms.stages, vec![FittedStage::MinMax(mm), FittedStage::BoxCox(bc)]);
    }

    #[test]
    fn test_rows_do_not_touch_parameters() {
        let d = toy();
        let train = d.select_rows(&(0..30).collect::<Vec<_>>());
        let spec = ModelSpec::Cart(CartParams::default());
        let stages = [StageSpec::Cap, StageSpec::MinMax, StageSpec::BoxCox];
        let p = Pipeline::fit(&stages, &spec, &train, 0).unwrap();
        let before = p.to_json().unwrap();
        let mutated = d.select_rows(&(30..40).collect::<Vec<_>>());
        let mutated = mutated.with_columns(mutated.columns().iter().map(|c| c.iter().map(|v| v * 100.0).collect()).collect()).unwrap();
        p.predict(&mutated).unwrap();
        assert_eq!(p.to_json().unwrap(), before);
        let refit = Pipeline::fit(&stages, &spec, &train, 0).unwrap();
        assert_eq!(refit.to_json().unwrap(), before);
    }

    #[test]
    fn json_round_trip_reproduces_predictions() {
        let d = toy();
        let p = Pipeline::fit(
            &[StageSpec::CorrPrune { threshold: 0.7 }, StageSpec::MinMax, StageSpec::BoxCox],
            &ModelSpec::Cart(CartParams::default()),
            &d,
            0,
        )
        .unwrap();
        let back = Pipeline::from_json(&p.to_json().unwrap()).unwrap();
        assert_eq!(back, p);
        assert_eq!(back.predict(&d).unwrap(), p.predict(&d).unwrap());
    }
}
