//! Random forest of CART members.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{average, bootstrap_counts, check_n_estimators};
use crate::error::{Error, Result};
use crate::learners::cart::{Cart, CartParams};
use crate::learners::check_inputs;
use crate::learners::tree::Presorted;
use crate::matrix::Matrix;
use crate::model::{Classifier, ParamValue};
use crate::rng::child_rng;

/// Candidate features examined per split.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    /// `ceil(sqrt(p))`.
    Sqrt,
    All,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, p: usize) -> Result<usize> {
        match self {
            MaxFeatures::Sqrt => Ok(((p as f64).sqrt().ceil() as usize).clamp(1, p.max(1))),
            MaxFeatures::All => Ok(p),
            MaxFeatures::Count(m) if m >= 1 && m <= p => Ok(m),
            MaxFeatures::Count(m) => Err(Error::param(format!("max_features = {m} outside 1..={p}"))),
        }
    }
}

impl From<MaxFeatures> for ParamValue {
    fn from(m: MaxFeatures) -> Self {
        match m {
            MaxFeatures::Sqrt => "sqrt".into(),
            MaxFeatures::All => "all".into(),
            MaxFeatures::Count(c) => c.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_estimators: usize,
    pub max_depth: Option<usize>,
    pub max_features: MaxFeatures,
    pub bootstrap: bool,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_estimators: 100,
            max_depth: None,
            max_features: MaxFeatures::Sqrt,
            bootstrap: true,
            min_samples_split: 2,
            min_samples_leaf: 1,
        }
    }
}

impl ForestParams {
    pub(crate) fn set(&mut self, name: &str, value: &ParamValue) -> Result<()> {
        match name {
            "n_estimators" => self.n_estimators = value.as_usize(name)?,
            "max_depth" => self.max_depth = value.as_opt_usize(name)?,
            "bootstrap" => self.bootstrap = value.as_bool(name)?,
            "min_samples_split" => self.min_samples_split = value.as_usize(name)?,
            "min_samples_leaf" => self.min_samples_leaf = value.as_usize(name)?,
            "max_features" => {
                self.max_features = match value {
                    ParamValue::Text(s) if s == "sqrt" => MaxFeatures::Sqrt,
                    ParamValue::Text(s) if s == "all" => MaxFeatures::All,
                    ParamValue::Null => MaxFeatures::All,
                    v => MaxFeatures::Count(v.as_usize(name)?),
                }
            }
            _ => return Err(Error::param(format!("RF has no parameter {name:?}"))),
        }
        if self.max_depth == Some(0) || self.min_samples_leaf == 0 || self.min_samples_split < 2 {
            return Err(Error::param("RF needs max_depth >= 1, min_samples_leaf >= 1, min_samples_split >= 2"));
        }
        check_n_estimators(self.n_estimators)
    }

    pub(crate) fn params(&self) -> Vec<(String, ParamValue)> {
        vec![
            ("n_estimators".into(), self.n_estimators.into()),
            ("max_depth".into(), self.max_depth.into()),
            ("max_features".into(), self.max_features.into()),
            ("bootstrap".into(), self.bootstrap.into()),
            ("min_samples_split".into(), self.min_samples_split.into()),
            ("min_samples_leaf".into(), self.min_samples_leaf.into()),
        ]
    }

    fn tree_params(&self) -> CartParams {
        CartParams {
            max_depth: self.max_depth,
            min_samples_split: self.min_samples_split,
            min_samples_leaf: self.min_samples_leaf,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub n_classes: usize,
    pub members: Vec<Cart>,
}

impl RandomForest {
    /// Member `j` draws its bootstrap sample and feature subsets from the
    /// stream `(seed, j)` only.
    pub fn fit(x: &Matrix, y: &[usize], n_classes: usize, params: &ForestParams, seed: u64) -> Result<Self> {
        check_inputs(x, y, n_classes, None)?;
        check_n_estimators(params.n_estimators)?;
        let m = params.max_features.resolve(x.cols())?;
        let cfg = params.tree_params().grow_config((m < x.cols()).then_some(m));
        let presorted = Presorted::new(x);
        let n = x.rows();
        let members = (0..params.n_estimators)
            .into_par_iter()
            .map(|j| {
                let mut r = child_rng(seed, j as u64);
                let w = if params.bootstrap { bootstrap_counts(n, &mut r) } else { vec![1.0; n] };
                Cart::fit_presorted(x, &presorted, y, n_classes, &w, &cfg, Some(&mut r))
            })
            .collect();
        Ok(Self { n_classes, members })
    }
}

impl Classifier for RandomForest {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn predict_proba(&self, x: &Matrix) -> Matrix {
        let probas: Vec<Matrix> = self.members.par_iter().map(|m| m.predict_proba(x)).collect();
        average(probas, x.rows(), self.n_classes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng;
    use rand::Rng as _;

    fn random_data(seed: u64, n: usize, p: usize) -> (Matrix, Vec<usize>) {
        let mut r = rng(seed);
        let x = Matrix::new(n, p, (0..n * p).map(|_| r.random_range(0.0..1.0)).collect()).unwrap();
        let y = (0..n).map(|i| usize::from(x.get(i, 0) + 0.3 * x.get(i, 1) > 0.6)).collect();
        (x, y)
    }

    #[test]
    fn one_full_tree_is_cart() {
        let (x, y) = random_data(1, 60, 4);
        let p = ForestParams { n_estimators: 1, bootstrap: false, max_features: MaxFeatures::All, ..Default::default() };
        let rf = RandomForest::fit(&x, &y, 2, &p, 7).unwrap();
        let cart = Cart::fit(&x, &y, 2, None, &CartParams::default()).unwrap();
        assert_eq!(rf.members[0], cart);
    }

    #[test]
    fn members_depend_only_on_their_index() {
        let (x, y) = random_data(2, 80, 5);
        let small = RandomForest::fit(&x, &y, 2, &ForestParams { n_estimators: 3, ..Default::default() }, 5).unwrap();
        let big = RandomForest::fit(&x, &y, 2, &ForestParams { n_estimators: 6, ..Default::default() }, 5).unwrap();
        assert_eq!(small.members[..], big.members[..3]);
    }

    #[test]
    fn proba_within_member_range() {
        let (x, y) = random_data(3, 50, 3);
        let rf = RandomForest::fit(&x, &y, 2, &ForestParams { n_estimators: 7, ..Default::default() }, 1).unwrap();
        let p = rf.predict_proba(&x);
        let ms: Vec<Matrix> = rf.members.iter().map(|m| m.predict_proba(&x)).collect();
        for i in 0..x.rows() {
            for k in 0..2 {
                let lo = ms.iter().map(|m| m.get(i, k)).fold(f64::INFINITY, f64::min);
                let hi = ms.iter().map(|m| m.get(i, k)).fold(f64::NEG_INFINITY, f64::max);
                assert!(p.get(i, k) >= lo - 1e-12 && p.get(i, k) <= hi + 1e-12);
            }
        }
    }

    #[test]
    fn max_features_validation() {
        assert_eq!(MaxFeatures::Sqrt.resolve(11).unwrap(), 4);
        assert!(MaxFeatures::Count(12).resolve(11).is_err());
        let (x, y) = random_data(4, 10, 2);
        let p = ForestParams { max_features: MaxFeatures::Count(3), ..Default::default() };
        assert!(RandomForest::fit(&x, &y, 2, &p, 0).is_err());
    }
}
