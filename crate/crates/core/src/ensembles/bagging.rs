//! Bootstrap aggregation over any base model spec.
//!
//! Weight-aware bases (CART) see a bootstrap sample as per-row multiplicity
//! weights; other bases are fitted on the materialised resample.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{average, bootstrap_counts, check_n_estimators};
use crate::error::{Error, Result};
use crate::learners::cart::{Cart, CartParams};
use crate::learners::check_inputs;
use crate::learners::tree::Presorted;
use crate::matrix::Matrix;
use crate::model::{Classifier, Model, ModelSpec, ParamValue};
use crate::rng::{child_rng, derive_seed};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaggingParams {
    pub base: Box<ModelSpec>,
    pub n_estimators: usize,
    pub bootstrap: bool,
}

impl Default for BaggingParams {
    fn default() -> Self {
        Self {
            base: Box::new(ModelSpec::Cart(CartParams::default())),
            n_estimators: 100,
            bootstrap: true,
        }
    }
}

impl BaggingParams {
    pub(crate) fn set(&mut self, name: &str, value: &ParamValue) -> Result<()> {
        match name {
            "n_estimators" => self.n_estimators = value.as_usize(name)?,
            "base" => self.base = Box::new(value.as_model(name)?),
            "bootstrap" => self.bootstrap = value.as_bool(name)?,
            _ => match name.strip_prefix("base.") {
                Some(inner) => self.base.set_param(inner, value)?,
                None => return Err(Error::param(format!("Bagging has no parameter {name:?}"))),
            },
        }
        check_n_estimators(self.n_estimators)
    }

    pub(crate) fn params(&self) -> Vec<(String, ParamValue)> {
        let mut out = vec![
            ("n_estimators".into(), self.n_estimators.into()),
            ("bootstrap".into(), self.bootstrap.into()),
            ("base".into(), self.base.label().into()),
        ];
        out.extend(self.base.params().into_iter().map(|(k, v)| (format!("base.{k}"), v)));
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bagging {
    pub n_classes: usize,
    pub members: Vec<Model>,
}

impl Bagging {
    pub fn fit(x: &Matrix, y: &[usize], n_classes: usize, params: &BaggingParams, seed: u64) -> Result<Self> {
        check_inputs(x, y, n_classes, None)?;
        check_n_estimators(params.n_estimators)?;
        let n = x.rows();
        let members: Vec<Model> = match params.base.as_ref() {
            ModelSpec::Cart(cp) => {
                let presorted = Presorted::new(x);
                let cfg = cp.grow_config(None);
                (0..params.n_estimators)
                    .into_par_iter()
                    .map(|j| {
                        let w = if params.bootstrap {
                            bootstrap_counts(n, &mut child_rng(seed, j as u64))
                        } else {
                            vec![1.0; n]
                        };
                        Model::Cart(Cart::fit_presorted(x, &presorted, y, n_classes, &w, &cfg, None))
                    })
                    .collect()
            }
            base => (0..params.n_estimators)
                .into_par_iter()
                .map(|j| {
                    let member_seed = derive_seed(seed, j as u64);
                    if params.bootstrap {
                        let counts = bootstrap_counts(n, &mut child_rng(seed, j as u64));
                        let idx: Vec<usize> = counts
                            .iter()
                            .enumerate()
                            .flat_map(|(i, &c)| std::iter::repeat_n(i, c as usize))
                            .collect();
                        let ys: Vec<usize> = idx.iter().map(|&i| y[i]).collect();
                        base.fit(&x.select_rows(&idx), &ys, n_classes, None, member_seed)
                    } else {
                        base.fit(x, y, n_classes, None, member_seed)
                    }
                })
                .collect::<Result<_>>()?,
        };
        Ok(Self { n_classes, members })
    }
}

impl Classifier for Bagging {
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

    fn toy() -> (Matrix, Vec<usize>) {
        let x = Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.5], [2.0, 2.0], [3.0, 0.1], [4.0, 1.5], [5.0, 0.0]]).unwrap();
        (x, vec![0, 0, 1, 0, 1, 1])
    }

    #[test]
    fn single_member_without_bootstrap_is_the_base() {
        let (x, y) = toy();
        for base in [ModelSpec::parse("cart").unwrap(), ModelSpec::parse("gnb").unwrap()] {
            let p = BaggingParams { base: Box::new(base.clone()), n_estimators: 1, bootstrap: false };
            let bag = Bagging::fit(&x, &y, 2, &p, 9).unwrap();
            let bare = base.fit(&x, &y, 2, None, derive_seed(9, 0)).unwrap();
            assert_eq!(bag.predict_proba(&x), bare.predict_proba(&x));
        }
    }

    #[test]
    fn proba_is_member_average() {
        let (x, y) = toy();
        let p = BaggingParams { n_estimators: 3, ..Default::default() };
        let bag = Bagging::fit(&x, &y, 2, &p, 4).unwrap();
        let got = bag.predict_proba(&x);
        let ps: Vec<Matrix> = bag.members.iter().map(|m| m.predict_proba(&x)).collect();
        for i in 0..x.rows() {
            for k in 0..2 {
                let want = (ps[0].get(i, k) + ps[1].get(i, k) + ps[2].get(i, k)) / 3.0;
                assert!((got.get(i, k) - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn pure_labels_are_unanimous() {
        let (x, _) = toy();
        let y = vec![1; 6];
        let bag = Bagging::fit(&x, &y, 2, &BaggingParams { n_estimators: 5, ..Default::default() }, 0).unwrap();
        assert_eq!(bag.predict(&x), y);
    }

    #[test]
    fn non_weight_base_uses_resamples() {
        let (x, y) = toy();
        let p = BaggingParams { base: Box::new(ModelSpec::parse("knn").unwrap()), n_estimators: 4, bootstrap: true };
        let a = Bagging::fit(&x, &y, 2, &p, 2).unwrap();
        let b = Bagging::fit(&x, &y, 2, &p, 2).unwrap();
        assert_eq!(a, b);
    }
}
