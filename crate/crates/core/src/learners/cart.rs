//! CART classification tree (Gini impurity).

use serde::{Deserialize, Serialize};

use super::check_inputs;
use super::tree::{grow, GrowConfig, Presorted, Target, TreeNode};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::{Classifier, ParamValue};
use crate::rng::Rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CartParams {
    /// `None` grows until leaves are pure.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
}

impl Default for CartParams {
    fn default() -> Self {
        Self { max_depth: None, min_samples_split: 2, min_samples_leaf: 1 }
    }
}

impl CartParams {
    pub(crate) fn set(&mut self, name: &str, value: &ParamValue) -> Result<()> {
        match name {
            "max_depth" => self.max_depth = value.as_opt_usize(name)?,
            "min_samples_split" => self.min_samples_split = value.as_usize(name)?,
            "min_samples_leaf" => self.min_samples_leaf = value.as_usize(name)?,
            _ => return Err(Error::param(format!("CART has no parameter {name:?}"))),
        }
        if self.max_depth == Some(0) || self.min_samples_leaf == 0 || self.min_samples_split < 2 {
            return Err(Error::param("CART needs max_depth >= 1, min_samples_leaf >= 1, min_samples_split >= 2"));
        }
        Ok(())
    }

    pub(crate) fn params(&self) -> Vec<(String, ParamValue)> {
        vec![
            ("max_depth".into(), self.max_depth.into()),
            ("min_samples_split".into(), self.min_samples_split.into()),
            ("min_samples_leaf".into(), self.min_samples_leaf.into()),
        ]
    }

    pub(crate) fn grow_config(&self, max_features: Option<usize>) -> GrowConfig {
        GrowConfig {
            max_depth: self.max_depth,
            min_samples_split: self.min_samples_split,
            min_samples_leaf: self.min_samples_leaf,
            max_features,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cart {
    pub n_classes: usize,
    pub n_features: usize,
    pub root: TreeNode,
}

impl Cart {
    pub fn fit(
        x: &Matrix,
        y: &[usize],
        n_classes: usize,
        weights: Option<&[f64]>,
        params: &CartParams,
    ) -> Result<Self> {
        check_inputs(x, y, n_classes, weights)?;
        let presorted = Presorted::new(x);
        let ones;
        let w = match weights {
            Some(w) => w,
            None => {
                ones = vec![1.0; x.rows()];
                &ones
            }
        };
        Ok(Self::fit_presorted(x, &presorted, y, n_classes, w, &params.grow_config(None), None))
    }

    /// Grows on a shared presort; used by the forest and bagging members.
    pub(crate) fn fit_presorted(
        x: &Matrix,
        presorted: &Presorted,
        y: &[usize],
        n_classes: usize,
        weights: &[f64],
        cfg: &GrowConfig,
        rng: Option<&mut Rng>,
    ) -> Self {
        let root = grow(x, presorted, Target::Class { labels: y, n_classes }, weights, cfg, rng);
        Self { n_classes, n_features: x.cols(), root }
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }
}

impl Classifier for Cart {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn predict_proba(&self, x: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(x.rows(), self.n_classes);
        for i in 0..x.rows() {
            let v = self.root.leaf_value(x.row(i));
            let s: f64 = v.iter().sum();
            for (o, c) in out.row_mut(i).iter_mut().zip(v) {
                *o = c / s;
            }
        }
        out
    }
}
