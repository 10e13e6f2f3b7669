//! Multiclass gradient boosting with softmax cross-entropy.
//!
//! Each stage fits one regression tree per class to the residuals
//! `onehot(y) - softmax(F)` and replaces the leaf means by a one-step Newton
//! estimate `(K-1)/K * sum(r) / sum(|r| (1 - |r|))`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::check_n_estimators;
use crate::error::{Error, Result};
use crate::learners::tree::{grow, GrowConfig, Presorted, Target, TreeNode};
use crate::learners::{check_inputs, class_counts};
use crate::matrix::{softmax_in_place, Matrix};
use crate::model::{Classifier, ParamValue};

/// Smallest class prior used for the initial scores (keeps them finite).
const MIN_PRIOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GbmParams {
    pub n_estimators: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
}

impl Default for GbmParams {
    fn default() -> Self {
        Self { n_estimators: 100, learning_rate: 0.1, max_depth: 3, min_samples_leaf: 1 }
    }
}

impl GbmParams {
    pub(crate) fn set(&mut self, name: &str, value: &ParamValue) -> Result<()> {
        match name {
            "n_estimators" => self.n_estimators = value.as_usize(name)?,
            "learning_rate" => self.learning_rate = value.as_f64(name)?,
            "max_depth" => self.max_depth = value.as_usize(name)?,
            "min_samples_leaf" => self.min_samples_leaf = value.as_usize(name)?,
            _ => return Err(Error::param(format!("GBC has no parameter {name:?}"))),
        }
        if self.learning_rate <= 0.0 || self.max_depth == 0 || self.min_samples_leaf == 0 {
            return Err(Error::param("GBC needs learning_rate > 0, max_depth >= 1, min_samples_leaf >= 1"));
        }
        check_n_estimators(self.n_estimators)
    }

    pub(crate) fn params(&self) -> Vec<(String, ParamValue)> {
        vec![
            ("n_estimators".into(), self.n_estimators.into()),
            ("learning_rate".into(), self.learning_rate.into()),
            ("max_depth".into(), self.max_depth.into()),
            ("min_samples_leaf".into(), self.min_samples_leaf.into()),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientBoosting {
    pub n_classes: usize,
    pub learning_rate: f64,
    /// Initial scores, `ln(prior)`.
    pub init: Vec<f64>,
    /// One tree per class per completed stage.
    pub stages: Vec<Vec<TreeNode>>,
    /// Mean training cross-entropy after each stage.
    pub train_loss: Vec<f64>,
}

fn cross_entropy(scores: &Matrix, y: &[usize]) -> f64 {
    let mut total = 0.0;
    for (row, &l) in scores.iter_rows().zip(y) {
        let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + row.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
        total += lse - row[l];
    }
    total / y.len() as f64
}

impl GradientBoosting {
    pub fn fit(x: &Matrix, y: &[usize], n_classes: usize, params: &GbmParams) -> Result<Self> {
        check_inputs(x, y, n_classes, None)?;
        check_n_estimators(params.n_estimators)?;
        let n = x.rows();
        let k = n_classes;
        let init: Vec<f64> = class_counts(y, k)
            .iter()
            .map(|&c| (c as f64 / n as f64).max(MIN_PRIOR).ln())
            .collect();
        let mut scores = Matrix::zeros(n, k);
        for i in 0..n {
            scores.row_mut(i).copy_from_slice(&init);
        }
        let presorted = Presorted::new(x);
        let ones = vec![1.0; n];
        let cfg = GrowConfig {
            max_depth: Some(params.max_depth),
            min_samples_split: 2,
            min_samples_leaf: params.min_samples_leaf,
            max_features: None,
        };
        let kf = k as f64;
        let mut stages = Vec::new();
        let mut train_loss = Vec::new();
        for _ in 0..params.n_estimators {
            let mut resid = Matrix::zeros(n, k);
            for i in 0..n {
                let r = resid.row_mut(i);
                r.copy_from_slice(scores.row(i));
                softmax_in_place(r);
                r.iter_mut().for_each(|v| *v = -*v);
                r[y[i]] += 1.0;
            }
            if resid.as_slice().iter().all(|v| v.abs() < 1e-10) {
                break;
            }
            let trees: Vec<TreeNode> = (0..k)
                .into_par_iter()
                .map(|c| {
                    let r = resid.column(c);
                    let mut tree = grow(x, &presorted, Target::Regression { values: &r }, &ones, &cfg, None);
                    tree.assign_leaf_values(x, (0..n).collect(), &mut |rows: &[usize]| {
                        let (mut num, mut den) = (0.0, 0.0);
                        for &i in rows {
                            num += r[i];
                            den += r[i].abs() * (1.0 - r[i].abs());
                        }
                        vec![if den < 1e-150 { 0.0 } else { (kf - 1.0) / kf * num / den }]
                    });
                    tree
                })
                .collect();
            for i in 0..n {
                for (c, t) in trees.iter().enumerate() {
                    let v = scores.get(i, c) + params.learning_rate * t.leaf_value(x.row(i))[0];
                    scores.set(i, c, v);
                }
            }
            stages.push(trees);
            train_loss.push(cross_entropy(&scores, y));
        }
        Ok(Self { n_classes, learning_rate: params.learning_rate, init, stages, train_loss })
    }

    /// Accumulated raw scores before the softmax.
    pub fn decision(&self, row: &[f64]) -> Vec<f64> {
        let mut s = self.init.clone();
        for trees in &self.stages {
            for (v, t) in s.iter_mut().zip(trees) {
                *v += self.learning_rate * t.leaf_value(row)[0];
            }
        }
        s
    }
}

impl Classifier for GradientBoosting {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn predict_proba(&self, x: &Matrix) -> Matrix {
        let rows: Vec<Vec<f64>> = (0..x.rows())
            .into_par_iter()
            .map(|i| {
                let mut s = self.decision(x.row(i));
                softmax_in_place(&mut s);
                s
            })
            .collect();
        let mut out = Matrix::zeros(x.rows(), self.n_classes);
        for (i, r) in rows.iter().enumerate() {
            out.row_mut(i).copy_from_slice(r);
        }
        out
    }
}
