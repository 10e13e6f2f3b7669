//! Gaussian naive Bayes.

use serde::{Deserialize, Serialize};

use super::{check_inputs, class_counts, masked_softmax};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::{Classifier, ParamValue};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GnbParams {
    /// Added to every variance, as a fraction of the largest feature variance.
    pub var_smoothing: f64,
}

impl Default for GnbParams {
    fn default() -> Self {
        Self { var_smoothing: 1e-9 }
    }
}

impl GnbParams {
    pub(crate) fn set(&mut self, name: &str, value: &ParamValue) -> Result<()> {
        match name {
            "var_smoothing" => {
                let v = value.as_f64(name)?;
                if v < 0.0 {
                    return Err(Error::param("var_smoothing must be >= 0"));
                }
                self.var_smoothing = v;
            }
            _ => return Err(Error::param(format!("NB has no parameter {name:?}"))),
        }
        Ok(())
    }

    pub(crate) fn params(&self) -> Vec<(String, ParamValue)> {
        vec![("var_smoothing".into(), self.var_smoothing.into())]
    }
}

/// Classes absent from the training labels keep zero prior and are never
/// predicted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gnb {
    pub n_classes: usize,
    pub present: Vec<bool>,
    pub log_prior: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub variances: Vec<Vec<f64>>,
}

impl Gnb {
    pub fn fit(x: &Matrix, y: &[usize], n_classes: usize, params: &GnbParams) -> Result<Self> {
        check_inputs(x, y, n_classes, None)?;
        let (n, p) = (x.rows(), x.cols());
        let counts = class_counts(y, n_classes);
        let mut means = vec![vec![0.0; p]; n_classes];
        for (row, &l) in x.iter_rows().zip(y) {
            for (m, v) in means[l].iter_mut().zip(row) {
                *m += v;
            }
        }
        for (m, &c) in means.iter_mut().zip(&counts) {
            if c > 0 {
                m.iter_mut().for_each(|v| *v /= c as f64);
            }
        }
        let mut variances = vec![vec![0.0; p]; n_classes];
        for (row, &l) in x.iter_rows().zip(y) {
            for j in 0..p {
                let d = row[j] - means[l][j];
                variances[l][j] += d * d;
            }
        }
        let max_var = (0..p)
            .map(|j| {
                let col = x.column(j);
                let mu = col.iter().sum::<f64>() / n as f64;
                col.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n as f64
            })
            .fold(0.0, f64::max);
        // an all-constant matrix still needs a positive floor
        let floor = (params.var_smoothing * max_var).max(f64::MIN_POSITIVE);
        for (vs, &c) in variances.iter_mut().zip(&counts) {
            for v in vs.iter_mut() {
                *v = if c > 0 { *v / c as f64 } else { 0.0 } + floor;
            }
        }
        let present: Vec<bool> = counts.iter().map(|&c| c > 0).collect();
        let log_prior = counts
            .iter()
            .map(|&c| if c > 0 { (c as f64 / n as f64).ln() } else { 0.0 })
            .collect();
        Ok(Self { n_classes, present, log_prior, means, variances })
    }

    /// Unnormalised log posterior of each class for one row.
    pub fn joint_log_likelihood(&self, row: &[f64]) -> Vec<f64> {
        (0..self.n_classes)
            .map(|k| {
                let mut s = self.log_prior[k];
                for ((v, m), var) in row.iter().zip(&self.means[k]).zip(&self.variances[k]) {
                    s -= 0.5 * ((2.0 * std::f64::consts::PI * var).ln() + (v - m) * (v - m) / var);
                }
                s
            })
            .collect()
    }
}

impl Classifier for Gnb {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn predict_proba(&self, x: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(x.rows(), self.n_classes);
        for i in 0..x.rows() {
            let mut s = self.joint_log_likelihood(x.row(i));
            masked_softmax(&mut s, &self.present);
            out.row_mut(i).copy_from_slice(&s);
        }
        out
    }
}
