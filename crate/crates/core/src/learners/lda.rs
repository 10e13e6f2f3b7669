//! Linear discriminant analysis with a pooled, ridge-regularised covariance.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{check_inputs, class_counts, masked_softmax};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::{Classifier, ParamValue};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LdaParams {
    /// Ridge added to the pooled covariance diagonal, relative to its mean
    /// diagonal entry.
    pub ridge: f64,
}

impl Default for LdaParams {
    fn default() -> Self {
        Self { ridge: 1e-6 }
    }
}

impl LdaParams {
    pub(crate) fn set(&mut self, name: &str, value: &ParamValue) -> Result<()> {
        match name {
            "ridge" => {
                let v = value.as_f64(name)?;
                if v < 0.0 {
                    return Err(Error::param("ridge must be >= 0"));
                }
                self.ridge = v;
            }
            _ => return Err(Error::param(format!("LDA has no parameter {name:?}"))),
        }
        Ok(())
    }

    pub(crate) fn params(&self) -> Vec<(String, ParamValue)> {
        vec![("ridge".into(), self.ridge.into())]
    }
}

/// Discriminant `d_k(x) = coef_k · x + intercept_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lda {
    pub n_classes: usize,
    pub present: Vec<bool>,
    pub coef: Vec<Vec<f64>>,
    pub intercept: Vec<f64>,
}

impl Lda {
    pub fn fit(x: &Matrix, y: &[usize], n_classes: usize, params: &LdaParams) -> Result<Self> {
        check_inputs(x, y, n_classes, None)?;
        let (n, p) = (x.rows(), x.cols());
        let counts = class_counts(y, n_classes);
        let present: Vec<bool> = counts.iter().map(|&c| c > 0).collect();
        let k_present = present.iter().filter(|&&b| b).count();
        if n <= k_present {
            return Err(Error::InvalidData(format!(
                "LDA needs more rows than classes ({n} rows, {k_present} classes)"
            )));
        }
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
        let mut cov = DMatrix::<f64>::zeros(p, p);
        for (row, &l) in x.iter_rows().zip(y) {
            let d = DVector::from_iterator(p, row.iter().zip(&means[l]).map(|(v, m)| v - m));
            cov.ger(1.0, &d, &d, 1.0);
        }
        cov /= (n - k_present) as f64;
        let mean_diag = cov.trace() / p.max(1) as f64;
        let ridge = params.ridge * if mean_diag > 0.0 { mean_diag } else { 1.0 };
        for j in 0..p {
            cov[(j, j)] += ridge;
        }
        let chol = cov.cholesky().ok_or_else(|| {
            Error::InvalidData("pooled covariance is not positive definite".into())
        })?;
        let mut coef = vec![vec![0.0; p]; n_classes];
        let mut intercept = vec![0.0; n_classes];
        for k in 0..n_classes {
            if !present[k] {
                continue;
            }
            let mu = DVector::from_column_slice(&means[k]);
            let w = chol.solve(&mu);
            intercept[k] = -0.5 * mu.dot(&w) + (counts[k] as f64 / n as f64).ln();
            coef[k] = w.as_slice().to_vec();
        }
        Ok(Self { n_classes, present, coef, intercept })
    }

    pub fn decision(&self, row: &[f64]) -> Vec<f64> {
        (0..self.n_classes)
            .map(|k| self.intercept[k] + self.coef[k].iter().zip(row).map(|(a, b)| a * b).sum::<f64>())
            .collect()
    }
}

impl Classifier for Lda {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn predict_proba(&self, x: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(x.rows(), self.n_classes);
        for i in 0..x.rows() {
            let mut s = self.decision(x.row(i));
            masked_softmax(&mut s, &self.present);
            out.row_mut(i).copy_from_slice(&s);
        }
        out
    }
}
