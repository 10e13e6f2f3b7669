//! One-vs-rest RBF-kernel SVM trained by deterministic full-batch kernel
//! Pegasos (subgradient descent on the averaged hinge objective).
//!
//! The objective per binary problem is `lambda/2 ||w||^2 + mean(hinge)`, with
//! a constant 1 added to the kernel to absorb the bias. Because the loss is a
//! mean, duplicating every training row leaves the solution unchanged. This is
//! an approximate solver, not SMO.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_inputs, class_counts, masked_softmax};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::{Classifier, ParamValue};
use crate::rng::rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    /// Regularisation weight on `||w||^2 / 2`.
    pub lambda: f64,
    /// RBF width; `None` uses `1 / (n_features * var(X))`.
    pub gamma: Option<f64>,
    pub n_iter: usize,
    /// Larger training sets are reduced to this many rows by a seeded,
    /// class-proportional subsample.
    pub max_train: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self { lambda: 1e-3, gamma: None, n_iter: 500, max_train: 1000 }
    }
}

impl SvmParams {
    pub(crate) fn set(&mut self, name: &str, value: &ParamValue) -> Result<()> {
        match name {
            "lambda" => self.lambda = value.as_f64(name)?,
            "gamma" => self.gamma = value.as_opt_f64(name)?,
            "n_iter" => self.n_iter = value.as_usize(name)?,
            "max_train" => self.max_train = value.as_usize(name)?,
            _ => return Err(Error::param(format!("SVM has no parameter {name:?}"))),
        }
        if self.lambda <= 0.0 || self.n_iter == 0 || self.max_train < 2 || self.gamma.is_some_and(|g| g <= 0.0) {
            return Err(Error::param("SVM needs lambda > 0, gamma > 0, n_iter >= 1, max_train >= 2"));
        }
        Ok(())
    }

    pub(crate) fn params(&self) -> Vec<(String, ParamValue)> {
        vec![
            ("lambda".into(), self.lambda.into()),
            ("gamma".into(), self.gamma.into()),
            ("n_iter".into(), self.n_iter.into()),
            ("max_train".into(), self.max_train.into()),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Svm {
    pub n_classes: usize,
    pub gamma: f64,
    pub present: Vec<bool>,
    /// Training rows with a non-zero coefficient in any binary problem.
    pub support: Matrix,
    /// `n_classes x n_support` kernel expansion coefficients.
    pub coef: Vec<Vec<f64>>,
}

fn rbf(gamma: f64, a: &[f64], b: &[f64]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum();
    (-gamma * d).exp()
}

fn subsample(y: &[usize], n_classes: usize, max: usize, seed: u64) -> Vec<usize> {
    let n = y.len();
    if n <= max {
        return (0..n).collect();
    }
    let mut r = rng(seed);
    let mut by_class = vec![Vec::new(); n_classes];
    for (i, &l) in y.iter().enumerate() {
        by_class[l].push(i);
    }
    let mut out = Vec::with_capacity(max + n_classes);
    for mut rows in by_class.into_iter().filter(|r| !r.is_empty()) {
        let take = ((rows.len() * max) as f64 / n as f64).round().max(1.0) as usize;
        rows.shuffle(&mut r);
        out.extend_from_slice(&rows[..take.min(rows.len())]);
    }
    out.sort_unstable();
    out
}

impl Svm {
    pub fn fit(x: &Matrix, y: &[usize], n_classes: usize, params: &SvmParams, seed: u64) -> Result<Self> {
        check_inputs(x, y, n_classes, None)?;
        let counts = class_counts(y, n_classes);
        let present: Vec<bool> = counts.iter().map(|&c| c > 0).collect();
        if present.iter().filter(|&&b| b).count() < 2 {
            return Err(Error::InvalidData("SVM needs at least two classes".into()));
        }
        let gamma = params.gamma.unwrap_or_else(|| {
            let v = x.as_slice();
            let m = v.iter().sum::<f64>() / v.len() as f64;
            let var = v.iter().map(|a| (a - m) * (a - m)).sum::<f64>() / v.len() as f64;
            if var > 0.0 { 1.0 / (x.cols() as f64 * var) } else { 1.0 }
        });
        let idx = subsample(y, n_classes, params.max_train, seed);
        let xs = x.select_rows(&idx);
        let ys: Vec<usize> = idx.iter().map(|&i| y[i]).collect();
        let n = xs.rows();
        let kernel: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| (0..n).map(|j| rbf(gamma, xs.row(i), xs.row(j)) + 1.0).collect())
            .collect();
        let coef: Vec<Vec<f64>> = (0..n_classes)
            .into_par_iter()
            .map(|k| {
                if !present[k] {
                    return vec![0.0; n];
                }
                let sign: Vec<f64> = ys.iter().map(|&l| if l == k { 1.0 } else { -1.0 }).collect();
                // beta_t = sum of violation indicators / (lambda t n)
                let mut hits = vec![0.0; n];
                let mut beta = vec![0.0; n];
                for t in 1..=params.n_iter {
                    let viol: Vec<bool> = (0..n)
                        .map(|i| {
                            let f: f64 = kernel[i].iter().zip(&beta).map(|(a, b)| a * b).sum();
                            sign[i] * f < 1.0
                        })
                        .collect();
                    for i in 0..n {
                        if viol[i] {
                            hits[i] += sign[i];
                        }
                    }
                    let scale = 1.0 / (params.lambda * t as f64 * n as f64);
                    for i in 0..n {
                        beta[i] = hits[i] * scale;
                    }
                }
                beta
            })
            .collect();
        let keep: Vec<usize> = (0..n).filter(|&i| coef.iter().any(|c| c[i] != 0.0)).collect();
        let support = xs.select_rows(&keep);
        let coef = coef.into_iter().map(|c| keep.iter().map(|&i| c[i]).collect()).collect();
        Ok(Self { n_classes, gamma, present, support, coef })
    }

    /// One-vs-rest margins of a row.
    pub fn margins(&self, row: &[f64]) -> Vec<f64> {
        let k: Vec<f64> = self.support.iter_rows().map(|s| rbf(self.gamma, s, row) + 1.0).collect();
        self.coef.iter().map(|c| c.iter().zip(&k).map(|(a, b)| a * b).sum()).collect()
    }
}

impl Classifier for Svm {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn predict_proba(&self, x: &Matrix) -> Matrix {
        let rows: Vec<Vec<f64>> = (0..x.rows())
            .into_par_iter()
            .map(|i| {
                let mut m = self.margins(x.row(i));
                masked_softmax(&mut m, &self.present);
                m
            })
            .collect();
        let mut out = Matrix::zeros(x.rows(), self.n_classes);
        for (i, r) in rows.iter().enumerate() {
            out.row_mut(i).copy_from_slice(r);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xor_with_unit_gamma() {
        let x = Matrix::from_rows(&[[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]]).unwrap();
        let y = [0, 1, 1, 0];
        let p = SvmParams { gamma: Some(1.0), ..Default::default() };
        let m = Svm::fit(&x, &y, 2, &p, 0).unwrap();
        assert_eq!(m.predict(&x), y.to_vec());
    }

    #[test]
    fn duplication_and_shift_invariance() {
        let rows: Vec<[f64; 2]> = (0..30)
            .map(|i| {
                let t = i as f64 * 0.37;
                [t.sin() + (i % 3) as f64 * 3.0, t.cos()]
            })
            .collect();
        let y: Vec<usize> = (0..30).map(|i| i % 3).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let base = Svm::fit(&x, &y, 3, &SvmParams::default(), 1).unwrap().predict(&x);
        assert_eq!(base, y);

        let doubled: Vec<[f64; 2]> = rows.iter().chain(rows.iter()).copied().collect();
        let y2: Vec<usize> = y.iter().chain(y.iter()).copied().collect();
        let m2 = Svm::fit(&Matrix::from_rows(&doubled).unwrap(), &y2, 3, &SvmParams::default(), 1).unwrap();
        assert_eq!(m2.predict(&x), base);

        let shifted: Vec<[f64; 2]> = rows.iter().map(|r| [r[0] + 10.0, r[1] + 10.0]).collect();
        let xs = Matrix::from_rows(&shifted).unwrap();
        let m3 = Svm::fit(&xs, &y, 3, &SvmParams::default(), 1).unwrap();
        assert_eq!(m3.predict(&xs), base);
    }

    #[test]
    fn single_class_rejected() {
        let x = Matrix::from_rows(&[[0.0], [1.0]]).unwrap();
        assert!(Svm::fit(&x, &[0, 0], 2, &SvmParams::default(), 0).is_err());
    }
}
