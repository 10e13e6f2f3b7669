//! Multinomial logistic regression, L2-penalised, trained by full-batch
//! gradient descent.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::check_inputs;
use crate::error::{Error, Result};
use crate::matrix::{softmax_in_place, Matrix};
use crate::model::{Classifier, ParamValue};

/// Rows per reduction chunk. Fixed so sums do not depend on the thread count.
const CHUNK: usize = 2048;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogRegParams {
    /// Inverse regularisation strength.
    pub c: f64,
    pub max_iter: usize,
    /// Convergence threshold on the largest absolute gradient entry.
    pub tol: f64,
}

impl Default for LogRegParams {
    fn default() -> Self {
        Self { c: 1.0, max_iter: 1000, tol: 1e-6 }
    }
}

impl LogRegParams {
    pub(crate) fn set(&mut self, name: &str, value: &ParamValue) -> Result<()> {
        match name {
            "c" | "C" => self.c = value.as_f64(name)?,
            "max_iter" => self.max_iter = value.as_usize(name)?,
            "tol" => self.tol = value.as_f64(name)?,
            _ => return Err(Error::param(format!("LR has no parameter {name:?}"))),
        }
        if self.c <= 0.0 || self.tol <= 0.0 || self.max_iter == 0 {
            return Err(Error::param("LR needs c > 0, tol > 0, max_iter >= 1"));
        }
        Ok(())
    }

    pub(crate) fn params(&self) -> Vec<(String, ParamValue)> {
        vec![
            ("c".into(), self.c.into()),
            ("max_iter".into(), self.max_iter.into()),
            ("tol".into(), self.tol.into()),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogReg {
    pub n_classes: usize,
    pub n_features: usize,
    /// Row-major `n_classes x (n_features + 1)`; the last entry of each row
    /// is the intercept.
    pub weights: Vec<f64>,
    pub n_iter: usize,
    pub converged: bool,
}

/// Mean cross-entropy plus `||W||^2 / (2 c n)` (intercepts unpenalised) and
/// its gradient with respect to the flattened weights.
pub fn loss_and_grad(x: &Matrix, y: &[usize], n_classes: usize, w: &[f64], c: f64) -> (f64, Vec<f64>) {
    let (n, p) = (x.rows(), x.cols());
    let stride = p + 1;
    let parts: Vec<(f64, Vec<f64>)> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|ch| {
            let mut loss = 0.0;
            let mut g = vec![0.0; w.len()];
            let mut z = vec![0.0; n_classes];
            for i in ch * CHUNK..((ch + 1) * CHUNK).min(n) {
                let row = x.row(i);
                scores(w, stride, row, &mut z);
                let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let lse = m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
                loss += lse - z[y[i]];
                for k in 0..n_classes {
                    let r = (z[k] - lse).exp() - if k == y[i] { 1.0 } else { 0.0 };
                    let gk = &mut g[k * stride..(k + 1) * stride];
                    for (gj, xj) in gk.iter_mut().zip(row) {
                        *gj += r * xj;
                    }
                    gk[p] += r;
                }
            }
            (loss, g)
        })
        .collect();
    let mut loss = 0.0;
    let mut grad = vec![0.0; w.len()];
    for (l, g) in parts {
        loss += l;
        grad.iter_mut().zip(&g).for_each(|(a, b)| *a += b);
    }
    let nf = n as f64;
    loss /= nf;
    grad.iter_mut().for_each(|v| *v /= nf);
    let lam = 1.0 / (c * nf);
    for k in 0..n_classes {
        for j in 0..p {
            let wk = w[k * stride + j];
            loss += 0.5 * lam * wk * wk;
            grad[k * stride + j] += lam * wk;
        }
    }
    (loss, grad)
}

fn scores(w: &[f64], stride: usize, row: &[f64], out: &mut [f64]) {
    for (k, o) in out.iter_mut().enumerate() {
        let wk = &w[k * stride..(k + 1) * stride];
        *o = wk[stride - 1] + wk.iter().zip(row).map(|(a, b)| a * b).sum::<f64>();
    }
}

impl LogReg {
    pub fn fit(x: &Matrix, y: &[usize], n_classes: usize, params: &LogRegParams) -> Result<Self> {
        check_inputs(x, y, n_classes, None)?;
        let p = x.cols();
        let mut w = vec![0.0; n_classes * (p + 1)];
        let (mut loss, mut grad) = loss_and_grad(x, y, n_classes, &w, params.c);
        let mut step = 1.0;
        let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
        let mut converged = false;
        let mut n_iter = 0;
        while n_iter < params.max_iter {
            if grad.iter().fold(0.0f64, |m, g| m.max(g.abs())) < params.tol {
                converged = true;
                break;
            }
            n_iter += 1;
            // Barzilai-Borwein step as the first trial, Armijo backtracking after
            if let Some((w_old, g_old)) = &prev {
                let (mut ss, mut sy) = (0.0, 0.0);
                for i in 0..w.len() {
                    let s = w[i] - w_old[i];
                    ss += s * s;
                    sy += s * (grad[i] - g_old[i]);
                }
                if sy > 0.0 {
                    step = ss / sy;
                }
            }
            let gg: f64 = grad.iter().map(|g| g * g).sum();
            let accepted = loop {
                let trial: Vec<f64> = w.iter().zip(&grad).map(|(a, g)| a - step * g).collect();
                let (l, g) = loss_and_grad(x, y, n_classes, &trial, params.c);
                if l <= loss - 1e-4 * step * gg {
                    break Some((trial, l, g));
                }
                step *= 0.5;
                if step < 1e-20 {
                    break None;
                }
            };
            let Some((trial, l, g)) = accepted else {
                // no descent possible at machine precision
                converged = true;
                break;
            };
            prev = Some((std::mem::replace(&mut w, trial), std::mem::replace(&mut grad, g)));
            loss = l;
        }
        Ok(Self { n_classes, n_features: p, weights: w, n_iter, converged })
    }
}

impl Classifier for LogReg {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn predict_proba(&self, x: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(x.rows(), self.n_classes);
        for i in 0..x.rows() {
            let o = out.row_mut(i);
            scores(&self.weights, self.n_features + 1, x.row(i), o);
            softmax_in_place(o);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng;
    use rand::Rng as _;

    #[test]
    fn zero_features_fit_class_frequencies() {
        let x = Matrix::zeros(10, 2);
        let y = [0, 0, 0, 0, 0, 0, 1, 1, 1, 2];
        let m = LogReg::fit(&x, &y, 3, &LogRegParams::default()).unwrap();
        assert!(m.converged);
        let p = m.predict_proba(&Matrix::zeros(1, 2));
        for (a, b) in p.row(0).iter().zip([0.6, 0.3, 0.1]) {
            assert!((a - b).abs() < 1e-5, "{a} vs {b}");
        }
    }

    #[test]
    fn separable_training_accuracy() {
        let mut r = rng(3);
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..100 {
            let c = i % 2;
            let a: f64 = r.random_range(0.0..1.0);
            let b: f64 = r.random_range(0.0..1.0);
            rows.push([a + 2.0 * c as f64, b]);
            y.push(c);
        }
        let x = Matrix::from_rows(&rows).unwrap();
        let m = LogReg::fit(&x, &y, 2, &LogRegParams::default()).unwrap();
        assert_eq!(m.predict(&x), y);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut r = rng(11);
        let x = Matrix::new(7, 3, (0..21).map(|_| r.random_range(-2.0..2.0)).collect()).unwrap();
        let y = [0, 1, 2, 1, 0, 2, 2];
        let w: Vec<f64> = (0..12).map(|_| r.random_range(-1.0..1.0)).collect();
        let (_, g) = loss_and_grad(&x, &y, 3, &w, 0.7);
        let h = 1e-5;
        for i in 0..w.len() {
            let mut a = w.clone();
            let mut b = w.clone();
            a[i] += h;
            b[i] -= h;
            let fd = (loss_and_grad(&x, &y, 3, &a, 0.7).0 - loss_and_grad(&x, &y, 3, &b, 0.7).0) / (2.0 * h);
            assert!((fd - g[i]).abs() <= 1e-5 * g[i].abs().max(1e-3), "{i}: {fd} vs {}", g[i]);
        }
    }
}
