//! Discrete multiclass AdaBoost (SAMME).

use serde::{Deserialize, Serialize};

use super::{check_n_estimators, weighted_resample};
use crate::error::{Error, Result};
use crate::learners::cart::CartParams;
use crate::learners::{check_inputs, class_counts};
use crate::matrix::Matrix;
use crate::model::{Classifier, Model, ModelSpec, ParamValue};
use crate::rng::{child_rng, derive_seed};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaBoostParams {
    pub base: Box<ModelSpec>,
    pub n_estimators: usize,
    pub learning_rate: f64,
}

impl Default for AdaBoostParams {
    fn default() -> Self {
        Self {
            base: Box::new(ModelSpec::Cart(CartParams::default())),
            n_estimators: 100,
            learning_rate: 1.0,
        }
    }
}

impl AdaBoostParams {
    pub(crate) fn set(&mut self, name: &str, value: &ParamValue) -> Result<()> {
        match name {
            "n_estimators" => self.n_estimators = value.as_usize(name)?,
            "base" => self.base = Box::new(value.as_model(name)?),
            "learning_rate" => self.learning_rate = value.as_f64(name)?,
            _ => match name.strip_prefix("base.") {
                Some(inner) => self.base.set_param(inner, value)?,
                None => return Err(Error::param(format!("AdaBoost has no parameter {name:?}"))),
            },
        }
        if self.learning_rate <= 0.0 {
            return Err(Error::param("learning_rate must be > 0"));
        }
        check_n_estimators(self.n_estimators)
    }

    pub(crate) fn params(&self) -> Vec<(String, ParamValue)> {
        let mut out = vec![
            ("n_estimators".into(), self.n_estimators.into()),
            ("learning_rate".into(), self.learning_rate.into()),
            ("base".into(), self.base.label().into()),
        ];
        out.extend(self.base.params().into_iter().map(|(k, v)| (format!("base.{k}"), v)));
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaBoost {
    pub n_classes: usize,
    pub stages: Vec<Model>,
    /// Stage weights (alpha).
    pub alphas: Vec<f64>,
    /// Weighted training error of each kept stage.
    pub errors: Vec<f64>,
    pub warnings: Vec<String>,
}

impl AdaBoost {
    pub fn fit(x: &Matrix, y: &[usize], n_classes: usize, params: &AdaBoostParams, seed: u64) -> Result<Self> {
        Ok(Self::fit_with_trace(x, y, n_classes, params, seed)?.0)
    }

    /// Also returns the normalised sample-weight vector after every stage
    /// update.
    pub fn fit_with_trace(
        x: &Matrix,
        y: &[usize],
        n_classes: usize,
        params: &AdaBoostParams,
        seed: u64,
    ) -> Result<(Self, Vec<Vec<f64>>)> {
        check_inputs(x, y, n_classes, None)?;
        check_n_estimators(params.n_estimators)?;
        let n = x.rows();
        let k_eff = class_counts(y, n_classes).iter().filter(|&&c| c > 0).count().max(2) as f64;
        let mut w = vec![1.0 / n as f64; n];
        let mut out = Self { n_classes, stages: Vec::new(), alphas: Vec::new(), errors: Vec::new(), warnings: Vec::new() };
        let mut trace = Vec::new();
        for m in 0..params.n_estimators {
            let stage_seed = derive_seed(seed, m as u64);
            let model = if params.base.supports_weights() {
                params.base.fit(x, y, n_classes, Some(&w), stage_seed)?
            } else {
                let idx = weighted_resample(&w, &mut child_rng(seed, m as u64));
                let ys: Vec<usize> = idx.iter().map(|&i| y[i]).collect();
                params.base.fit(&x.select_rows(&idx), &ys, n_classes, None, stage_seed)?
            };
            let pred = model.predict(x);
            let miss: Vec<bool> = pred.iter().zip(y).map(|(p, t)| p != t).collect();
            let err: f64 = w.iter().zip(&miss).filter(|(_, &b)| b).map(|(v, _)| v).sum();
            if err <= 0.0 {
                // a perfect stage; alone it is the whole ensemble
                let alpha = if m == 0 { 1.0 } else { params.learning_rate * ((1.0 / f64::EPSILON).ln() + (k_eff - 1.0).ln()) };
                out.push(model, alpha, 0.0);
                break;
            }
            if err >= 1.0 - 1.0 / k_eff {
                if m == 0 {
                    out.warnings.push(format!(
                        "first AdaBoost stage is no better than chance (weighted error {err:.4}); keeping it alone"
                    ));
                    out.push(model, 1.0, err);
                }
                break;
            }
            let alpha = params.learning_rate * (((1.0 - err) / err).ln() + (k_eff - 1.0).ln());
            out.push(model, alpha, err);
            for (wi, &b) in w.iter_mut().zip(&miss) {
                if b {
                    *wi *= alpha.exp();
                }
            }
            let total: f64 = w.iter().sum();
            if !total.is_finite() {
                out.warnings.push("AdaBoost sample weights overflowed; stopping early".into());
                break;
            }
            w.iter_mut().for_each(|v| *v /= total);
            trace.push(w.clone());
        }
        Ok((out, trace))
    }

    fn push(&mut self, model: Model, alpha: f64, err: f64) {
        self.stages.push(model);
        self.alphas.push(alpha);
        self.errors.push(err);
    }
}

impl Classifier for AdaBoost {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn predict_proba(&self, x: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(x.rows(), self.n_classes);
        for (model, &a) in self.stages.iter().zip(&self.alphas) {
            for (i, c) in model.predict(x).into_iter().enumerate() {
                let v = out.get(i, c);
                out.set(i, c, v + a);
            }
        }
        let total: f64 = self.alphas.iter().sum();
        out.as_mut_slice().iter_mut().for_each(|v| *v /= total);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stump_params() -> AdaBoostParams {
        let mut p = AdaBoostParams { n_estimators: 3, ..Default::default() };
        p.set("base.max_depth", &ParamValue::Int(1)).unwrap();
        p
    }

    /// Weighted-Gini stump by exhaustive search over midpoints (1-D).
    fn oracle_stump(x: &[f64], y: &[usize], w: &[f64]) -> (f64, usize, usize) {
        let mut best: Option<(f64, f64, usize, usize)> = None;
        let mut xs: Vec<f64> = x.to_vec();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        for t in xs.windows(2).map(|p| 0.5 * (p[0] + p[1])) {
            let mut l = [0.0; 2];
            let mut r = [0.0; 2];
            for i in 0..x.len() {
                if x[i] <= t { l[y[i]] += w[i] } else { r[y[i]] += w[i] }
            }
            let gini = |c: [f64; 2]| {
                let s = c[0] + c[1];
                s * (1.0 - (c[0] / s).powi(2) - (c[1] / s).powi(2))
            };
            let imp = gini(l) + gini(r);
            if best.is_none_or(|b| imp < b.0 - 1e-12) {
                let lc = usize::from(l[1] > l[0]);
                let rc = usize::from(r[1] > r[0]);
                best = Some((imp, t, lc, rc));
            }
        }
        let b = best.unwrap();
        (b.1, b.2, b.3)
    }

    #[test]
    fn matches_hand_run_samme() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0];
        let y = [0, 0, 1, 0, 1, 1, 0, 1];
        let xm = Matrix::new(8, 1, x.to_vec()).unwrap();
        let (model, trace) = AdaBoost::fit_with_trace(&xm, &y, 2, &stump_params(), 0).unwrap();

        let mut w = vec![1.0 / 8.0; 8];
        let mut alphas = Vec::new();
        for _ in 0..3 {
            let (t, lc, rc) = oracle_stump(&x, &y, &w);
            let miss: Vec<bool> = (0..8).map(|i| (if x[i] <= t { lc } else { rc }) != y[i]).collect();
            let err: f64 = (0..8).filter(|&i| miss[i]).map(|i| w[i]).sum();
            let a = ((1.0 - err) / err).ln(); // ln(K-1) = 0 for K = 2
            alphas.push(a);
            for i in 0..8 {
                if miss[i] {
                    w[i] *= a.exp();
                }
            }
            let s: f64 = w.iter().sum();
            w.iter_mut().for_each(|v| *v /= s);
        }
        assert_eq!(model.alphas.len(), 3);
        for (a, b) in model.alphas.iter().zip(&alphas) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
        for (a, b) in trace[2].iter().zip(&w) {
            assert!((a - b).abs() < 1e-12);
        }
        for t in &trace {
            assert!((t.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn perfect_first_stage_stands_alone() {
        let x = Matrix::new(4, 1, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let y = [0, 0, 1, 1];
        let m = AdaBoost::fit(&x, &y, 2, &AdaBoostParams::default(), 0).unwrap();
        assert_eq!(m.stages.len(), 1);
        assert_eq!(m.alphas, vec![1.0]);
        assert_eq!(m.predict(&x), y.to_vec());
    }

    #[test]
    fn resampling_base_is_deterministic() {
        let x = Matrix::new(8, 1, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]).unwrap();
        let y = [0, 0, 1, 0, 1, 1, 0, 1];
        let p = AdaBoostParams { base: Box::new(ModelSpec::parse("gnb").unwrap()), n_estimators: 5, learning_rate: 0.5 };
        let a = AdaBoost::fit(&x, &y, 2, &p, 3).unwrap();
        assert_eq!(a, AdaBoost::fit(&x, &y, 2, &p, 3).unwrap());
        let pr = a.predict_proba(&x);
        for r in pr.iter_rows() {
            assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
