//! Box-Cox power transform with maximum-likelihood lambda.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Smallest shifted value; used both for the fit-time shift and to keep
/// apply-time values inside the transform's domain.
pub const EPSILON: f64 = 1e-6;
pub const LAMBDA_MIN: f64 = -5.0;
pub const LAMBDA_MAX: f64 = 5.0;
const GRID_STEP: f64 = 0.05;
const TOLERANCE: f64 = 1e-6;

/// `(v^l - 1) / l`, or `ln v` at `l = 0`. Written via `expm1` so it is
/// continuous through zero.
#[inline]
pub fn transform(v: f64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        v.ln()
    } else {
        (lambda * v.ln()).exp_m1() / lambda
    }
}

/// Profile log-likelihood of lambda given `ln v` for every fit value (the
/// normal scale parameter maximised out):
/// `(l - 1) * sum(ln v) - n/2 * ln(var(transformed))`.
pub fn log_likelihood(log_values: &[f64], lambda: f64) -> f64 {
    let n = log_values.len() as f64;
    let t: Vec<f64> = log_values
        .iter()
        .map(|&lv| {
            if lambda == 0.0 {
                lv
            } else {
                (lambda * lv).exp_m1() / lambda
            }
        })
        .collect();
    let mean = t.iter().sum::<f64>() / n;
    let var = t.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let sum_log: f64 = log_values.iter().sum();
    (lambda - 1.0) * sum_log - 0.5 * n * var.ln()
}

/// Lambda maximising [`log_likelihood`] on `[-5, 5]`: coarse grid to bracket
/// the optimum, golden-section refinement inside the bracket.
pub fn fit_lambda(log_values: &[f64]) -> f64 {
    let steps = ((LAMBDA_MAX - LAMBDA_MIN) / GRID_STEP).round() as usize;
    let mut best = (LAMBDA_MIN, f64::NEG_INFINITY);
    for i in 0..=steps {
        let l = LAMBDA_MIN + GRID_STEP * i as f64;
        let ll = log_likelihood(log_values, l);
        if ll > best.1 {
            best = (l, ll);
        }
    }
    let mut a = (best.0 - GRID_STEP).max(LAMBDA_MIN);
    let mut b = (best.0 + GRID_STEP).min(LAMBDA_MAX);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = log_likelihood(log_values, c);
    let mut fd = log_likelihood(log_values, d);
    while b - a > TOLERANCE {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = log_likelihood(log_values, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = log_likelihood(log_values, d);
        }
    }
    let mid = 0.5 * (a + b);
    // the bracket may have missed a grid point that is still better
    if log_likelihood(log_values, mid) >= best.1 {
        mid
    } else {
        best.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnBoxCox {
    pub name: String,
    pub lambda: f64,
    pub shift: f64,
}

impl ColumnBoxCox {
    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        let v = x + self.shift;
        transform(if v <= 0.0 { EPSILON } else { v }, self.lambda)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxCoxParams {
    pub columns: Vec<ColumnBoxCox>,
}

impl BoxCoxParams {
    pub fn get(&self, name: &str) -> Option<&ColumnBoxCox> {
        self.columns.iter().find(|c| c.name == name)
    }
}

pub fn fit_column(name: &str, values: &[f64]) -> Result<ColumnBoxCox> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if values.len() < 2 || min == max {
        return Err(Error::DegenerateColumn(name.to_string()));
    }
    let shift = if min <= 0.0 { EPSILON - min } else { 0.0 };
    let logs: Vec<f64> = values
        .iter()
        .map(|&x| (x + shift).max(EPSILON).ln())
        .collect();
    Ok(ColumnBoxCox {
        name: name.to_string(),
        lambda: fit_lambda(&logs),
        shift,
    })
}

pub fn boxcox_fit(train: &Dataset) -> Result<BoxCoxParams> {
    let columns = train
        .names()
        .iter()
        .zip(train.columns())
        .map(|(n, c)| fit_column(n, c))
        .collect::<Result<Vec<_>>>()?;
    Ok(BoxCoxParams { columns })
}

pub fn boxcox_apply(data: &Dataset, params: &BoxCoxParams) -> Result<Dataset> {
    let columns = data
        .names()
        .iter()
        .zip(data.columns())
        .map(|(name, col)| {
            let p = params
                .get(name)
                .ok_or_else(|| Error::MissingColumn(name.clone()))?;
            Ok(col.iter().map(|&v| p.apply(v)).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    data.with_columns(columns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn special_lambdas() {
        let p = ColumnBoxCox { name: "x".into(), lambda: 0.0, shift: 0.5 };
        assert!((p.apply(2.0) - 2.5f64.ln()).abs() < 1e-15);
        let p = ColumnBoxCox { name: "x".into(), lambda: 1.0, shift: 0.5 };
        assert!((p.apply(2.0) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn shift_puts_minimum_at_epsilon() {
        let c = fit_column("x", &[0.0, 0.5, 1.0, 0.25]).unwrap();
        assert_eq!(c.shift, EPSILON);
        let c = fit_column("x", &[-2.0, 1.0, 3.0]).unwrap();
        assert!((-2.0 + c.shift - EPSILON).abs() < 1e-15);
        let c = fit_column("x", &[1.0, 2.0]).unwrap();
        assert_eq!(c.shift, 0.0);
        assert!(fit_column("x", &[1.0, 1.0]).is_err());
    }

    #[test]
    fn apply_clamps_below_domain() {
        let p = ColumnBoxCox { name: "x".into(), lambda: 0.0, shift: 0.0 };
        assert_eq!(p.apply(-3.0), EPSILON.ln());
    }

    #[test]
    fn lognormal_sample_recovers_log_transform() {
        let mut rng = crate::rng::rng(11);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let x: Vec<f64> = (0..500).map(|_| { let z: f64 = normal.sample(&mut rng); z.exp() }).collect();
        let c = fit_column("x", &x).unwrap();
        assert!(c.lambda.abs() < 0.15, "lambda {}", c.lambda);
    }

    proptest! {
        #[test]
        fn strictly_increasing(lambda in -5f64..5.0, a in 1e-3f64..100.0, d in 1e-3f64..100.0) {
            prop_assert!(transform(a + d, lambda) > transform(a, lambda));
        }
    }
}
