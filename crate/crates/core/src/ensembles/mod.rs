//! Bagging, AdaBoost (SAMME), random forest and gradient boosting.

pub mod adaboost;
pub mod bagging;
pub mod forest;
pub mod gbm;

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::Rng;

/// Multiplicity of each row in a size-`n` draw with replacement.
pub(crate) fn bootstrap_counts(n: usize, rng: &mut Rng) -> Vec<f64> {
    let mut counts = vec![0.0; n];
    for _ in 0..n {
        counts[rng.random_range(0..n)] += 1.0;
    }
    counts
}

/// Row indices drawn with replacement in proportion to `weights`.
pub(crate) fn weighted_resample(weights: &[f64], rng: &mut Rng) -> Vec<usize> {
    let mut cdf = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for w in weights {
        acc += w;
        cdf.push(acc);
    }
    (0..weights.len())
        .map(|_| {
            let u = rng.random::<f64>() * acc;
            cdf.partition_point(|&c| c <= u).min(weights.len() - 1)
        })
        .collect()
}

/// Mean of equally shaped probability matrices, summed in the given order.
pub(crate) fn average(probas: impl IntoIterator<Item = Matrix>, rows: usize, cols: usize) -> Matrix {
    let mut out = Matrix::zeros(rows, cols);
    let mut n = 0usize;
    for p in probas {
        for (o, v) in out.as_mut_slice().iter_mut().zip(p.as_slice()) {
            *o += v;
        }
        n += 1;
    }
    let inv = 1.0 / n.max(1) as f64;
    out.as_mut_slice().iter_mut().for_each(|v| *v *= inv);
    out
}

pub(crate) fn check_n_estimators(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::param("n_estimators must be >= 1"));
    }
    Ok(())
}
