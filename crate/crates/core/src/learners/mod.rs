//! The six base classifiers. Each exposes a `*Params` hyperparameter struct
//! and a fitted model implementing [`Classifier`](crate::model::Classifier).

pub mod cart;
pub mod gnb;
pub mod knn;
pub mod lda;
pub mod logreg;
pub mod svm;
pub mod tree;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub(crate) fn check_inputs(
    x: &Matrix,
    y: &[usize],
    n_classes: usize,
    weights: Option<&[f64]>,
) -> Result<()> {
    if x.rows() == 0 {
        return Err(Error::Empty);
    }
    if y.len() != x.rows() {
        return Err(Error::LengthMismatch { expected: x.rows(), got: y.len() });
    }
    if let Some(w) = weights {
        if w.len() != x.rows() {
            return Err(Error::LengthMismatch { expected: x.rows(), got: w.len() });
        }
        if w.iter().any(|v| !v.is_finite() || *v < 0.0) || !w.iter().any(|v| *v > 0.0) {
            return Err(Error::param(
                "sample weights must be finite, non-negative and not all zero",
            ));
        }
    }
    if let Some(&bad) = y.iter().find(|&&l| l >= n_classes) {
        return Err(Error::InvalidData(format!("label {bad} outside {n_classes} classes")));
    }
    Ok(())
}

pub(crate) fn class_counts(y: &[usize], n_classes: usize) -> Vec<usize> {
    let mut c = vec![0; n_classes];
    for &l in y {
        c[l] += 1;
    }
    c
}

/// Softmax over the present classes; absent classes get probability 0.
pub(crate) fn masked_softmax(scores: &mut [f64], present: &[bool]) {
    let m = scores
        .iter()
        .zip(present)
        .filter(|(_, &p)| p)
        .map(|(s, _)| *s)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for (s, &p) in scores.iter_mut().zip(present) {
        *s = if p { (*s - m).exp() } else { 0.0 };
        total += *s;
    }
    for s in scores.iter_mut() {
        *s /= total;
    }
}
