//! k-nearest neighbours by brute-force Euclidean search.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::check_inputs;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::{Classifier, ParamValue};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnnParams {
    pub k: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        Self { k: 5 }
    }
}

impl KnnParams {
    pub(crate) fn set(&mut self, name: &str, value: &ParamValue) -> Result<()> {
        match name {
            "k" | "n_neighbors" => self.k = value.as_usize(name)?,
            _ => return Err(Error::param(format!("KNN has no parameter {name:?}"))),
        }
        if self.k == 0 {
            return Err(Error::param("k must be >= 1"));
        }
        Ok(())
    }

    pub(crate) fn params(&self) -> Vec<(String, ParamValue)> {
        vec![("k".into(), self.k.into())]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    pub n_classes: usize,
    pub k: usize,
    pub x: Matrix,
    pub y: Vec<usize>,
}

impl Knn {
    pub fn fit(x: &Matrix, y: &[usize], n_classes: usize, params: &KnnParams) -> Result<Self> {
        check_inputs(x, y, n_classes, None)?;
        if params.k == 0 || params.k > x.rows() {
            return Err(Error::param(format!(
                "k = {} must lie in 1..={} (training rows)",
                params.k,
                x.rows()
            )));
        }
        Ok(Self { n_classes, k: params.k, x: x.clone(), y: y.to_vec() })
    }

    /// Training-row indices of the `k` nearest neighbours, nearest first;
    /// equal distances keep training order.
    pub fn neighbors(&self, row: &[f64]) -> Vec<usize> {
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(self.k + 1);
        for (i, t) in self.x.iter_rows().enumerate() {
            let d: f64 = t.iter().zip(row).map(|(a, b)| (a - b) * (a - b)).sum();
            if best.len() == self.k && d >= best[self.k - 1].0 {
                continue;
            }
            let pos = best.partition_point(|&(bd, _)| bd <= d);
            best.insert(pos, (d, i));
            best.truncate(self.k);
        }
        best.into_iter().map(|(_, i)| i).collect()
    }
}

impl Classifier for Knn {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn predict_proba(&self, x: &Matrix) -> Matrix {
        let rows: Vec<Vec<f64>> = (0..x.rows())
            .into_par_iter()
            .map(|i| {
                let mut votes = vec![0.0; self.n_classes];
                for j in self.neighbors(x.row(i)) {
                    votes[self.y[j]] += 1.0;
                }
                votes.iter_mut().for_each(|v| *v /= self.k as f64);
                votes
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
    fn k1_reproduces_training_labels() {
        let x = Matrix::from_rows(&[[0.0, 0.0], [1.0, 0.0], [0.0, 3.0], [5.0, 5.0]]).unwrap();
        let y = [0, 1, 2, 1];
        let m = Knn::fit(&x, &y, 3, &KnnParams { k: 1 }).unwrap();
        assert_eq!(m.predict(&x), y.to_vec());
    }

    #[test]
    fn k_equals_n_predicts_majority() {
        let x = Matrix::from_rows(&[[0.0], [1.0], [2.0], [3.0], [4.0]]).unwrap();
        let m = Knn::fit(&x, &[2, 0, 2, 1, 2], 3, &KnnParams { k: 5 }).unwrap();
        assert_eq!(m.predict(&Matrix::from_rows(&[[-9.0], [9.0]]).unwrap()), vec![2, 2]);
    }

    #[test]
    fn ties_resolve_by_row_then_class() {
        let x = Matrix::from_rows(&[[1.0], [-1.0], [2.0]]).unwrap();
        let m = Knn::fit(&x, &[1, 0, 0], 2, &KnnParams { k: 2 }).unwrap();
        assert_eq!(m.neighbors(&[0.0]), vec![0, 1]);
        // one vote each: lowest class wins
        assert_eq!(m.predict(&Matrix::from_rows(&[[0.0]]).unwrap()), vec![0]);
    }

    #[test]
    fn k_out_of_range() {
        let x = Matrix::from_rows(&[[0.0]]).unwrap();
        assert!(Knn::fit(&x, &[0], 1, &KnnParams { k: 2 }).is_err());
        assert!(Knn::fit(&x, &[0], 1, &KnnParams { k: 0 }).is_err());
    }
}
