//! Min-max rescaling `y = (x - x_min) / (x_max - x_min)`.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnRange {
    pub name: String,
    pub min: f64,
    pub max: f64,
}

impl ColumnRange {
    #[inline]
    pub fn scale(&self, x: f64) -> f64 {
        (x - self.min) / (self.max - self.min)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinMaxParams {
    pub columns: Vec<ColumnRange>,
}

impl MinMaxParams {
    pub fn get(&self, name: &str) -> Option<&ColumnRange> {
        self.columns.iter().find(|c| c.name == name)
    }
}

pub fn minmax_fit(train: &Dataset) -> Result<MinMaxParams> {
    if train.n_rows() == 0 {
        return Err(Error::Empty);
    }
    let columns = train
        .names()
        .iter()
        .zip(train.columns())
        .map(|(name, col)| {
            let min = col.iter().copied().fold(f64::INFINITY, f64::min);
            let max = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if max <= min {
                return Err(Error::ConstantColumn(name.clone()));
            }
            Ok(ColumnRange {
                name: name.clone(),
                min,
                max,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MinMaxParams { columns })
}

/// Applies stored ranges. Values outside the fitted range map outside
/// `[0, 1]`; no clipping.
pub fn minmax_apply(data: &Dataset, params: &MinMaxParams) -> Result<Dataset> {
    let columns = data
        .names()
        .iter()
        .zip(data.columns())
        .map(|(name, col)| {
            let r = params
                .get(name)
                .ok_or_else(|| Error::MissingColumn(name.clone()))?;
            Ok(col.iter().map(|&v| r.scale(v)).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    data.with_columns(columns)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_col(v: Vec<f64>) -> Dataset {
        let n = v.len();
        Dataset::new(vec!["x".into()], vec![v], vec![0; n], vec!["A".into()]).unwrap()
    }

    #[test]
    fn endpoints_midpoint_and_extrapolation() {
        let p = minmax_fit(&one_col(vec![0.0, 4.0, 10.0])).unwrap();
        let out = minmax_apply(&one_col(vec![0.0, 10.0, 5.0, 12.0, -5.0]), &p).unwrap();
        assert_eq!(out.columns()[0], vec![0.0, 1.0, 0.5, 1.2, -0.5]);
    }

    #[test]
    fn constant_column_is_rejected() {
        assert!(matches!(
            minmax_fit(&one_col(vec![3.0, 3.0])),
            Err(Error::ConstantColumn(c)) if c == "x"
        ));
    }
}
