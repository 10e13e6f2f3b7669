//! Interquartile-range outlier capping.

use serde::{Deserialize, Serialize};

use crate::data::{stats, Dataset};
use crate::error::{Error, Result};

/// Multiple of the IQR added beyond the quartiles to form the fences.
pub const IQR_FACTOR: f64 = 1.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fence {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
}

impl Fence {
    /// Fences from first and third quartiles: `q1 - 1.5 IQR`, `q3 + 1.5 IQR`.
    pub fn from_quartiles(name: &str, q1: f64, q3: f64) -> Self {
        let iqr = q3 - q1;
        Self {
            name: name.to_string(),
            lo: q1 - IQR_FACTOR * iqr,
            hi: q3 + IQR_FACTOR * iqr,
        }
    }

    #[inline]
    pub fn clamp(&self, v: f64) -> f64 {
        if v < self.lo {
            self.lo
        } else if v > self.hi {
            self.hi
        } else {
            v
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapBounds {
    pub columns: Vec<Fence>,
}

impl CapBounds {
    pub fn get(&self, name: &str) -> Option<&Fence> {
        self.columns.iter().find(|f| f.name == name)
    }
}

pub fn cap_fit(train: &Dataset) -> Result<CapBounds> {
    if train.n_rows() < 2 {
        return Err(Error::InvalidData(
            "capping needs at least two rows to estimate quartiles".into(),
        ));
    }
    let columns = train
        .names()
        .iter()
        .zip(train.columns())
        .map(|(name, col)| {
            let sorted = stats::sorted_copy(col);
            Fence::from_quartiles(
                name,
                stats::quantile(&sorted, 0.25),
                stats::quantile(&sorted, 0.75),
            )
        })
        .collect();
    Ok(CapBounds { columns })
}

/// Clamps every column into its fitted fence. Values already inside the
/// fence are returned untouched.
pub fn cap_apply(data: &Dataset, bounds: &CapBounds) -> Result<Dataset> {
    let columns = data
        .names()
        .iter()
        .zip(data.columns())
        .map(|(name, col)| {
            let f = bounds
                .get(name)
                .ok_or_else(|| Error::MissingColumn(name.clone()))?;
            Ok(col.iter().map(|&v| f.clamp(v)).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    data.with_columns(columns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn one_col(v: Vec<f64>) -> Dataset {
        let n = v.len();
        Dataset::new(vec!["x".into()], vec![v], vec![0; n], vec!["A".into()]).unwrap()
    }

    #[test]
    fn printed_quartile_fences() {
        // rate of penetration and weight on bit quartiles with their
        // post-capping maxima
        let rop = Fence::from_quartiles("rop", 3.55, 12.32);
        assert!((rop.hi - 25.48).abs() <= 0.005 + 1e-9);
        let wob = Fence::from_quartiles("wob", 7.5, 21.2);
        assert!((wob.hi - 41.75).abs() < 1e-9);
    }

    #[test]
    fn caps_far_points_only() {
        let mut v: Vec<f64> = (1..=9).map(f64::from).collect();
        v.push(100.0);
        let d = one_col(v.clone());
        let b = cap_fit(&d).unwrap();
        assert_eq!(b.columns[0].hi, 14.5);
        let out = cap_apply(&d, &b).unwrap();
        assert_eq!(&out.columns()[0][..9], &v[..9]);
        assert_eq!(out.columns()[0][9], 14.5);
    }

    #[test]
    fn inside_data_is_unchanged_and_missing_column_errors() {
        let d = one_col(vec![1.0, 2.0, 3.0, 4.0]);
        let b = cap_fit(&d).unwrap();
        assert_eq!(cap_apply(&d, &b).unwrap(), d);
        let other = Dataset::new(vec!["y".into()], vec![vec![1.0]], vec![0], vec!["A".into()]).unwrap();
        assert!(matches!(cap_apply(&other, &b), Err(Error::MissingColumn(_))));
        assert!(cap_fit(&one_col(vec![1.0])).is_err());
    }

    proptest! {
        #[test]
        fn idempotent_and_respects_bounds(
            fit in prop::collection::vec(-100f64..100.0, 2..50),
            data in prop::collection::vec(-1000f64..1000.0, 1..50),
        ) {
            let b = cap_fit(&one_col(fit)).unwrap();
            let d = one_col(data.clone());
            let once = cap_apply(&d, &b).unwrap();
            let twice = cap_apply(&once, &b).unwrap();
            prop_assert_eq!(&once, &twice);
            let f = &b.columns[0];
            prop_assert!(f.lo <= f.hi);
            for (orig, capped) in data.iter().zip(&once.columns()[0]) {
                prop_assert!(*capped >= f.lo && *capped <= f.hi);
                if *orig >= f.lo && *orig <= f.hi {
                    prop_assert_eq!(orig.to_bits(), capped.to_bits());
                }
            }
        }
    }
}
