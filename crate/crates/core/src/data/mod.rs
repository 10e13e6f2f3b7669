//! Dataset representation, CSV ingestion and exploratory statistics.

mod io;
pub mod stats;

pub use io::{load_csv, read_csv, write_csv};
pub use stats::{
    boxplot_stats, class_distribution, describe, histogram, pearson, pearson_matrix, quantile,
    BoxplotStats, ClassCount, ClassDistribution, ColumnSummary, CorrelationMatrix, HistogramBin,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Severity-ordered class names used when every label matches one of them.
pub const SEVERITY_CLASSES: [&str; 5] = [
    "No Loss",
    "Seepage Loss",
    "Partial Loss",
    "Severe Loss",
    "Complete Loss",
];

/// Column-major table of named numeric features plus a categorical label.
///
/// Labels are stored as indices into `class_vocab`. The invariants (equal
/// lengths, unique names, finite values, labels inside the vocabulary) are
/// checked on construction and the struct is immutable afterwards.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    labels: Vec<usize>,
    class_vocab: Vec<String>,
}

impl Dataset {
    pub fn new(
        names: Vec<String>,
        columns: Vec<Vec<f64>>,
        labels: Vec<usize>,
        class_vocab: Vec<String>,
    ) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::LengthMismatch {
                expected: names.len(),
                got: columns.len(),
            });
        }
        let n = labels.len();
        for (name, col) in names.iter().zip(&columns) {
            if col.len() != n {
                return Err(Error::InvalidData(format!(
                    "column {name:?} has {} values, expected {n}",
                    col.len()
                )));
            }
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidData(format!(
                    "column {name:?} has a non-finite value at row {i}"
                )));
            }
        }
        for (i, a) in names.iter().enumerate() {
            if names[..i].contains(a) {
                return Err(Error::InvalidData(format!("duplicate column name {a:?}")));
            }
        }
        for (i, a) in class_vocab.iter().enumerate() {
            if class_vocab[..i].contains(a) {
                return Err(Error::InvalidData(format!("duplicate class name {a:?}")));
            }
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_vocab.len()) {
            return Err(Error::InvalidData(format!(
                "label index {bad} outside vocabulary of {}",
                class_vocab.len()
            )));
        }
        Ok(Self {
            names,
            columns,
            labels,
            class_vocab,
        })
    }

    /// Builds a dataset from string labels, deriving the vocabulary with
    /// [`infer_vocab`] unless one is given.
    pub fn from_named_labels(
        names: Vec<String>,
        columns: Vec<Vec<f64>>,
        labels: &[String],
        vocab: Option<&[String]>,
    ) -> Result<Self> {
        let vocab = match vocab {
            Some(v) => v.to_vec(),
            None => infer_vocab(labels),
        };
        let idx = labels
            .iter()
            .map(|l| {
                vocab
                    .iter()
                    .position(|v| v == l)
                    .ok_or_else(|| Error::UnknownLabel(l.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(names, columns, idx, vocab)
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn n_classes(&self) -> usize {
        self.class_vocab.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_vocab(&self) -> &[String] {
        &self.class_vocab
    }

    pub fn label_names(&self) -> Vec<&str> {
        self.labels
            .iter()
            .map(|&l| self.class_vocab[l].as_str())
            .collect()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn column(&self, name: &str) -> Result<&[f64]> {
        self.column_index(name)
            .map(|i| self.columns[i].as_slice())
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    }

    /// Subset of rows in the given order (indices may repeat).
    pub fn select_rows(&self, idx: &[usize]) -> Self {
        Self {
            names: self.names.clone(),
            columns: self
                .columns
                .iter()
                .map(|c| idx.iter().map(|&i| c[i]).collect())
                .collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            class_vocab: self.class_vocab.clone(),
        }
    }

    /// Copy with the named columns removed.
    pub fn drop_columns(&self, drop: &[String]) -> Result<Self> {
        for d in drop {
            self.column(d)?;
        }
        let (names, columns) = self
            .names
            .iter()
            .zip(&self.columns)
            .filter(|(n, _)| !drop.contains(n))
            .map(|(n, c)| (n.clone(), c.clone()))
            .unzip();
        Ok(Self {
            names,
            columns,
            labels: self.labels.clone(),
            class_vocab: self.class_vocab.clone(),
        })
    }

    /// Copy keeping only `keep`, in the given order.
    pub fn select_columns(&self, keep: &[String]) -> Result<Self> {
        let columns = keep
            .iter()
            .map(|k| self.column(k).map(<[f64]>::to_vec))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            names: keep.to_vec(),
            columns,
            labels: self.labels.clone(),
            class_vocab: self.class_vocab.clone(),
        })
    }

    /// Same schema and labels with replaced column values.
    pub fn with_columns(&self, columns: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(
            self.names.clone(),
            columns,
            self.labels.clone(),
            self.class_vocab.clone(),
        )
    }

    /// Appends a feature column.
    pub fn with_column(&self, name: &str, values: Vec<f64>) -> Result<Self> {
        let mut names = self.names.clone();
        let mut columns = self.columns.clone();
        names.push(name.to_string());
        columns.push(values);
        Self::new(names, columns, self.labels.clone(), self.class_vocab.clone())
    }

    /// Copy with the values of an existing column replaced.
    pub fn replace_column(&self, name: &str, values: Vec<f64>) -> Result<Self> {
        let j = self
            .column_index(name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))?;
        let mut columns = self.columns.clone();
        columns[j] = values;
        self.with_columns(columns)
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_columns(&self.columns, self.n_rows())
    }
}

/// Class vocabulary for a label sequence: the canonical severity order when
/// every label is a severity class name, first-occurrence order otherwise.
pub fn infer_vocab(labels: &[String]) -> Vec<String> {
    if labels
        .iter()
        .all(|l| SEVERITY_CLASSES.contains(&l.as_str()))
    {
        SEVERITY_CLASSES
            .iter()
            .filter(|c| labels.iter().any(|l| l == *c))
            .map(|c| c.to_string())
            .collect()
    } else {
        let mut vocab: Vec<String> = Vec::new();
        for l in labels {
            if !vocab.contains(l) {
                vocab.push(l.clone());
            }
        }
        vocab
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn rejects_broken_invariants() {
        let ok = Dataset::new(s(&["a"]), vec![vec![1.0, 2.0]], vec![0, 0], s(&["A"]));
        assert!(ok.is_ok());
        assert!(Dataset::new(s(&["a"]), vec![vec![1.0]], vec![0, 0], s(&["A"])).is_err());
        assert!(Dataset::new(s(&["a", "a"]), vec![vec![1.0], vec![2.0]], vec![0], s(&["A"])).is_err());
        assert!(Dataset::new(s(&["a"]), vec![vec![f64::NAN]], vec![0], s(&["A"])).is_err());
        assert!(Dataset::new(s(&["a"]), vec![vec![1.0]], vec![1], s(&["A"])).is_err());
    }

    #[test]
    fn vocab_order() {
        let labels = s(&["Severe Loss", "No Loss", "Severe Loss"]);
        assert_eq!(infer_vocab(&labels), s(&["No Loss", "Severe Loss"]));
        let labels = s(&["b", "a", "b"]);
        assert_eq!(infer_vocab(&labels), s(&["b", "a"]));
    }

    #[test]
    fn row_and_column_selection() {
        let d = Dataset::new(
            s(&["a", "b"]),
            vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]],
            vec![0, 1, 0],
            s(&["x", "y"]),
        )
        .unwrap();
        let r = d.select_rows(&[2, 0]);
        assert_eq!(r.columns()[1], vec![6.0, 4.0]);
        assert_eq!(r.labels(), &[0, 0]);
        let c = d.drop_columns(&s(&["a"])).unwrap();
        assert_eq!(c.names(), &s(&["b"]));
        assert!(d.drop_columns(&s(&["zz"])).is_err());
        let m = d.to_matrix();
        assert_eq!(m.row(1), &[2.0, 5.0]);
    }
}
