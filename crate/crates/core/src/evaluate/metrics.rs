use serde::{Deserialize, Serialize};

use super::confusion::ConfusionMatrix;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassScore {
    pub class: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Average {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub classes: Vec<ClassScore>,
    pub macro_avg: Average,
    pub weighted_avg: Average,
    pub accuracy: f64,
    pub total: usize,
    /// Zero-denominator cases that were scored as 0.
    pub warnings: Vec<String>,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Per-class precision, recall and F1 (`2TP / (2TP + FP + FN)`), their macro
/// and support-weighted averages, and accuracy.
pub fn metrics(cm: &ConfusionMatrix) -> Result<ClassMetrics> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::Empty);
    }
    let mut warnings = Vec::new();
    let mut classes = Vec::with_capacity(cm.n_classes());
    for (i, name) in cm.classes.iter().enumerate() {
        let (tp, fp, fn_) = (cm.tp(i), cm.fp(i), cm.fn_(i));
        let precision = ratio(tp, tp + fp).unwrap_or_else(|| {
            warnings.push(format!("precision of {name:?} is undefined (never predicted); set to 0"));
            0.0
        });
        let recall = ratio(tp, tp + fn_).unwrap_or_else(|| {
            warnings.push(format!("recall of {name:?} is undefined (no true members); set to 0"));
            0.0
        });
        let f1 = ratio(2 * tp, 2 * tp + fp + fn_).unwrap_or(0.0);
        classes.push(ClassScore { class: name.clone(), precision, recall, f1, support: tp + fn_ });
    }
    let k = classes.len() as f64;
    let macro_avg = Average {
        precision: classes.iter().map(|c| c.precision).sum::<f64>() / k,
        recall: classes.iter().map(|c| c.recall).sum::<f64>() / k,
        f1: classes.iter().map(|c| c.f1).sum::<f64>() / k,
        support: total,
    };
    let wsum = |f: fn(&ClassScore) -> f64| {
        classes.iter().map(|c| c.support as f64 * f(c)).sum::<f64>() / total as f64
    };
    let weighted_avg = Average {
        precision: wsum(|c| c.precision),
        recall: wsum(|c| c.recall),
        f1: wsum(|c| c.f1),
        support: total,
    };
    Ok(ClassMetrics {
        accuracy: cm.trace() as f64 / total as f64,
        classes,
        macro_avg,
        weighted_avg,
        total,
        warnings,
    })
}

/// Scores used for cross-validation and search.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[default]
    WeightedF1,
    MacroF1,
    Accuracy,
}

impl Metric {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "weighted_f1" => Ok(Metric::WeightedF1),
            "macro_f1" => Ok(Metric::MacroF1),
            "accuracy" => Ok(Metric::Accuracy),
            _ => Err(Error::param(format!("unknown metric {s:?}"))),
        }
    }

    pub fn of(self, m: &ClassMetrics) -> f64 {
        match self {
            Metric::WeightedF1 => m.weighted_avg.f1,
            Metric::MacroF1 => m.macro_avg.f1,
            Metric::Accuracy => m.accuracy,
        }
    }

    /// Scores label-index predictions over a vocabulary of `classes`.
    pub fn score(self, y_true: &[usize], y_pred: &[usize], classes: &[String]) -> Result<f64> {
        Ok(self.of(&metrics(&ConfusionMatrix::from_indices(y_true, y_pred, classes)?)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn names(k: usize) -> Vec<String> {
        (0..k).map(|i| format!("c{i}")).collect()
    }

    #[test]
    fn worked_examples() {
        // TP=2, FN=3, FP=0
        let cm = ConfusionMatrix { classes: names(2), counts: vec![vec![2, 3], vec![0, 10]] };
        let m = metrics(&cm).unwrap();
        assert_eq!((m.classes[0].precision, m.classes[0].recall), (1.0, 0.4));
        // TP=5, FP=3, FN=0
        let cm = ConfusionMatrix { classes: names(2), counts: vec![vec![5, 0], vec![3, 10]] };
        let m = metrics(&cm).unwrap();
        assert_eq!((m.classes[0].recall, m.classes[0].precision), (1.0, 0.625));
    }

    #[test]
    fn perfect_predictions() {
        let y = [0, 1, 2, 2, 1];
        let m = metrics(&ConfusionMatrix::from_indices(&y, &y, &names(3)).unwrap()).unwrap();
        assert_eq!((m.accuracy, m.weighted_avg.f1, m.macro_avg.f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn zero_division_warns() {
        let m = metrics(&ConfusionMatrix::from_indices(&[0, 0], &[0, 0], &names(2)).unwrap()).unwrap();
        assert_eq!(m.classes[1].f1, 0.0);
        assert_eq!(m.warnings.len(), 2);
        assert!(metrics(&ConfusionMatrix { classes: names(1), counts: vec![vec![0]] }).is_err());
    }

    proptest! {
        #[test]
        fn aggregate_identities(k in 1usize..6, cells in prop::collection::vec(0usize..50, 36)) {
            let counts: Vec<Vec<usize>> = (0..k).map(|i| cells[i * 6..i * 6 + k].to_vec()).collect();
            let cm = ConfusionMatrix { classes: names(k), counts };
            prop_assume!(cm.total() > 0);
            let m = metrics(&cm).unwrap();
            prop_assert!((m.weighted_avg.recall - m.accuracy).abs() < 1e-12);
            let (lo, hi) = m.classes.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), c| (a.min(c.f1), b.max(c.f1)));
            prop_assert!(m.macro_avg.f1 >= lo - 1e-12 && m.macro_avg.f1 <= hi + 1e-12);
            // vocabulary permutation leaves aggregates unchanged
            let perm: Vec<usize> = (0..k).rev().collect();
            let pc: Vec<Vec<usize>> = perm.iter().map(|&i| perm.iter().map(|&j| cm.counts[i][j]).collect()).collect();
            let pm = metrics(&ConfusionMatrix { classes: names(k), counts: pc }).unwrap();
            prop_assert!((pm.accuracy - m.accuracy).abs() < 1e-12);
            prop_assert!((pm.weighted_avg.f1 - m.weighted_avg.f1).abs() < 1e-12);
            prop_assert!((pm.macro_avg.f1 - m.macro_avg.f1).abs() < 1e-12);
        }
    }
}
