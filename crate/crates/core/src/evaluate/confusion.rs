use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `counts[i][j]` = rows of true class `i` predicted as class `j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<String>,
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    /// From label indices into `classes`.
    pub fn from_indices(y_true: &[usize], y_pred: &[usize], classes: &[String]) -> Result<Self> {
        if y_true.len() != y_pred.len() {
            return Err(Error::LengthMismatch { expected: y_true.len(), got: y_pred.len() });
        }
        let k = classes.len();
        let mut counts = vec![vec![0; k]; k];
        for (&t, &p) in y_true.iter().zip(y_pred) {
            if t >= k || p >= k {
                return Err(Error::UnknownLabel(format!("class index {}", t.max(p))));
            }
            counts[t][p] += 1;
        }
        Ok(Self { classes: classes.to_vec(), counts })
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn tp(&self, i: usize) -> usize {
        self.counts[i][i]
    }

    /// Row sum: true members of class `i`.
    pub fn support(&self, i: usize) -> usize {
        self.counts[i].iter().sum()
    }

    /// Column sum: rows predicted as class `i`.
    pub fn predicted(&self, i: usize) -> usize {
        self.counts.iter().map(|r| r[i]).sum()
    }

    pub fn fn_(&self, i: usize) -> usize {
        self.support(i) - self.tp(i)
    }

    pub fn fp(&self, i: usize) -> usize {
        self.predicted(i) - self.tp(i)
    }

    pub fn trace(&self) -> usize {
        (0..self.n_classes()).map(|i| self.tp(i)).sum()
    }

    /// CSV grid: header `actual\predicted,<classes...>`, one row per true class.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("actual\\predicted");
        for c in &self.classes {
            s.push(',');
            s.push_str(c);
        }
        s.push('\n');
        for (c, row) in self.classes.iter().zip(&self.counts) {
            s.push_str(c);
            for v in row {
                s.push_str(&format!(",{v}"));
            }
            s.push('\n');
        }
        s
    }
}

/// Confusion matrix from class names, checked against `vocab`.
pub fn confusion(y_true: &[String], y_pred: &[String], vocab: &[String]) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch { expected: y_true.len(), got: y_pred.len() });
    }
    let index = |l: &String| {
        vocab.iter().position(|v| v == l).ok_or_else(|| Error::UnknownLabel(l.clone()))
    };
    let t = y_true.iter().map(index).collect::<Result<Vec<_>>>()?;
    let p = y_pred.iter().map(index).collect::<Result<Vec<_>>>()?;
    ConfusionMatrix::from_indices(&t, &p, vocab)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn perfect_is_diagonal() {
        let y = s(&["a", "b", "b", "c"]);
        let cm = confusion(&y, &y, &s(&["a", "b", "c"])).unwrap();
        assert_eq!(cm.counts, vec![vec![1, 0, 0], vec![0, 2, 0], vec![0, 0, 1]]);
    }

    #[test]
    fn missed_events() {
        // five true events, two found, no false alarms
        let t = s(&["e", "e", "e", "e", "e", "n", "n", "n"]);
        let p = s(&["e", "e", "n", "n", "n", "n", "n", "n"]);
        let cm = confusion(&t, &p, &s(&["e", "n"])).unwrap();
        assert_eq!((cm.tp(0), cm.fn_(0), cm.fp(0)), (2, 3, 0));
    }

    #[test]
    fn pair_counting_oracle() {
        let v = s(&["x", "y", "z"]);
        let t = s(&["x", "y", "z", "x", "y", "z", "x"]);
        let p = s(&["x", "z", "z", "y", "y", "x", "x"]);
        let cm = confusion(&t, &p, &v).unwrap();
        for (i, a) in v.iter().enumerate() {
            for (j, b) in v.iter().enumerate() {
                let n = t.iter().zip(&p).filter(|(u, w)| *u == a && *w == b).count();
                assert_eq!(cm.counts[i][j], n);
            }
        }
        assert_eq!(cm.total(), 7);
    }

    #[test]
    fn errors() {
        let v = s(&["a"]);
        assert!(matches!(confusion(&s(&["a"]), &s(&["q"]), &v), Err(Error::UnknownLabel(_))));
        assert!(matches!(confusion(&s(&["a"]), &s(&[]), &v), Err(Error::LengthMismatch { .. })));
    }
}
