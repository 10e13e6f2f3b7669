//! Hold-out splitting.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng;

pub const DEFAULT_TEST_FRAC: f64 = 0.2;

/// Row indices of the two subsets, each sorted ascending.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Seeded shuffle split. Stratified mode draws `round(count * test_frac)` test
/// rows per class, clamped so every class with two or more members lands in
/// both subsets.
pub fn split_indices(data: &Dataset, test_frac: f64, seed: u64, stratified: bool) -> Result<SplitIndices> {
    if !(0.0..1.0).contains(&test_frac) {
        return Err(Error::param(format!("test_frac must lie in [0, 1), got {test_frac}")));
    }
    let n = data.n_rows();
    if n == 0 {
        return Err(Error::Empty);
    }
    let mut train = Vec::with_capacity(n);
    let mut test = Vec::new();
    if stratified {
        let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); data.n_classes()];
        for (i, &l) in data.labels().iter().enumerate() {
            by_class[l].push(i);
        }
        for (c, mut members) in by_class.into_iter().enumerate() {
            if members.is_empty() {
                continue;
            }
            if members.len() < 2 {
                return Err(Error::ClassTooSmall {
                    class: data.class_vocab()[c].clone(),
                    count: members.len(),
                    needed: 2,
                });
            }
            members.shuffle(&mut rng::child_rng(seed, c as u64));
            let want = (members.len() as f64 * test_frac).round() as usize;
            let n_test = if test_frac > 0.0 { want.clamp(1, members.len() - 1) } else { 0 };
            test.extend_from_slice(&members[..n_test]);
            train.extend_from_slice(&members[n_test..]);
        }
    } else {
        let mut all: Vec<usize> = (0..n).collect();
        all.shuffle(&mut rng::rng(seed));
        let n_test = (n as f64 * test_frac).round() as usize;
        test.extend_from_slice(&all[..n_test]);
        train.extend_from_slice(&all[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(SplitIndices { train, test })
}

/// Convenience wrapper returning the two datasets.
pub fn split(data: &Dataset, test_frac: f64, seed: u64, stratified: bool) -> Result<(Dataset, Dataset)> {
    let idx = split_indices(data, test_frac, seed, stratified)?;
    Ok((data.select_rows(&idx.train), data.select_rows(&idx.test)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn labelled(counts: &[usize]) -> Dataset {
        let mut labels = Vec::new();
        for (c, &k) in counts.iter().enumerate() {
            labels.extend(std::iter::repeat_n(c, k));
        }
        let n = labels.len();
        let vocab = (0..counts.len()).map(|c| format!("k{c}")).collect();
        Dataset::new(vec!["x".into()], vec![(0..n).map(|i| i as f64).collect()], labels, vocab).unwrap()
    }

    #[test]
    fn ten_rows_unstratified() {
        let s = split_indices(&labelled(&[10]), 0.2, 3, false).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (8, 2));
        assert!(s.test.iter().all(|t| !s.train.contains(t)));
    }

    #[test]
    fn stratified_counts_per_class() {
        let d = labelled(&[80, 20]);
        let s = split_indices(&d, 0.2, 9, true).unwrap();
        let test_b = s.test.iter().filter(|&&i| d.labels()[i] == 1).count();
        assert_eq!((s.test.len() - test_b, test_b), (16, 4));
    }

    #[test]
    fn tiny_class_reaches_both_sides_and_singletons_fail() {
        let d = labelled(&[50, 2]);
        let s = split_indices(&d, 0.2, 1, true).unwrap();
        assert_eq!(s.test.iter().filter(|&&i| d.labels()[i] == 1).count(), 1);
        assert!(matches!(
            split_indices(&labelled(&[50, 1]), 0.2, 1, true),
            Err(Error::ClassTooSmall { count: 1, .. })
        ));
    }

    #[test]
    fn deterministic_for_seed() {
        let d = labelled(&[30, 12, 5]);
        assert_eq!(split_indices(&d, 0.2, 4, true).unwrap(), split_indices(&d, 0.2, 4, true).unwrap());
        assert_ne!(split_indices(&d, 0.2, 4, true).unwrap(), split_indices(&d, 0.2, 5, true).unwrap());
    }

    proptest! {
        #[test]
        fn partitions_rows(counts in prop::collection::vec(2usize..40, 1..5), frac in 0.05f64..0.6, seed in any::<u64>(), strat in any::<bool>()) {
            let d = labelled(&counts);
            let s = split_indices(&d, frac, seed, strat).unwrap();
            let mut all: Vec<usize> = s.train.iter().chain(&s.test).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..d.n_rows()).collect::<Vec<_>>());
            if strat {
                for (c, &k) in counts.iter().enumerate() {
                    let t = s.test.iter().filter(|&&i| d.labels()[i] == c).count() as f64;
                    prop_assert!((t - k as f64 * frac).abs() <= 1.0);
                }
            }
        }
    }
}
