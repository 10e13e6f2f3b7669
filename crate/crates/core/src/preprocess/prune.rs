//! Correlation-based feature pruning.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::data::{pearson_matrix, Dataset};
use crate::error::{Error, Result};
use crate::rng;

pub const DEFAULT_THRESHOLD: f64 = 0.7;

/// Which member of a highly correlated pair is dropped.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum TieBreak {
    /// Drop the column that appears later in schema order.
    #[default]
    DropLater,
    /// Drop one of the two at random.
    Random { seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PruneOptions {
    pub threshold: f64,
    #[serde(default)]
    pub tie_break: TieBreak,
    /// When set, keep exactly these columns (in schema order) regardless of
    /// the greedy pass; the audit trail still records each dropped column
    /// against its most correlated survivor.
    #[serde(default)]
    pub keep: Option<Vec<String>>,
}

impl Default for PruneOptions {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            tie_break: TieBreak::DropLater,
            keep: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PruneStep {
    pub kept: String,
    pub dropped: String,
    pub r: f64,
}

/// Columns retained by a fitted prune, plus its audit trail.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnSelection {
    pub keep: Vec<String>,
    pub removed: Vec<PruneStep>,
}

/// Greedy pruning: while some remaining pair has `|r| > threshold`, drop one
/// column of the most correlated pair. Correlations are computed once; they
/// do not change as other columns leave.
pub fn corr_prune_fit(data: &Dataset, opts: &PruneOptions) -> Result<ColumnSelection> {
    let corr = pearson_matrix(data)?;
    let names = data.names();
    let p = names.len();

    if let Some(keep) = &opts.keep {
        for k in keep {
            if data.column_index(k).is_none() {
                return Err(Error::MissingColumn(k.clone()));
            }
        }
        let kept_idx: Vec<usize> = (0..p).filter(|&i| keep.contains(&names[i])).collect();
        let removed = (0..p)
            .filter(|i| !kept_idx.contains(i))
            .map(|d| {
                let (k, r) = kept_idx
                    .iter()
                    .map(|&k| (k, corr.get(k, d)))
                    .fold((usize::MAX, 0.0f64), |best, (k, r)| {
                        if best.0 == usize::MAX || r.abs() > best.1.abs() {
                            (k, r)
                        } else {
                            best
                        }
                    });
                PruneStep {
                    kept: if k == usize::MAX { String::new() } else { names[k].clone() },
                    dropped: names[d].clone(),
                    r,
                }
            })
            .collect();
        return Ok(ColumnSelection {
            keep: kept_idx.iter().map(|&i| names[i].clone()).collect(),
            removed,
        });
    }

    let mut alive = vec![true; p];
    let mut removed = Vec::new();
    let mut rng = match opts.tie_break {
        TieBreak::Random { seed } => Some(rng::rng(seed)),
        TieBreak::DropLater => None,
    };
    loop {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..p {
            if !alive[i] {
                continue;
            }
            for j in i + 1..p {
                if !alive[j] {
                    continue;
                }
                let r = corr.get(i, j);
                if r.abs() > opts.threshold && best.is_none_or(|(_, _, b)| r.abs() > b.abs()) {
                    best = Some((i, j, r));
                }
            }
        }
        let Some((i, j, r)) = best else { break };
        let swap = rng.as_mut().is_some_and(|g| g.random_bool(0.5));
        let (kept, dropped) = if swap { (j, i) } else { (i, j) };
        alive[dropped] = false;
        removed.push(PruneStep {
            kept: names[kept].clone(),
            dropped: names[dropped].clone(),
            r,
        });
    }
    Ok(ColumnSelection {
        keep: (0..p).filter(|&i| alive[i]).map(|i| names[i].clone()).collect(),
        removed,
    })
}

/// Fit and apply in one step: the pruned dataset and the audit trail.
pub fn corr_prune(data: &Dataset, opts: &PruneOptions) -> Result<(Dataset, Vec<PruneStep>)> {
    let sel = corr_prune_fit(data, opts)?;
    Ok((data.select_columns(&sel.keep)?, sel.removed))
}
