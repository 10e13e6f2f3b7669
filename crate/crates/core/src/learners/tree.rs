//! Binary tree growing shared by CART, random-forest members and the
//! gradient-boosting stage trees.
//!
//! Rows are presorted once per feature for the whole training matrix; a tree
//! copies the presorted orders restricted to rows with positive weight and
//! stable-partitions them as it splits, so no node ever re-sorts.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;
use crate::rng::Rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    /// Classification leaves hold weighted class totals; regression leaves a
    /// single value. `n_samples` counts distinct training rows.
    Leaf { value: Vec<f64>, n_samples: usize },
}

impl TreeNode {
    /// Value of the leaf that `row` falls into (`x <= threshold` goes left).
    pub fn leaf_value(&self, row: &[f64]) -> &[f64] {
        let mut node = self;
        loop {
            match node {
                TreeNode::Split { feature, threshold, left, right } => {
                    node = if row[*feature] <= *threshold { left } else { right };
                }
                TreeNode::Leaf { value, .. } => return value,
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
            TreeNode::Leaf { .. } => 0,
        }
    }

    pub fn n_leaves(&self) -> usize {
        match self {
            TreeNode::Split { left, right, .. } => left.n_leaves() + right.n_leaves(),
            TreeNode::Leaf { .. } => 1,
        }
    }

    /// Visits every leaf with the training rows routed to it and replaces the
    /// leaf value with `f(rows)`.
    pub fn assign_leaf_values<F>(&mut self, x: &Matrix, rows: Vec<usize>, f: &mut F)
    where
        F: FnMut(&[usize]) -> Vec<f64>,
    {
        match self {
            TreeNode::Split { feature, threshold, left, right } => {
                let (l, r): (Vec<usize>, Vec<usize>) =
                    rows.into_iter().partition(|&i| x.get(i, *feature) <= *threshold);
                left.assign_leaf_values(x, l, f);
                right.assign_leaf_values(x, r, f);
            }
            TreeNode::Leaf { value, .. } => *value = f(&rows),
        }
    }
}

/// Per-feature row orders of a training matrix, ascending by value then row.
#[derive(Clone, Debug)]
pub struct Presorted {
    n_rows: usize,
    order: Vec<Vec<u32>>,
}

impl Presorted {
    pub fn new(x: &Matrix) -> Self {
        let order = (0..x.cols())
            .into_par_iter()
            .map(|f| {
                let mut idx: Vec<u32> = (0..x.rows() as u32).collect();
                idx.sort_by(|&a, &b| x.get(a as usize, f).total_cmp(&x.get(b as usize, f)));
                idx
            })
            .collect();
        Self { n_rows: x.rows(), order }
    }
}

#[derive(Clone, Copy, Debug)]
pub enum Target<'a> {
    Class { labels: &'a [usize], n_classes: usize },
    Regression { values: &'a [f64] },
}

#[derive(Clone, Debug)]
pub struct GrowConfig {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    /// Number of non-constant candidate features examined per split; `None`
    /// examines all of them in index order.
    pub max_features: Option<usize>,
}

/// Grows one tree on the rows with positive weight.
pub fn grow(
    x: &Matrix,
    presorted: &Presorted,
    target: Target<'_>,
    weights: &[f64],
    cfg: &GrowConfig,
    rng: Option<&mut Rng>,
) -> TreeNode {
    assert_eq!(presorted.n_rows, x.rows());
    assert_eq!(weights.len(), x.rows());
    let p = x.cols();
    let mut active = 0;
    let mut buf = Vec::new();
    for order in &presorted.order {
        let before = buf.len();
        buf.extend(order.iter().copied().filter(|&r| weights[r as usize] > 0.0));
        active = buf.len() - before;
    }
    if p == 0 {
        active = (0..x.rows()).filter(|&r| weights[r] > 0.0).count();
    }
    let mut g = Grower {
        x,
        target,
        weights,
        cfg,
        rng,
        n: active,
        buf,
        tmp: vec![0; active],
        left_mark: vec![false; x.rows()],
        features: (0..p).collect(),
        scratch_left: Vec::new(),
        scratch_total: Vec::new(),
    };
    if p == 0 {
        let rows: Vec<u32> = (0..x.rows() as u32).filter(|&r| weights[r as usize] > 0.0).collect();
        return g.leaf_from(&rows);
    }
    g.build(0, active, 0)
}

struct Grower<'a, 'r> {
    x: &'a Matrix,
    target: Target<'a>,
    weights: &'a [f64],
    cfg: &'a GrowConfig,
    rng: Option<&'r mut Rng>,
    n: usize,
    buf: Vec<u32>,
    tmp: Vec<u32>,
    left_mark: Vec<bool>,
    features: Vec<usize>,
    scratch_left: Vec<f64>,
    scratch_total: Vec<f64>,
}

struct Candidate {
    score: f64,
    feature: usize,
    threshold: f64,
}

impl Candidate {
    /// Strictly better score wins; near-equal scores (relative 1e-12) go to
    /// the lower feature index, then the lower threshold.
    fn beats(&self, other: &Option<Candidate>) -> bool {
        match other {
            None => true,
            Some(o) => {
                let tol = 1e-12 * o.score.abs().max(self.score.abs());
                if self.score > o.score + tol {
                    true
                } else if self.score >= o.score - tol {
                    (self.feature, self.threshold) < (o.feature, o.threshold)
                } else {
                    false
                }
            }
        }
    }
}

impl Grower<'_, '_> {
    #[inline]
    fn seg(&self, f: usize) -> &[u32] {
        &self.buf[f * self.n..(f + 1) * self.n]
    }

    fn leaf_from(&self, rows: &[u32]) -> TreeNode {
        let value = match self.target {
            Target::Class { labels, n_classes } => {
                let mut v = vec![0.0; n_classes];
                for &r in rows {
                    v[labels[r as usize]] += self.weights[r as usize];
                }
                v
            }
            Target::Regression { values } => {
                let (mut s, mut w) = (0.0, 0.0);
                for &r in rows {
                    s += self.weights[r as usize] * values[r as usize];
                    w += self.weights[r as usize];
                }
                vec![if w > 0.0 { s / w } else { 0.0 }]
            }
        };
        TreeNode::Leaf { value, n_samples: rows.len() }
    }

    fn is_pure(&self, rows: &[u32]) -> bool {
        match self.target {
            Target::Class { labels, .. } => {
                let first = labels[rows[0] as usize];
                rows.iter().all(|&r| labels[r as usize] == first)
            }
            Target::Regression { values } => {
                let first = values[rows[0] as usize];
                rows.iter().all(|&r| values[r as usize] == first)
            }
        }
    }

    fn build(&mut self, lo: usize, hi: usize, depth: usize) -> TreeNode {
        let n_node = hi - lo;
        let rows: Vec<u32> = self.seg(0)[lo..hi].to_vec();
        let stop = n_node < self.cfg.min_samples_split.max(2)
            || n_node < 2 * self.cfg.min_samples_leaf.max(1)
            || self.cfg.max_depth.is_some_and(|d| depth >= d)
            || self.is_pure(&rows);
        if stop {
            return self.leaf_from(&rows);
        }
        let Some(best) = self.best_split(lo, hi) else {
            return self.leaf_from(&rows);
        };
        let n_left = self.partition(lo, hi, best.feature, best.threshold);
        let left = self.build(lo, lo + n_left, depth + 1);
        let right = self.build(lo + n_left, hi, depth + 1);
        TreeNode::Split {
            feature: best.feature,
            threshold: best.threshold,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    fn best_split(&mut self, lo: usize, hi: usize) -> Option<Candidate> {
        let p = self.x.cols();
        let quota = match self.cfg.max_features {
            Some(m) if m < p => {
                if let Some(rng) = self.rng.as_deref_mut() {
                    self.features.shuffle(rng);
                }
                m
            }
            _ => {
                for (i, f) in self.features.iter_mut().enumerate() {
                    *f = i;
                }
                p
            }
        };
        let mut best: Option<Candidate> = None;
        let mut visited = 0;
        for fi in 0..p {
            if visited >= quota {
                break;
            }
            let f = self.features[fi];
            let seg = self.seg(f);
            let (first, last) = (seg[lo] as usize, seg[hi - 1] as usize);
            if self.x.get(first, f) == self.x.get(last, f) {
                continue;
            }
            visited += 1;
            if let Some(c) = self.scan_feature(f, lo, hi) {
                if c.beats(&best) {
                    best = Some(c);
                }
            }
        }
        best
    }

    fn scan_feature(&mut self, f: usize, lo: usize, hi: usize) -> Option<Candidate> {
        let msl = self.cfg.min_samples_leaf.max(1);
        let n_node = hi - lo;
        let x = self.x;
        let w = self.weights;
        let seg = &self.buf[f * self.n + lo..f * self.n + hi];
        let mut best: Option<Candidate> = None;
        let consider = |score: f64, i: usize, best: &mut Option<Candidate>| {
            let a = x.get(seg[i] as usize, f);
            let b = x.get(seg[i + 1] as usize, f);
            let mut thr = 0.5 * (a + b);
            if thr >= b {
                thr = a;
            }
            let c = Candidate { score, feature: f, threshold: thr };
            if c.beats(best) {
                *best = Some(c);
            }
        };
        match self.target {
            Target::Class { labels, n_classes } => {
                let total = &mut self.scratch_total;
                total.clear();
                total.resize(n_classes, 0.0);
                let mut w_total = 0.0;
                for &r in seg {
                    total[labels[r as usize]] += w[r as usize];
                    w_total += w[r as usize];
                }
                let left = &mut self.scratch_left;
                left.clear();
                left.resize(n_classes, 0.0);
                let mut w_left = 0.0;
                for i in 0..n_node - 1 {
                    let r = seg[i] as usize;
                    left[labels[r]] += w[r];
                    w_left += w[r];
                    let n_left = i + 1;
                    if n_left < msl || n_node - n_left < msl {
                        continue;
                    }
                    if x.get(r, f) >= x.get(seg[i + 1] as usize, f) {
                        continue;
                    }
                    let w_right = w_total - w_left;
                    let (mut sl, mut sr) = (0.0, 0.0);
                    for k in 0..n_classes {
                        sl += left[k] * left[k];
                        let rk = total[k] - left[k];
                        sr += rk * rk;
                    }
                    // maximising this minimises the weighted child Gini
                    let score = sl / w_left + sr / w_right;
                    consider(score, i, &mut best);
                }
            }
            Target::Regression { values } => {
                let (mut s_total, mut w_total) = (0.0, 0.0);
                for &r in seg {
                    s_total += w[r as usize] * values[r as usize];
                    w_total += w[r as usize];
                }
                let (mut s_left, mut w_left) = (0.0, 0.0);
                for i in 0..n_node - 1 {
                    let r = seg[i] as usize;
                    s_left += w[r] * values[r];
                    w_left += w[r];
                    let n_left = i + 1;
                    if n_left < msl || n_node - n_left < msl {
                        continue;
                    }
                    if x.get(r, f) >= x.get(seg[i + 1] as usize, f) {
                        continue;
                    }
                    let s_right = s_total - s_left;
                    let w_right = w_total - w_left;
                    // squared-error reduction up to a node constant
                    let score = s_left * s_left / w_left + s_right * s_right / w_right;
                    consider(score, i, &mut best);
                }
            }
        }
        best
    }

    /// Stable-partitions every feature segment of the node; returns the
    /// number of rows sent left.
    fn partition(&mut self, lo: usize, hi: usize, feature: usize, threshold: f64) -> usize {
        let n = self.n;
        let mut n_left = 0;
        for &r in &self.buf[feature * n + lo..feature * n + hi] {
            let go = self.x.get(r as usize, feature) <= threshold;
            self.left_mark[r as usize] = go;
            n_left += usize::from(go);
        }
        for f in 0..self.x.cols() {
            let seg = &mut self.buf[f * n + lo..f * n + hi];
            let (mut li, mut ri) = (0, n_left);
            for &r in seg.iter() {
                if self.left_mark[r as usize] {
                    self.tmp[li] = r;
                    li += 1;
                } else {
                    self.tmp[ri] = r;
                    ri += 1;
                }
            }
            seg.copy_from_slice(&self.tmp[..hi - lo]);
        }
        n_left
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> GrowConfig {
        GrowConfig { max_depth: None, min_samples_split: 2, min_samples_leaf: 1, max_features: None }
    }

    #[test]
    fn presort_orders_by_value_then_row() {
        let x = Matrix::from_rows(&[[2.0], [1.0], [2.0], [0.5]]).unwrap();
        let p = Presorted::new(&x);
        assert_eq!(p.order[0], vec![3, 1, 0, 2]);
    }

    #[test]
    fn zero_weight_rows_are_ignored() {
        let x = Matrix::from_rows(&[[1.0], [2.0], [3.0], [4.0]]).unwrap();
        let labels = [0, 0, 1, 1];
        let p = Presorted::new(&x);
        let t = grow(&x, &p, Target::Class { labels: &labels, n_classes: 2 }, &[1.0, 1.0, 0.0, 0.0], &cfg(), None);
        assert_eq!(t, TreeNode::Leaf { value: vec![2.0, 0.0], n_samples: 2 });
    }

    #[test]
    fn regression_split_on_step() {
        let x = Matrix::from_rows(&[[1.0], [2.0], [3.0], [4.0]]).unwrap();
        let y = [0.0, 0.0, 5.0, 5.0];
        let p = Presorted::new(&x);
        let t = grow(&x, &p, Target::Regression { values: &y }, &[1.0; 4], &cfg(), None);
        match t {
            TreeNode::Split { threshold, .. } => assert_eq!(threshold, 2.5),
            _ => panic!("expected split"),
        }
    }

    #[test]
    fn assign_leaf_values_sees_routed_rows() {
        let x = Matrix::from_rows(&[[1.0], [2.0], [3.0]]).unwrap();
        let mut t = TreeNode::Split {
            feature: 0,
            threshold: 1.5,
            left: Box::new(TreeNode::Leaf { value: vec![0.0], n_samples: 1 }),
            right: Box::new(TreeNode::Leaf { value: vec![0.0], n_samples: 2 }),
        };
        t.assign_leaf_values(&x, vec![0, 1, 2], &mut |rows| vec![rows.len() as f64]);
        assert_eq!(t.leaf_value(&[0.0]), &[1.0]);
        assert_eq!(t.leaf_value(&[9.0]), &[2.0]);
    }
}
