//! Deterministic synthetic datasets in the severity-classification regime:
//! five heavily imbalanced classes, multimodal Gaussian clusters, diverse
//! column scales, right-skewed columns, injected outliers, one label-free
//! noise column and one near-duplicate column.

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::stats::{quantile, sorted_copy};
use crate::data::{Dataset, SEVERITY_CLASSES};
use crate::error::{Error, Result};
use crate::rng::{child_rng, Rng};

/// Per-class supports of the reference hold-out split, in severity order.
pub const REFERENCE_SUPPORTS: [usize; 5] = [9860, 2566, 572, 70, 8];

pub const DEFAULT_ROWS: usize = 65_376;
pub const SMALL_ROWS: usize = 2_000;

/// Lattice levels per informative feature.
const LEVELS: usize = 5;
/// Modes of the first (majority) class and of every other class.
const MAJORITY_MODES: usize = LEVELS;
const MINORITY_MODES: usize = 2;
/// Minimum number of coordinates in which modes of different classes differ.
const MIN_HAMMING: usize = 3;
/// Starting bound on |correlation| between majority-mode level patterns,
/// relaxed in steps of 0.1 until enough patterns exist.
const MAX_PATTERN_CORR: f64 = 0.5;
/// Relative noise of the near-duplicate column (gives r ~ 0.98).
const DUP_NOISE: f64 = 0.2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_rows: usize,
    pub class_names: Vec<String>,
    /// One non-negative fraction per class, summing to 1.
    pub proportions: Vec<f64>,
    /// Total feature columns, including noise and the duplicate.
    pub n_features: usize,
    /// Lattice step between cluster centres, in within-cluster std units.
    pub separability: f64,
    pub noise_features: usize,
    /// Informative columns passed through `exp(v / 10)` before scaling.
    pub skewed_features: usize,
    pub outlier_rate: f64,
    pub duplicate_pair: bool,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        let total: usize = REFERENCE_SUPPORTS.iter().sum();
        Self {
            n_rows: DEFAULT_ROWS,
            class_names: SEVERITY_CLASSES.iter().map(|s| s.to_string()).collect(),
            proportions: REFERENCE_SUPPORTS.iter().map(|&s| s as f64 / total as f64).collect(),
            n_features: 11,
            separability: 6.0,
            noise_features: 1,
            skewed_features: 3,
            outlier_rate: 0.001,
            duplicate_pair: true,
            seed: 0,
        }
    }
}

impl SynthSpec {
    /// Desk-scale preset. The reference proportions would leave the smallest
    /// class with a single row at this size, so its share is raised.
    pub fn small(seed: u64) -> Self {
        Self {
            n_rows: SMALL_ROWS,
            proportions: vec![0.70, 0.18, 0.08, 0.03, 0.01],
            seed,
            ..Self::default()
        }
    }

    pub fn n_informative(&self) -> usize {
        self.n_features.saturating_sub(self.noise_features + usize::from(self.duplicate_pair))
    }

    fn validate(&self) -> Result<()> {
        if self.class_names.len() != self.proportions.len() || self.class_names.is_empty() {
            return Err(Error::param("need one proportion per class name"));
        }
        if self.proportions.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::param("proportions must be non-negative"));
        }
        let sum: f64 = self.proportions.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::param(format!("proportions sum to {sum}, not 1")));
        }
        if !(self.separability >= 0.0) || !self.separability.is_finite() {
            return Err(Error::param("separability must be finite and >= 0"));
        }
        if !(0.0..=0.5).contains(&self.outlier_rate) {
            return Err(Error::param("outlier_rate must lie in [0, 0.5]"));
        }
        if self.n_informative() == 0 {
            return Err(Error::param("no room for informative features"));
        }
        if self.skewed_features > self.n_informative() {
            return Err(Error::param("more skewed features than informative ones"));
        }
        Ok(())
    }
}

/// Largest-remainder apportionment of `n` items; ties in the remainders go
/// to the earlier class.
pub fn apportion(proportions: &[f64], n: usize) -> Vec<usize> {
    let quotas: Vec<f64> = proportions.iter().map(|p| p * n as f64).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..quotas.len()).collect();
    order.sort_by(|&a, &b| (quotas[b] - quotas[b].floor()).total_cmp(&(quotas[a] - quotas[a].floor())));
    for &i in order.iter().take(n.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

/// Column roles and realised counts, written next to the CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthInfo {
    pub spec: SynthSpec,
    pub class_counts: Vec<usize>,
    pub informative: Vec<String>,
    pub noise: Vec<String>,
    pub skewed: Vec<String>,
    /// `(source, duplicate)`.
    pub duplicate: Option<(String, String)>,
    pub outliers_injected: usize,
}

#[derive(Clone, Debug)]
pub struct Synthetic {
    pub data: Dataset,
    pub info: SynthInfo,
}

fn pattern_corr(a: &[usize], b: &[usize]) -> f64 {
    let m = (LEVELS - 1) as f64 / 2.0;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        let (dx, dy) = (x as f64 - m, y as f64 - m);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    sab / (saa * sbb).sqrt()
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let first = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, first);
            out.push(p);
        }
    }
    out
}

/// Level pattern (one level per majority mode) for each informative feature:
/// permutations of the levels picked greedily in lexicographic order so that
/// patterns are weakly correlated with each other.
fn majority_patterns(n_inf: usize) -> Vec<Vec<usize>> {
    let all = permutations(&(0..LEVELS).collect::<Vec<_>>());
    let mut limit = MAX_PATTERN_CORR;
    loop {
        let mut picked: Vec<Vec<usize>> = Vec::new();
        for p in &all {
            if picked.len() == n_inf {
                break;
            }
            if picked.iter().all(|q| pattern_corr(p, q).abs() <= limit + 1e-12) {
                picked.push(p.clone());
            }
        }
        if picked.len() == n_inf {
            return picked;
        }
        if limit >= 1.0 {
            // more features than permutations: cycle
            let base = picked.len();
            while picked.len() < n_inf {
                picked.push(picked[picked.len() % base].clone());
            }
            return picked;
        }
        limit += 0.1;
    }
}

fn hamming(a: &[usize], b: &[usize]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Lattice coordinates of every mode of every class.
fn class_modes(n_classes: usize, n_inf: usize, rng: &mut Rng) -> Vec<Vec<Vec<usize>>> {
    let patterns = majority_patterns(n_inf);
    let majority: Vec<Vec<usize>> = (0..MAJORITY_MODES).map(|m| patterns.iter().map(|p| p[m]).collect()).collect();
    let mut modes = vec![majority];
    let need = MIN_HAMMING.min(n_inf);
    for _ in 1..n_classes {
        let mut mine: Vec<Vec<usize>> = Vec::new();
        let mut attempts = 0;
        while mine.len() < MINORITY_MODES {
            let cand: Vec<usize> = (0..n_inf).map(|_| rng.random_range(0..LEVELS)).collect();
            attempts += 1;
            let clear = modes.iter().flatten().all(|m| hamming(m, &cand) >= need);
            // tiny lattices cannot always satisfy the distance; accept after a while
            if clear || attempts > 10_000 {
                mine.push(cand);
            }
        }
        modes.push(mine);
    }
    modes
}

pub fn generate(spec: &SynthSpec) -> Result<Synthetic> {
    spec.validate()?;
    let counts = apportion(&spec.proportions, spec.n_rows);
    if let Some(i) = counts.iter().position(|&c| c == 0) {
        return Err(Error::param(format!(
            "class {:?} receives no rows at n_rows = {}",
            spec.class_names[i], spec.n_rows
        )));
    }
    let n = spec.n_rows;
    let n_inf = spec.n_informative();
    let modes = class_modes(counts.len(), n_inf, &mut child_rng(spec.seed, 0));

    let mut noise_rng = child_rng(spec.seed, 1);
    let mut labels = Vec::with_capacity(n);
    let mut inf_cols = vec![Vec::with_capacity(n); n_inf];
    for (c, &count) in counts.iter().enumerate() {
        for i in 0..count {
            let centre = &modes[c][i % modes[c].len()];
            for (f, col) in inf_cols.iter_mut().enumerate() {
                let z: f64 = StandardNormal.sample(&mut noise_rng);
                col.push(centre[f] as f64 * spec.separability + z);
            }
            labels.push(c);
        }
    }
    let mut noise_cols: Vec<Vec<f64>> = (0..spec.noise_features)
        .map(|_| (0..n).map(|_| StandardNormal.sample(&mut noise_rng)).collect())
        .collect();
    for col in inf_cols.iter_mut().take(spec.skewed_features) {
        col.iter_mut().for_each(|v| *v = (*v / 10.0).exp());
    }

    // scale and offset diversity
    let mut scale_rng = child_rng(spec.seed, 2);
    for col in inf_cols.iter_mut().chain(noise_cols.iter_mut()) {
        let scale = 10f64.powf(scale_rng.random_range(-1.0..2.0));
        let offset = scale * scale_rng.random_range(0.0..50.0);
        col.iter_mut().for_each(|v| *v = *v * scale + offset);
    }

    let mut outlier_rng = child_rng(spec.seed, 3);
    let n_outliers = (spec.outlier_rate * n as f64).round() as usize;
    {
        let mut targets: Vec<&mut Vec<f64>> = inf_cols.iter_mut().chain(noise_cols.iter_mut()).collect();
        let fences: Vec<(f64, f64)> = targets
            .iter()
            .map(|c| {
                let s = sorted_copy(c);
                let (q1, q3) = (quantile(&s, 0.25), quantile(&s, 0.75));
                (q3, q3 - q1)
            })
            .collect();
        let rows = rand::seq::index::sample(&mut outlier_rng, n, n_outliers.min(n)).into_vec();
        for r in rows {
            let f = outlier_rng.random_range(0..targets.len());
            let (q3, iqr) = fences[f];
            targets[f][r] = q3 + outlier_rng.random_range(3.0..6.0) * iqr.max(f64::MIN_POSITIVE);
        }
    }

    let inf_names: Vec<String> = (1..=n_inf).map(|i| format!("f{i:02}")).collect();
    let noise_names: Vec<String> = (1..=spec.noise_features).map(|i| format!("noise{i}")).collect();
    let mut names = Vec::new();
    let mut columns = Vec::new();
    let mut duplicate = None;
    for (i, (name, col)) in inf_names.iter().zip(inf_cols).enumerate() {
        if i == 0 && spec.duplicate_pair {
            let mean = col.iter().sum::<f64>() / n as f64;
            let sd = (col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64).sqrt();
            let mut dup_rng = child_rng(spec.seed, 4);
            let dup: Vec<f64> = col
                .iter()
                .map(|v| {
                    let z: f64 = StandardNormal.sample(&mut dup_rng);
                    v + DUP_NOISE * sd * z
                })
                .collect();
            let dup_name = format!("{name}_dup");
            names.push(name.clone());
            columns.push(col);
            names.push(dup_name.clone());
            columns.push(dup);
            duplicate = Some((name.clone(), dup_name));
        } else {
            names.push(name.clone());
            columns.push(col);
        }
    }
    names.extend(noise_names.iter().cloned());
    columns.extend(noise_cols);

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut child_rng(spec.seed, 5));
    let columns: Vec<Vec<f64>> = columns.iter().map(|c| order.iter().map(|&i| c[i]).collect()).collect();
    let labels: Vec<usize> = order.iter().map(|&i| labels[i]).collect();
    let data = Dataset::new(names, columns, labels, spec.class_names.clone())?;
    Ok(Synthetic {
        data,
        info: SynthInfo {
            spec: spec.clone(),
            class_counts: counts,
            skewed: inf_names[..spec.skewed_features].to_vec(),
            informative: inf_names,
            noise: noise_names,
            duplicate,
            outliers_injected: n_outliers,
        },
    })
}
