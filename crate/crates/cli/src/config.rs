//! Workflow configuration: a TOML file with one table per step, overridden
//! by command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use circloss::evaluate::Metric;
use circloss::importance::ImportanceMethod;
use circloss::preprocess::{PruneOptions, StageSpec, TieBreak};
use circloss::search::ParamGrid;
use circloss::synth::SynthSpec;
use circloss::{ModelSpec, ParamValue};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const DEFAULT_LABEL: &str = "severity";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub data: DataConfig,
    pub synth: SynthConfig,
    pub preprocess: PreprocessConfig,
    pub cv: CvConfig,
    pub compare: RosterConfig,
    pub ensemble: RosterConfig,
    /// Named grids; each is searched independently.
    pub tune: BTreeMap<String, GridConfig>,
    pub importance: ImportanceConfig,
}

impl Default for Config {
    fn default() -> Self {
        let mut tune = BTreeMap::new();
        tune.insert(
            "cart".to_string(),
            GridConfig { preset: Some("cart-depth".into()), ..GridConfig::default() },
        );
        let mut rf = BTreeMap::new();
        rf.insert("n_estimators".to_string(), vec![ParamValue::Int(50), ParamValue::Int(100)]);
        rf.insert("max_depth".to_string(), vec![ParamValue::Int(17), ParamValue::Null]);
        tune.insert("rf".to_string(), GridConfig { preset: None, model: Some("rf".into()), params: rf });
        Self {
            seed: 0,
            data: DataConfig::default(),
            synth: SynthConfig::default(),
            preprocess: PreprocessConfig::default(),
            cv: CvConfig::default(),
            compare: RosterConfig { models: ["lda", "lr", "svm", "cart", "knn", "gnb"].map(String::from).to_vec() },
            ensemble: RosterConfig { models: ["bagging", "adaboost", "rf", "gbc"].map(String::from).to_vec() },
            tune,
            importance: ImportanceConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    /// CSV to analyse; synthetic data is generated when absent.
    pub input: Option<PathBuf>,
    pub label: String,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self { input: None, label: DEFAULT_LABEL.to_string() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    /// Start from the 2,000-row preset instead of the full-size one.
    pub small: bool,
    pub n_rows: Option<usize>,
    pub proportions: Option<Vec<f64>>,
    pub separability: Option<f64>,
    pub noise_features: Option<usize>,
    pub skewed_features: Option<usize>,
    pub outlier_rate: Option<f64>,
    pub duplicate_pair: Option<bool>,
    /// Defaults to the top-level seed.
    pub seed: Option<u64>,
}

impl SynthConfig {
    pub fn spec(&self, seed: u64) -> SynthSpec {
        let seed = self.seed.unwrap_or(seed);
        let mut s = if self.small { SynthSpec::small(seed) } else { SynthSpec { seed, ..SynthSpec::default() } };
        if let Some(v) = self.n_rows {
            s.n_rows = v;
        }
        if let Some(v) = &self.proportions {
            s.proportions = v.clone();
        }
        if let Some(v) = self.separability {
            s.separability = v;
        }
        if let Some(v) = self.noise_features {
            s.noise_features = v;
        }
        if let Some(v) = self.skewed_features {
            s.skewed_features = v;
        }
        if let Some(v) = self.outlier_rate {
            s.outlier_rate = v;
        }
        if let Some(v) = self.duplicate_pair {
            s.duplicate_pair = v;
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessConfig {
    /// Cap outliers on the full dataset before splitting.
    pub cap: bool,
    pub threshold: f64,
    /// Drop a random member of each correlated pair instead of the later one.
    pub random_tie_break: bool,
    /// Keep exactly these columns instead of the greedy pruning result.
    pub keep: Option<Vec<String>>,
    pub test_frac: f64,
    pub stratified: bool,
    /// Stages fitted inside every pipeline, on training rows only.
    pub stages: Vec<String>,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            cap: true,
            threshold: circloss::preprocess::prune::DEFAULT_THRESHOLD,
            random_tie_break: false,
            keep: None,
            test_frac: circloss::preprocess::split::DEFAULT_TEST_FRAC,
            stratified: true,
            stages: vec!["minmax".into(), "boxcox".into()],
        }
    }
}

impl PreprocessConfig {
    pub fn stage_specs(&self) -> Result<Vec<StageSpec>> {
        Ok(self.stages.iter().map(|s| StageSpec::parse(s)).collect::<circloss::Result<_>>()?)
    }

    pub fn prune_options(&self, seed: u64) -> PruneOptions {
        PruneOptions {
            threshold: self.threshold,
            tie_break: if self.random_tie_break { TieBreak::Random { seed } } else { TieBreak::DropLater },
            keep: self.keep.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CvConfig {
    pub k: usize,
    pub stratified: bool,
    pub metric: String,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self { k: circloss::evaluate::cv::DEFAULT_K, stratified: true, metric: "weighted_f1".into() }
    }
}

impl CvConfig {
    pub fn metric(&self) -> Result<Metric> {
        Ok(Metric::parse(&self.metric)?)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RosterConfig {
    /// Model strings such as `cart` or `svm(gamma=0.5, lambda=0.01)`.
    pub models: Vec<String>,
}

impl RosterConfig {
    pub fn specs(&self) -> Result<Vec<ModelSpec>> {
        if self.models.is_empty() {
            return Err(CliError::invalid("model roster is empty"));
        }
        self.models.iter().map(|m| parse_model(m)).collect()
    }
}

/// A named search grid: either a built-in preset or a model plus
/// `param = [values]` entries, enumerated in key order.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(flatten)]
    pub params: BTreeMap<String, Vec<ParamValue>>,
}

impl GridConfig {
    pub fn resolve(&self) -> Result<(ModelSpec, ParamGrid)> {
        let (base, mut grid) = match (&self.preset, &self.model) {
            (Some(p), None) => ParamGrid::preset(p)?,
            (None, Some(m)) => (parse_model(m)?, ParamGrid::new()),
            _ => return Err(CliError::invalid("a grid needs exactly one of `preset` or `model`")),
        };
        for (name, values) in &self.params {
            let values: Vec<ParamValue> = values.iter().map(normalize).collect();
            grid = grid.with(name, values)?;
        }
        Ok((base, grid))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImportanceConfig {
    /// `drop_column`, `permutation` or `both`.
    pub method: String,
    /// A tuning-grid name whose winner is reused when its results exist in
    /// the output tree, otherwise a model string.
    pub model: String,
    pub n_repeats: usize,
}

impl Default for ImportanceConfig {
    fn default() -> Self {
        Self { method: "both".into(), model: "rf".into(), n_repeats: 5 }
    }
}

impl ImportanceConfig {
    pub fn methods(&self) -> Result<Vec<ImportanceMethod>> {
        match self.method.as_str() {
            "drop_column" => Ok(vec![ImportanceMethod::DropColumn]),
            "permutation" => Ok(vec![ImportanceMethod::Permutation]),
            "both" => Ok(vec![ImportanceMethod::DropColumn, ImportanceMethod::Permutation]),
            other => Err(CliError::invalid(format!("unknown importance method {other:?}"))),
        }
    }
}

/// TOML has no null, so `"none"` and friends arrive as text.
fn normalize(v: &ParamValue) -> ParamValue {
    match v {
        ParamValue::Text(s) => ParamValue::parse(s),
        other => other.clone(),
    }
}

/// Parses `name` or `name(key=value, ...)`.
pub fn parse_model(s: &str) -> Result<ModelSpec> {
    Ok(ModelSpec::parse_expr(s)?)
}

/// Flag values that win over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub small: bool,
    pub input: Option<PathBuf>,
    pub label: Option<String>,
}

impl Config {
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
                toml::from_str(&text).map_err(|source| CliError::Config { path: p.to_path_buf(), source })?
            }
            None => Config::default(),
        };
        if let Some(s) = overrides.seed {
            cfg.seed = s;
        }
        if overrides.small {
            cfg.synth.small = true;
        }
        if let Some(i) = &overrides.input {
            cfg.data.input = Some(i.clone());
        }
        if let Some(l) = &overrides.label {
            cfg.data.label = l.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.preprocess.stage_specs()?;
        self.cv.metric()?;
        self.compare.specs()?;
        self.ensemble.specs()?;
        for (name, g) in &self.tune {
            g.resolve().map_err(|e| CliError::invalid(format!("grid {name:?}: {e}")))?;
        }
        self.importance.methods()?;
        if self.importance.n_repeats == 0 {
            return Err(CliError::invalid("importance.n_repeats must be >= 1"));
        }
        if self.cv.k < 2 {
            return Err(CliError::invalid("cv.k must be >= 2"));
        }
        Ok(())
    }

    /// SHA-256 of the resolved configuration, as lowercase hex.
    pub fn hash(&self) -> Result<String> {
        Ok(sha256_hex(serde_json::to_string(self)?.as_bytes()))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid_and_hash_is_stable() {
        let a = Config::default();
        a.validate().unwrap();
        assert_eq!(a.hash().unwrap(), Config::default().hash().unwrap());
        let b = Config { seed: 1, ..Config::default() };
        assert_ne!(a.hash().unwrap(), b.hash().unwrap());
    }

    #[test]
    fn toml_round_trip() {
        let text = r#"
            seed = 7
            [data]
            label = "class"
            [preprocess]
            threshold = 0.9
            stages = ["minmax"]
            [compare]
            models = ["cart", "knn(k=3)"]
            [tune.forest]
            model = "rf"
            max_depth = [5, "none"]
            [tune.depth]
            preset = "cart-depth"
        "#;
        let cfg: Config = toml::from_str(text).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.preprocess.threshold, 0.9);
        assert!(cfg.preprocess.cap);
        let (spec, grid) = cfg.tune["forest"].resolve().unwrap();
        assert_eq!(spec.label(), "RF");
        assert_eq!(grid.combinations()[1], vec![("max_depth".to_string(), ParamValue::Null)]);
        assert_eq!(cfg.tune["depth"].resolve().unwrap().1.len(), 81);
        assert_eq!(cfg.compare.specs().unwrap()[1].describe(), parse_model("knn(k=3)").unwrap().describe());
    }

    #[test]
    fn rejects_unknown_keys_and_models() {
        assert!(toml::from_str::<Config>("sed = 1").is_err());
        assert!(parse_model("forest").is_err());
        assert!(parse_model("knn(k=3").is_err());
        assert!(parse_model("knn(k)").is_err());
        let bad = Config { compare: RosterConfig { models: vec![] }, ..Config::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn model_strings_round_trip_through_describe() {
        for name in ["lda", "lr", "svm", "cart", "knn", "gnb", "rf", "gbc", "adaboost"] {
            let spec = parse_model(name).unwrap();
            let again = parse_model(&spec.describe()).unwrap();
            assert_eq!(spec, again, "{name}");
        }
    }
}
