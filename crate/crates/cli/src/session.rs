//! Shared state for one invocation: resolved config, lazily loaded data, and
//! the step directories with their manifests.

use std::cell::OnceCell;
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use circloss::data::read_csv;
use circloss::evaluate::{Folds, PreparedFolds};
use circloss::preprocess::{cap_apply, cap_fit, corr_prune_fit, split_indices, CapBounds, ColumnSelection, SplitIndices};
use circloss::synth::{self, SynthInfo, SynthSpec};
use circloss::Dataset;
use serde::{Deserialize, Serialize};

use crate::config::{sha256_hex, Config};
use crate::error::{CliError, Result};

pub const MANIFEST: &str = "manifest.json";
pub const STEP_DIRS: [&str; 6] = ["eda", "preprocess", "compare", "tune", "ensemble", "importance"];

/// Where a step's data came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InputRecord {
    Csv { path: String, sha256: String },
    Synth { spec: SynthSpec },
    /// A file produced by an earlier step, relative to the output root.
    Artifact { path: String, sha256: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub step: String,
    pub tool_version: String,
    pub seed: u64,
    pub config_sha256: String,
    pub inputs: Vec<InputRecord>,
    /// Every file the step wrote, relative to its directory, with SHA-256.
    pub files: BTreeMap<String, String>,
}

/// Output directory of one step. It is emptied on creation so reruns leave
/// no stale files behind.
pub struct StepDir {
    name: String,
    dir: PathBuf,
    files: BTreeMap<String, String>,
}

impl StepDir {
    pub fn create(root: &Path, name: &str) -> Result<Self> {
        let dir = root.join(name);
        if dir.exists() {
            fs::remove_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        }
        fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        Ok(Self { name: name.to_string(), dir, files: BTreeMap::new() })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, rel: &str, bytes: impl AsRef<[u8]>) -> Result<()> {
        let path = self.dir.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        let bytes = bytes.as_ref();
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.files.insert(rel.to_string(), sha256_hex(bytes));
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.write(rel, s)
    }

    pub fn write_dataset(&mut self, rel: &str, data: &Dataset, label: &str) -> Result<()> {
        let mut buf = Vec::new();
        circloss::data::write_csv(data, &mut buf, label)?;
        self.write(rel, buf)
    }

    pub fn finish(self, session: &Session, inputs: Vec<InputRecord>) -> Result<PathBuf> {
        let manifest = Manifest {
            step: self.name.clone(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: session.cfg.seed,
            config_sha256: session.config_hash.clone(),
            inputs,
            files: self.files,
        };
        let path = self.dir.join(MANIFEST);
        let mut s = serde_json::to_string_pretty(&manifest)?;
        s.push('\n');
        fs::write(&path, s).map_err(|e| CliError::io(&path, e))?;
        Ok(self.dir)
    }
}

/// Cleaned data and the hold-out split used by every modelling step.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub full: Dataset,
    pub bounds: Option<CapBounds>,
    pub capped: Dataset,
    pub selection: ColumnSelection,
    pub cleaned: Dataset,
    pub split: SplitIndices,
    pub train: Dataset,
    pub test: Dataset,
}

pub struct Session {
    pub cfg: Config,
    pub out: PathBuf,
    pub config_hash: String,
    data: OnceCell<(Dataset, InputRecord)>,
    prepared: OnceCell<Prepared>,
    folds: OnceCell<PreparedFolds>,
}

impl Session {
    pub fn new(cfg: Config, out: PathBuf) -> Result<Self> {
        let config_hash = cfg.hash()?;
        Ok(Self { cfg, out, config_hash, data: OnceCell::new(), prepared: OnceCell::new(), folds: OnceCell::new() })
    }

    pub fn label(&self) -> &str {
        &self.cfg.data.label
    }

    pub fn seed(&self) -> u64 {
        self.cfg.seed
    }

    pub fn synth_spec(&self) -> SynthSpec {
        self.cfg.synth.spec(self.cfg.seed)
    }

    /// Generates the configured synthetic dataset.
    pub fn synthesize(&self) -> Result<(Dataset, SynthInfo)> {
        let s = synth::generate(&self.synth_spec())?;
        Ok((s.data, s.info))
    }

    /// Makes freshly written synthetic data the session's input so it is not
    /// generated twice.
    pub fn adopt(&self, data: Dataset, spec: SynthSpec) {
        let _ = self.data.set((data, InputRecord::Synth { spec }));
    }

    /// The configured input CSV, or synthetic data when none is set.
    pub fn data(&self) -> Result<&(Dataset, InputRecord)> {
        if let Some(d) = self.data.get() {
            return Ok(d);
        }
        let loaded = match &self.cfg.data.input {
            Some(path) => {
                let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
                let data = read_csv(&bytes[..], self.label(), None)?;
                let record = InputRecord::Csv { path: path.display().to_string(), sha256: sha256_hex(&bytes) };
                (data, record)
            }
            None => {
                log("data", "no input configured; generating synthetic data");
                let spec = self.synth_spec();
                (synth::generate(&spec)?.data, InputRecord::Synth { spec })
            }
        };
        Ok(self.data.get_or_init(|| loaded))
    }

    pub fn input(&self) -> Result<InputRecord> {
        Ok(self.data()?.1.clone())
    }

    /// Capping and pruning on the full data (quartiles and correlations of
    /// the whole table), then the stratified hold-out split.
    pub fn prepared(&self) -> Result<&Prepared> {
        if let Some(p) = self.prepared.get() {
            return Ok(p);
        }
        let full = self.data()?.0.clone();
        let pp = &self.cfg.preprocess;
        let (bounds, capped) = if pp.cap {
            let b = cap_fit(&full)?;
            let c = cap_apply(&full, &b)?;
            (Some(b), c)
        } else {
            (None, full.clone())
        };
        let selection = corr_prune_fit(&capped, &pp.prune_options(self.seed()))?;
        let cleaned = capped.select_columns(&selection.keep)?;
        let split = split_indices(&cleaned, pp.test_frac, self.seed(), pp.stratified)?;
        let train = cleaned.select_rows(&split.train);
        let test = cleaned.select_rows(&split.test);
        let p = Prepared { full, bounds, capped, selection, cleaned, split, train, test };
        Ok(self.prepared.get_or_init(|| p))
    }

    /// Cross-validation folds over the training rows with the pipeline
    /// stages fitted per fold, shared by compare, tune and ensemble.
    pub fn folds(&self) -> Result<&PreparedFolds> {
        if let Some(f) = self.folds.get() {
            return Ok(f);
        }
        let train = &self.prepared()?.train;
        let cv = &self.cfg.cv;
        let folds = Folds::new(train.labels(), train.n_classes(), cv.k, self.seed(), cv.stratified)?;
        for w in &folds.warnings {
            log("cv", w);
        }
        let pf = PreparedFolds::new(train, &self.cfg.preprocess.stage_specs()?, folds)?;
        Ok(self.folds.get_or_init(|| pf))
    }

    /// An artifact under the output root, with its hash for the manifest.
    pub fn read_artifact(&self, rel: &str) -> Result<Option<(String, InputRecord)>> {
        let path = self.out.join(rel);
        if !path.is_file() {
            return Ok(None);
        }
        let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        let record = InputRecord::Artifact { path: rel.to_string(), sha256: sha256_hex(text.as_bytes()) };
        Ok(Some((text, record)))
    }
}

/// Progress and diagnostics go to stderr; data only ever goes to files.
pub fn log(step: &str, msg: &str) {
    eprintln!("[{step}] {msg}");
}
