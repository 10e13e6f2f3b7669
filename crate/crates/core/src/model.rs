//! Uniform classifier contract: [`ModelSpec`] (unfitted, with hyperparameters)
//! fits into a [`Model`] (fitted, serializable).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ensembles::adaboost::{AdaBoost, AdaBoostParams};
use crate::ensembles::bagging::{Bagging, BaggingParams};
use crate::ensembles::forest::{ForestParams, RandomForest};
use crate::ensembles::gbm::{GbmParams, GradientBoosting};
use crate::error::{Error, Result};
use crate::learners::cart::{Cart, CartParams};
use crate::learners::gnb::{Gnb, GnbParams};
use crate::learners::knn::{Knn, KnnParams};
use crate::learners::lda::{Lda, LdaParams};
use crate::learners::logreg::{LogReg, LogRegParams};
use crate::learners::svm::{Svm, SvmParams};
use crate::matrix::Matrix;

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// A hyperparameter value as it appears in configs and grids.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Null,
    Bool(bool),
    Int(i64),
    Float(f64),
    Text(String),
}

impl ParamValue {
    /// Parses a command-line token: `none`, `true`/`false`, integers, floats,
    /// anything else as text.
    pub fn parse(s: &str) -> Self {
        let t = s.trim();
        match t.to_ascii_lowercase().as_str() {
            "none" | "null" => return ParamValue::Null,
            "true" => return ParamValue::Bool(true),
            "false" => return ParamValue::Bool(false),
            _ => {}
        }
        if let Ok(i) = t.parse::<i64>() {
            ParamValue::Int(i)
        } else if let Ok(f) = t.parse::<f64>() {
            ParamValue::Float(f)
        } else {
            ParamValue::Text(t.to_string())
        }
    }

    pub fn as_usize(&self, name: &str) -> Result<usize> {
        match self {
            ParamValue::Int(i) if *i >= 0 => Ok(*i as usize),
            _ => Err(Error::param(format!("{name} expects a non-negative integer, got {self}"))),
        }
    }

    pub fn as_opt_usize(&self, name: &str) -> Result<Option<usize>> {
        match self {
            ParamValue::Null => Ok(None),
            _ => self.as_usize(name).map(Some),
        }
    }

    pub fn as_f64(&self, name: &str) -> Result<f64> {
        match self {
            ParamValue::Int(i) => Ok(*i as f64),
            ParamValue::Float(f) if f.is_finite() => Ok(*f),
            _ => Err(Error::param(format!("{name} expects a number, got {self}"))),
        }
    }

    pub fn as_opt_f64(&self, name: &str) -> Result<Option<f64>> {
        match self {
            ParamValue::Null => Ok(None),
            _ => self.as_f64(name).map(Some),
        }
    }

    pub fn as_bool(&self, name: &str) -> Result<bool> {
        match self {
            ParamValue::Bool(b) => Ok(*b),
            _ => Err(Error::param(format!("{name} expects true or false, got {self}"))),
        }
    }

    /// A model name, giving that model's default spec.
    pub fn as_model(&self, name: &str) -> Result<ModelSpec> {
        match self {
            ParamValue::Text(s) => ModelSpec::parse(s),
            _ => Err(Error::param(format!("{name} expects a model name, got {self}"))),
        }
    }
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Null => f.write_str("none"),
            ParamValue::Bool(b) => write!(f, "{b}"),
            ParamValue::Int(i) => write!(f, "{i}"),
            ParamValue::Float(x) => write!(f, "{x}"),
            ParamValue::Text(s) => f.write_str(s),
        }
    }
}

impl From<usize> for ParamValue {
    fn from(v: usize) -> Self {
        ParamValue::Int(v as i64)
    }
}

impl From<Option<usize>> for ParamValue {
    fn from(v: Option<usize>) -> Self {
        v.map_or(ParamValue::Null, Into::into)
    }
}

impl From<f64> for ParamValue {
    fn from(v: f64) -> Self {
        ParamValue::Float(v)
    }
}

impl From<Option<f64>> for ParamValue {
    fn from(v: Option<f64>) -> Self {
        v.map_or(ParamValue::Null, ParamValue::Float)
    }
}

impl From<bool> for ParamValue {
    fn from(v: bool) -> Self {
        ParamValue::Bool(v)
    }
}

impl From<&str> for ParamValue {
    fn from(v: &str) -> Self {
        ParamValue::Text(v.to_string())
    }
}

/// Fitted-model behaviour shared by every learner and ensemble.
pub trait Classifier {
    fn n_classes(&self) -> usize;

    /// One row per sample, one column per class; rows sum to one.
    fn predict_proba(&self, x: &Matrix) -> Matrix;

    fn predict(&self, x: &Matrix) -> Vec<usize> {
        self.predict_proba(x).argmax_rows()
    }
}

/// Unfitted model: the algorithm plus its hyperparameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelSpec {
    Lda(LdaParams),
    LogReg(LogRegParams),
    Svm(SvmParams),
    Cart(CartParams),
    Knn(KnnParams),
    Gnb(GnbParams),
    Bagging(BaggingParams),
    AdaBoost(AdaBoostParams),
    RandomForest(ForestParams),
    GradientBoosting(GbmParams),
}

impl ModelSpec {
    /// Default spec by short name (`lda`, `lr`, `svm`, `cart`, `knn`, `gnb`,
    /// `bagging`, `adaboost`, `rf`, `gbc`). Bagging and AdaBoost wrap a
    /// default CART.
    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name.trim().to_ascii_lowercase().as_str() {
            "lda" => ModelSpec::Lda(LdaParams::default()),
            "lr" | "logreg" => ModelSpec::LogReg(LogRegParams::default()),
            "svm" => ModelSpec::Svm(SvmParams::default()),
            "cart" => ModelSpec::Cart(CartParams::default()),
            "knn" => ModelSpec::Knn(KnnParams::default()),
            "gnb" | "nb" => ModelSpec::Gnb(GnbParams::default()),
            "bagging" => ModelSpec::Bagging(BaggingParams::default()),
            "adaboost" | "abc" => ModelSpec::AdaBoost(AdaBoostParams::default()),
            "rf" | "random_forest" => ModelSpec::RandomForest(ForestParams::default()),
            "gbc" | "gradient_boosting" => ModelSpec::GradientBoosting(GbmParams::default()),
            other => return Err(Error::param(format!("unknown model {other:?}"))),
        })
    }

    /// Parses `name` or `name(key=value, ...)`, the form [`describe`]
    /// prints.
    ///
    /// [`describe`]: ModelSpec::describe
    pub fn parse_expr(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, args) = match s.find('(') {
            Some(i) => {
                let inner = s[i + 1..]
                    .strip_suffix(')')
                    .ok_or_else(|| Error::param(format!("unbalanced parentheses in {s:?}")))?;
                (&s[..i], inner)
            }
            None => (s, ""),
        };
        let mut params = Vec::new();
        for kv in args.split(',').map(str::trim).filter(|kv| !kv.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::param(format!("expected key=value in {s:?}, got {kv:?}")))?;
            params.push((k.trim().to_string(), ParamValue::parse(v)));
        }
        Self::parse(name)?.with_params(&params)
    }

    pub fn base_roster() -> Vec<Self> {
        ["lda", "lr", "svm", "cart", "knn", "gnb"].iter().map(|n| Self::parse(n).unwrap()).collect()
    }

    pub fn ensemble_roster() -> Vec<Self> {
        ["bagging", "adaboost", "rf", "gbc"].iter().map(|n| Self::parse(n).unwrap()).collect()
    }

    /// Short display name used in report tables.
    pub fn label(&self) -> &'static str {
        match self {
            ModelSpec::Lda(_) => "LDA",
            ModelSpec::LogReg(_) => "LR",
            ModelSpec::Svm(_) => "SVM",
            ModelSpec::Cart(_) => "CART",
            ModelSpec::Knn(_) => "KNN",
            ModelSpec::Gnb(_) => "NB",
            ModelSpec::Bagging(_) => "Bagging",
            ModelSpec::AdaBoost(_) => "AdaBoost",
            ModelSpec::RandomForest(_) => "RF",
            ModelSpec::GradientBoosting(_) => "GBC",
        }
    }

    /// Whether `fit` accepts per-sample weights directly.
    pub fn supports_weights(&self) -> bool {
        matches!(self, ModelSpec::Cart(_))
    }

    /// Sets a hyperparameter by name. Bagging and AdaBoost forward names
    /// prefixed with `base.` to their base estimator.
    pub fn set_param(&mut self, name: &str, value: &ParamValue) -> Result<()> {
        match self {
            ModelSpec::Lda(p) => p.set(name, value),
            ModelSpec::LogReg(p) => p.set(name, value),
            ModelSpec::Svm(p) => p.set(name, value),
            ModelSpec::Cart(p) => p.set(name, value),
            ModelSpec::Knn(p) => p.set(name, value),
            ModelSpec::Gnb(p) => p.set(name, value),
            ModelSpec::Bagging(p) => p.set(name, value),
            ModelSpec::AdaBoost(p) => p.set(name, value),
            ModelSpec::RandomForest(p) => p.set(name, value),
            ModelSpec::GradientBoosting(p) => p.set(name, value),
        }
    }

    /// Returns a copy with every `(name, value)` applied in order.
    pub fn with_params(&self, params: &[(String, ParamValue)]) -> Result<Self> {
        let mut spec = self.clone();
        for (k, v) in params {
            spec.set_param(k, v)?;
        }
        Ok(spec)
    }

    pub fn params(&self) -> Vec<(String, ParamValue)> {
        match self {
            ModelSpec::Lda(p) => p.params(),
            ModelSpec::LogReg(p) => p.params(),
            ModelSpec::Svm(p) => p.params(),
            ModelSpec::Cart(p) => p.params(),
            ModelSpec::Knn(p) => p.params(),
            ModelSpec::Gnb(p) => p.params(),
            ModelSpec::Bagging(p) => p.params(),
            ModelSpec::AdaBoost(p) => p.params(),
            ModelSpec::RandomForest(p) => p.params(),
            ModelSpec::GradientBoosting(p) => p.params(),
        }
    }

    /// `LABEL(k=v, ...)`, stable across runs.
    pub fn describe(&self) -> String {
        let ps: Vec<String> = self.params().iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{}({})", self.label(), ps.join(", "))
    }

    pub fn fit(
        &self,
        x: &Matrix,
        y: &[usize],
        n_classes: usize,
        weights: Option<&[f64]>,
        seed: u64,
    ) -> Result<Model> {
        if weights.is_some() && !self.supports_weights() {
            return Err(Error::param(format!("{} does not accept sample weights", self.label())));
        }
        Ok(match self {
            ModelSpec::Lda(p) => Model::Lda(Lda::fit(x, y, n_classes, p)?),
            ModelSpec::LogReg(p) => Model::LogReg(LogReg::fit(x, y, n_classes, p)?),
            ModelSpec::Svm(p) => Model::Svm(Svm::fit(x, y, n_classes, p, seed)?),
            ModelSpec::Cart(p) => Model::Cart(Cart::fit(x, y, n_classes, weights, p)?),
            ModelSpec::Knn(p) => Model::Knn(Knn::fit(x, y, n_classes, p)?),
            ModelSpec::Gnb(p) => Model::Gnb(Gnb::fit(x, y, n_classes, p)?),
            ModelSpec::Bagging(p) => Model::Bagging(Bagging::fit(x, y, n_classes, p, seed)?),
            ModelSpec::AdaBoost(p) => Model::AdaBoost(AdaBoost::fit(x, y, n_classes, p, seed)?),
            ModelSpec::RandomForest(p) => {
                Model::RandomForest(RandomForest::fit(x, y, n_classes, p, seed)?)
            }
            ModelSpec::GradientBoosting(p) => {
                Model::GradientBoosting(GradientBoosting::fit(x, y, n_classes, p)?)
            }
        })
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

/// A fitted model of any kind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Model {
    Lda(Lda),
    LogReg(LogReg),
    Svm(Svm),
    Cart(Cart),
    Knn(Knn),
    Gnb(Gnb),
    Bagging(Bagging),
    AdaBoost(AdaBoost),
    RandomForest(RandomForest),
    GradientBoosting(GradientBoosting),
}

#[derive(Serialize, Deserialize)]
struct ModelDoc {
    format_version: u32,
    model: Model,
}

impl Model {
    fn inner(&self) -> &dyn Classifier {
        match self {
            Model::Lda(m) => m,
            Model::LogReg(m) => m,
            Model::Svm(m) => m,
            Model::Cart(m) => m,
            Model::Knn(m) => m,
            Model::Gnb(m) => m,
            Model::Bagging(m) => m,
            Model::AdaBoost(m) => m,
            Model::RandomForest(m) => m,
            Model::GradientBoosting(m) => m,
        }
    }

    /// Fit-time diagnostics worth surfacing (non-convergence, uncalibrated
    /// probabilities, early-stopped boosting).
    pub fn warnings(&self) -> Vec<String> {
        match self {
            Model::LogReg(m) if !m.converged => {
                vec![format!("logistic regression stopped after {} iterations without converging", m.n_iter)]
            }
            Model::Svm(_) => vec!["SVM probabilities are a softmax of margins and are not calibrated".into()],
            Model::AdaBoost(m) => m.warnings.clone(),
            Model::Bagging(m) => m.members.iter().flat_map(Model::warnings).collect(),
            _ => Vec::new(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Doc<'a> {
            format_version: u32,
            model: &'a Model,
        }
        Ok(serde_json::to_string(&Doc { format_version: MODEL_FORMAT_VERSION, model: self })?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: ModelDoc = serde_json::from_str(s)?;
        if doc.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::InvalidData(format!(
                "unsupported model format version {}",
                doc.format_version
            )));
        }
        Ok(doc.model)
    }
}

impl Classifier for Model {
    fn n_classes(&self) -> usize {
        self.inner().n_classes()
    }

    fn predict_proba(&self, x: &Matrix) -> Matrix {
        self.inner().predict_proba(x)
    }

    fn predict(&self, x: &Matrix) -> Vec<usize> {
        self.inner().predict(x)
    }
}
