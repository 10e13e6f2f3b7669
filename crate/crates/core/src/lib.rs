//! Tabular classification workbench for imbalanced multiclass severity data.
//!
//! The crate is organised along the analysis workflow:
//!
//! * [`data`] holds the column-major [`Dataset`], CSV ingestion and the
//!   exploratory statistics (summaries, quantiles, correlation, histograms).
//! * [`preprocess`] provides fit/apply transforms (IQR capping, correlation
//!   pruning, min-max scaling, Box-Cox) and the leakage-safe [`Pipeline`].
//! * [`learners`] and [`ensembles`] implement the classifiers, all reachable
//!   through [`ModelSpec`] / [`Model`].
//! * [`evaluate`], [`search`] and [`importance`] score, tune and explain them.
//! * [`synth`] generates deterministic synthetic datasets in the same regime.

pub mod data;
pub mod ensembles;
pub mod error;
pub mod evaluate;
pub mod importance;
pub mod learners;
pub mod matrix;
pub mod model;
pub mod preprocess;
pub mod rng;
pub mod search;
pub mod synth;

pub use data::Dataset;
pub use error::{Error, Result};
pub use matrix::Matrix;
pub use model::{Classifier, Model, ModelSpec, ParamValue};
pub use preprocess::{Pipeline, StageSpec};
