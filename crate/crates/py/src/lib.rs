//! Python bindings: datasets, synthetic data, fitted pipelines, cross
//! validation, model comparison, grid search and feature importance.

use circloss::data::{load_csv, write_csv, SEVERITY_CLASSES};
use circloss::evaluate::{classification_report, metrics, Comparison, ConfusionMatrix, Folds, Metric, PreparedFolds};
use circloss::importance::{drop_column_importance, permutation_importance, ImportanceReport};
use circloss::preprocess::split as split_rows;
use circloss::search::{search_prepared, ParamGrid};
use circloss::synth::{generate, SynthSpec};
use circloss::{ModelSpec, ParamValue, StageSpec};
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

create_exception!(circloss, CirclossError, PyException);

fn err(e: circloss::Error) -> PyErr {
    CirclossError::new_err(e.to_string())
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for circloss::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(err)
    }
}

fn stages(names: Option<Vec<String>>) -> PyResult<Vec<StageSpec>> {
    names
        .unwrap_or_else(|| vec!["minmax".into(), "boxcox".into()])
        .iter()
        .map(|s| StageSpec::parse(s).py())
        .collect()
}

fn metric(name: &str) -> PyResult<Metric> {
    Metric::parse(name).py()
}

fn param(obj: &Bound<'_, PyAny>) -> PyResult<ParamValue> {
    if obj.is_none() {
        Ok(ParamValue::Null)
    } else if let Ok(b) = obj.extract::<bool>() {
        Ok(ParamValue::Bool(b))
    } else if let Ok(i) = obj.extract::<i64>() {
        Ok(ParamValue::Int(i))
    } else if let Ok(f) = obj.extract::<f64>() {
        Ok(ParamValue::Float(f))
    } else {
        Ok(ParamValue::parse(&obj.extract::<String>()?))
    }
}

fn param_to_py<'py>(py: Python<'py>, v: &ParamValue) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        ParamValue::Null => py.None().into_bound(py),
        ParamValue::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        ParamValue::Int(i) => i.into_pyobject(py)?.into_any(),
        ParamValue::Float(f) => f.into_pyobject(py)?.into_any(),
        ParamValue::Text(s) => s.into_pyobject(py)?.into_any(),
    })
}

/// A table of named numeric features with a categorical label.
#[pyclass(name = "Dataset", module = "circloss", frozen)]
pub struct PyDataset {
    inner: circloss::Dataset,
}

#[pymethods]
impl PyDataset {
    /// Builds a dataset from `{name: values}` and string labels. `classes`
    /// fixes the class order; by default it is inferred from the labels.
    #[new]
    #[pyo3(signature = (columns, labels, classes=None))]
    fn new(columns: &Bound<'_, PyDict>, labels: Vec<String>, classes: Option<Vec<String>>) -> PyResult<Self> {
        let mut names = Vec::with_capacity(columns.len());
        let mut cols = Vec::with_capacity(columns.len());
        for (k, v) in columns.iter() {
            names.push(k.extract::<String>()?);
            cols.push(v.extract::<Vec<f64>>()?);
        }
        let inner = circloss::Dataset::from_named_labels(names, cols, &labels, classes.as_deref()).py()?;
        Ok(Self { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (path, label="severity"))]
    fn from_csv(path: &str, label: &str) -> PyResult<Self> {
        Ok(Self { inner: load_csv(path, label).py()? })
    }

    #[pyo3(signature = (path, label="severity"))]
    fn to_csv(&self, path: &str, label: &str) -> PyResult<()> {
        let file = std::fs::File::create(path).map_err(|e| err(circloss::Error::io(path, e)))?;
        write_csv(&self.inner, file, label).py()
    }

    #[getter]
    fn n_rows(&self) -> usize {
        self.inner.n_rows()
    }

    #[getter]
    fn n_features(&self) -> usize {
        self.inner.n_features()
    }

    #[getter]
    fn names(&self) -> Vec<String> {
        self.inner.names().to_vec()
    }

    #[getter]
    fn classes(&self) -> Vec<String> {
        self.inner.class_vocab().to_vec()
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner.label_names().into_iter().map(String::from).collect()
    }

    fn column(&self, name: &str) -> PyResult<Vec<f64>> {
        Ok(self.inner.column(name).py()?.to_vec())
    }

    fn drop(&self, names: Vec<String>) -> PyResult<Self> {
        Ok(Self { inner: self.inner.drop_columns(&names).py()? })
    }

    /// Per-column count, mean, std, min, quartiles and max.
    fn describe<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyList>> {
        let rows = PyList::empty(py);
        for c in circloss::data::describe(&self.inner).py()? {
            let d = PyDict::new(py);
            d.set_item("feature", &c.name)?;
            d.set_item("count", c.count)?;
            d.set_item("mean", c.mean)?;
            d.set_item("std", c.std_dev)?;
            d.set_item("min", c.min)?;
            d.set_item("q25", c.q25)?;
            d.set_item("q50", c.q50)?;
            d.set_item("q75", c.q75)?;
            d.set_item("max", c.max)?;
            rows.append(d)?;
        }
        Ok(rows)
    }

    fn __len__(&self) -> usize {
        self.inner.n_rows()
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset(rows={}, features={}, classes={})",
            self.inner.n_rows(),
            self.inner.n_features(),
            self.inner.n_classes()
        )
    }
}

/// Preprocessing stages plus a classifier, fitted on training rows only.
#[pyclass(name = "Pipeline", module = "circloss", frozen)]
pub struct PyPipeline {
    inner: circloss::Pipeline,
}

#[pymethods]
impl PyPipeline {
    /// `model` is a name such as `"rf"` or an expression such as
    /// `"rf(n_estimators=50, max_depth=17)"`.
    #[staticmethod]
    #[pyo3(signature = (model, train, stages=None, seed=0))]
    fn fit(model: &str, train: &PyDataset, stages: Option<Vec<String>>, seed: u64) -> PyResult<Self> {
        let spec = ModelSpec::parse_expr(model).py()?;
        let st = self::stages(stages)?;
        Ok(Self { inner: circloss::Pipeline::fit(&st, &spec, &train.inner, seed).py()? })
    }

    fn predict(&self, data: &PyDataset) -> PyResult<Vec<String>> {
        let vocab = data.inner.class_vocab();
        let pred = self.inner.predict(&data.inner).py()?;
        Ok(pred.into_iter().map(|i| vocab[i].clone()).collect())
    }

    fn predict_proba(&self, data: &PyDataset) -> PyResult<Vec<Vec<f64>>> {
        let p = self.inner.predict_proba(&data.inner).py()?;
        Ok(p.iter_rows().map(<[f64]>::to_vec).collect())
    }

    #[pyo3(signature = (data, metric="weighted_f1"))]
    fn score(&self, data: &PyDataset, metric: &str) -> PyResult<f64> {
        let pred = self.inner.predict(&data.inner).py()?;
        self::metric(metric)?.score(data.inner.labels(), &pred, data.inner.class_vocab()).py()
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().py()
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        Ok(Self { inner: circloss::Pipeline::from_json(s).py()? })
    }

    /// Feature columns the model sees after all transforms.
    #[getter]
    fn columns(&self) -> Vec<String> {
        self.inner.model_columns.clone()
    }

    #[getter]
    fn classes(&self) -> Vec<String> {
        self.inner.class_vocab.clone()
    }
}

/// Synthetic five-class data; `small` selects the 2,000-row preset.
#[pyfunction]
#[pyo3(signature = (seed=0, small=false, n_rows=None, separability=None, outlier_rate=None))]
fn synth(seed: u64, small: bool, n_rows: Option<usize>, separability: Option<f64>, outlier_rate: Option<f64>) -> PyResult<PyDataset> {
    let mut spec = if small { SynthSpec::small(seed) } else { SynthSpec { seed, ..SynthSpec::default() } };
    if let Some(n) = n_rows {
        spec.n_rows = n;
    }
    if let Some(s) = separability {
        spec.separability = s;
    }
    if let Some(r) = outlier_rate {
        spec.outlier_rate = r;
    }
    Ok(PyDataset { inner: generate(&spec).py()?.data })
}

#[pyfunction]
#[pyo3(signature = (data, test_frac=0.2, seed=0, stratified=true))]
fn split(data: &PyDataset, test_frac: f64, seed: u64, stratified: bool) -> PyResult<(PyDataset, PyDataset)> {
    let (a, b) = split_rows(&data.inner, test_frac, seed, stratified).py()?;
    Ok((PyDataset { inner: a }, PyDataset { inner: b }))
}

fn prepared(data: &PyDataset, stages: Option<Vec<String>>, k: usize, seed: u64) -> PyResult<PreparedFolds> {
    let d = &data.inner;
    let folds = Folds::new(d.labels(), d.n_classes(), k, seed, true).py()?;
    PreparedFolds::new(d, &self::stages(stages)?, folds).py()
}

fn comparison_rows<'py>(py: Python<'py>, c: &Comparison) -> PyResult<Bound<'py, PyList>> {
    let out = PyList::empty(py);
    for r in &c.rows {
        let d = PyDict::new(py);
        d.set_item("rank", r.rank)?;
        d.set_item("model", &r.model)?;
        d.set_item("spec", &r.spec)?;
        d.set_item("mean", r.mean)?;
        d.set_item("std", r.std)?;
        d.set_item("scores", r.scores.clone())?;
        out.append(d)?;
    }
    Ok(out)
}

/// Stratified k-fold cross validation of each model on shared folds, ranked
/// best first.
#[pyfunction]
#[pyo3(signature = (models, data, k=10, seed=0, stages=None, metric="weighted_f1"))]
fn compare<'py>(
    py: Python<'py>,
    models: Vec<String>,
    data: &PyDataset,
    k: usize,
    seed: u64,
    stages: Option<Vec<String>>,
    metric: &str,
) -> PyResult<Bound<'py, PyList>> {
    let specs = models.iter().map(|m| ModelSpec::parse_expr(m).py()).collect::<PyResult<Vec<_>>>()?;
    let m = self::metric(metric)?;
    let pf = prepared(data, stages, k, seed)?;
    let c = py.detach(|| circloss::evaluate::compare_prepared(&specs, &pf, m, seed)).py()?;
    if let Some(f) = c.failures.first() {
        return Err(CirclossError::new_err(format!("{} failed: {}", f.model, f.reason)));
    }
    comparison_rows(py, &c)
}

/// Exhaustive search over `grid` (`{param: [values]}`); returns the best
/// parameters with their mean and std, and every point's mean.
#[pyfunction]
#[pyo3(signature = (model, grid, data, k=10, seed=0, stages=None, metric="weighted_f1"))]
#[allow(clippy::too_many_arguments)]
fn grid_search<'py>(
    py: Python<'py>,
    model: &str,
    grid: Bound<'py, PyDict>,
    data: &PyDataset,
    k: usize,
    seed: u64,
    stages: Option<Vec<String>>,
    metric: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let base = ModelSpec::parse_expr(model).py()?;
    let mut g = ParamGrid::new();
    for (name, values) in grid.iter() {
        let vs = values.try_iter()?.map(|v| param(&v?)).collect::<PyResult<Vec<_>>>()?;
        g = g.with(&name.extract::<String>()?, vs).py()?;
    }
    let m = self::metric(metric)?;
    let pf = prepared(data, stages, k, seed)?;
    let r = py.detach(|| search_prepared(&base, &g, &pf, m, seed)).py()?;
    let out = PyDict::new(py);
    let best = r.best_point();
    let params = PyDict::new(py);
    for (name, v) in &best.params {
        params.set_item(name, param_to_py(py, v)?)?;
    }
    out.set_item("best_params", params)?;
    out.set_item("best_model", r.best_spec.describe())?;
    out.set_item("mean", best.mean)?;
    out.set_item("std", best.std)?;
    out.set_item("means", r.points.iter().map(|p| p.mean).collect::<Vec<_>>())?;
    Ok(out)
}

/// Per-class precision, recall, F1 and support plus averages.
#[pyfunction]
#[pyo3(signature = (y_true, y_pred, classes=None))]
fn report(y_true: Vec<String>, y_pred: Vec<String>, classes: Option<Vec<String>>) -> PyResult<String> {
    let vocab = classes.unwrap_or_else(|| {
        let mut all = y_true.clone();
        all.extend(y_pred.iter().cloned());
        circloss::data::infer_vocab(&all)
    });
    let cm = circloss::evaluate::confusion(&y_true, &y_pred, &vocab).py()?;
    Ok(classification_report(&metrics(&cm).py()?))
}

/// Confusion counts, rows = true class, columns = predicted class.
#[pyfunction]
fn confusion_matrix(y_true: Vec<String>, y_pred: Vec<String>, classes: Vec<String>) -> PyResult<Vec<Vec<usize>>> {
    let cm: ConfusionMatrix = circloss::evaluate::confusion(&y_true, &y_pred, &classes).py()?;
    Ok(cm.counts)
}

fn importance_rows(r: &ImportanceReport) -> Vec<(String, f64)> {
    r.features.iter().map(|f| (f.feature.clone(), f.delta)).collect()
}

/// Drop-column importance: the pipeline is refitted without each feature.
/// Returns `(feature, delta)` sorted by delta, largest first.
#[pyfunction]
#[pyo3(signature = (model, train, test, stages=None, seed=0, metric="weighted_f1"))]
fn drop_column(
    py: Python<'_>,
    model: &str,
    train: &PyDataset,
    test: &PyDataset,
    stages: Option<Vec<String>>,
    seed: u64,
    metric: &str,
) -> PyResult<Vec<(String, f64)>> {
    let spec = ModelSpec::parse_expr(model).py()?;
    let st = self::stages(stages)?;
    let m = self::metric(metric)?;
    let r = py.detach(|| drop_column_importance(&spec, &st, &train.inner, &test.inner, m, seed)).py()?;
    Ok(importance_rows(&r))
}

/// Permutation importance of a fitted pipeline on held-out rows.
#[pyfunction]
#[pyo3(signature = (pipeline, test, n_repeats=5, seed=0, metric="weighted_f1"))]
fn permutation(
    py: Python<'_>,
    pipeline: &PyPipeline,
    test: &PyDataset,
    n_repeats: usize,
    seed: u64,
    metric: &str,
) -> PyResult<Vec<(String, f64)>> {
    let m = self::metric(metric)?;
    let r = py.detach(|| permutation_importance(&pipeline.inner, &test.inner, m, n_repeats, seed)).py()?;
    Ok(importance_rows(&r))
}

#[pymodule(name = "circloss")]
pub fn circloss_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("CirclossError", m.py().get_type::<CirclossError>())?;
    m.add("SEVERITY_CLASSES", SEVERITY_CLASSES.to_vec())?;
    m.add("BASE_MODELS", vec!["lda", "lr", "svm", "cart", "knn", "gnb"])?;
    m.add("ENSEMBLE_MODELS", vec!["bagging", "adaboost", "rf", "gbc"])?;
    m.add_class::<PyDataset>()?;
    m.add_class::<PyPipeline>()?;
    m.add_function(wrap_pyfunction!(synth, m)?)?;
    m.add_function(wrap_pyfunction!(split, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(grid_search, m)?)?;
    m.add_function(wrap_pyfunction!(report, m)?)?;
    m.add_function(wrap_pyfunction!(confusion_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(drop_column, m)?)?;
    m.add_function(wrap_pyfunction!(permutation, m)?)?;
    Ok(())
}
