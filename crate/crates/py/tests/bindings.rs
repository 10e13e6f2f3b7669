//! Drives the module through an embedded interpreter, as Python code would.

use std::ffi::CString;
use std::sync::Once;

use circloss_py::circloss_module;
use pyo3::prelude::*;

fn run(code: &str) {
    static INIT: Once = Once::new();
    INIT.call_once(|| {
        pyo3::append_to_inittab!(circloss_module);
        Python::initialize();
    });
    let code = CString::new(code).unwrap();
    Python::attach(|py| {
        py.run(&code, None, None).map_err(|e| e.display(py)).unwrap();
    });
}

#[test]
fn fit_predict_and_reload() {
    run(r#"
import circloss
data = circloss.synth(seed=1, small=True, n_rows=500)
assert len(data) == 500 and data.classes == list(circloss.SEVERITY_CLASSES)
train, test = circloss.split(data, test_frac=0.2, seed=1)
pipe = circloss.Pipeline.fit("cart", train, seed=1)
pred = pipe.predict(test)
assert len(pred) == len(test)
assert pipe.score(test) == pipe.score(test, metric="weighted_f1")
again = circloss.Pipeline.from_json(pipe.to_json())
assert again.predict_proba(test) == pipe.predict_proba(test)
"#);
}

#[test]
fn dataset_from_python_values() {
    run(r#"
import circloss
d = circloss.Dataset({"x": [0.0, 1.0, 10.0, 11.0]}, ["a", "a", "b", "b"])
assert d.names == ["x"] and d.labels == ["a", "a", "b", "b"] and d.n_features == 1
assert d.describe()[0]["max"] == 11.0
knn = circloss.Pipeline.fit("knn(k=1)", d, stages=[])
assert knn.predict(d) == d.labels
try:
    circloss.Dataset({"x": [1.0]}, ["a", "b"])
except circloss.CirclossError:
    pass
else:
    raise AssertionError("length mismatch accepted")
"#);
}

#[test]
fn search_compare_and_importance() {
    run(r#"
import circloss
data = circloss.synth(seed=2, small=True, n_rows=400)
ranking = circloss.compare(["cart", "gnb"], data, k=3, seed=2)
assert sorted(r["model"] for r in ranking) == ["CART", "NB"]
assert ranking[0]["mean"] >= ranking[1]["mean"]
g = circloss.grid_search("knn", {"k": [1, 3]}, data, k=3, seed=2)
assert g["best_params"]["k"] in (1, 3) and len(g["means"]) == 2
train, test = circloss.split(data, seed=2)
drop = circloss.drop_column("gnb", train, test, stages=[])
assert [d for _, d in drop] == sorted((d for _, d in drop), reverse=True)
pipe = circloss.Pipeline.fit("gnb", train, stages=[])
perm = circloss.permutation(pipe, test, n_repeats=2)
assert len(perm) == train.n_features
"#);
}
