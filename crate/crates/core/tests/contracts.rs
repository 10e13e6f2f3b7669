//! Cross-module contracts of the public API: every model honours the
//! classifier contract, pipelines survive serialisation, and whole workflows
//! are reproducible from a seed.

use circloss::evaluate::{kfold_cv, Metric};
use circloss::preprocess::split;
use circloss::synth::{generate, SynthSpec};
use circloss::{Classifier, Dataset, Matrix, ModelSpec, Pipeline, StageSpec};
use proptest::prelude::*;

const ALL: [&str; 10] = ["lda", "lr", "svm", "cart", "knn", "gnb", "bagging", "adaboost", "rf", "gbc"];

fn small_models() -> Vec<ModelSpec> {
    ALL.iter()
        .map(|m| {
            let expr = match *m {
                "bagging" | "adaboost" | "rf" | "gbc" => format!("{m}(n_estimators=5)"),
                "svm" => "svm(n_iter=50)".to_string(),
                _ => m.to_string(),
            };
            ModelSpec::parse_expr(&expr).unwrap()
        })
        .collect()
}

fn stages() -> Vec<StageSpec> {
    vec![StageSpec::MinMax, StageSpec::BoxCox]
}

fn synth(seed: u64, n_rows: usize) -> Dataset {
    generate(&SynthSpec { n_rows, ..SynthSpec::small(seed) }).unwrap().data
}

fn blobs(rows: &[(f64, f64)], labels: &[usize], k: usize) -> (Matrix, Vec<usize>) {
    let flat: Vec<Vec<f64>> = rows.iter().map(|&(a, b)| vec![a, b]).collect();
    let x = Matrix::from_rows(&flat).unwrap();
    (x, labels.iter().map(|l| l % k).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn every_model_meets_the_classifier_contract(
        pts in prop::collection::vec((-5f64..5.0, -5f64..5.0), 12..40),
        labels in prop::collection::vec(0usize..3, 40),
        seed: u64,
    ) {
        let (x, y) = blobs(&pts, &labels[..pts.len()], 3);
        prop_assume!((0..3).all(|c| y.contains(&c)));
        for spec in small_models() {
            let model = spec.fit(&x, &y, 3, None, seed).unwrap();
            let p = model.predict_proba(&x);
            prop_assert_eq!((p.rows(), p.cols()), (x.rows(), 3));
            for row in p.iter_rows() {
                prop_assert!(row.iter().all(|&v| v >= 0.0), "{}", spec.describe());
                prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9, "{}", spec.describe());
            }
            prop_assert_eq!(model.predict(&x), p.argmax_rows());
            let again = spec.fit(&x, &y, 3, None, seed).unwrap();
            prop_assert_eq!(again.predict_proba(&x), p, "{} is not seed-deterministic", spec.describe());
        }
    }

    #[test]
    fn cart_ignores_monotone_feature_transforms(
        pts in prop::collection::vec((0.1f64..5.0, 0.1f64..5.0), 10..30),
        labels in prop::collection::vec(0usize..2, 30),
    ) {
        let (x, y) = blobs(&pts, &labels[..pts.len()], 2);
        prop_assume!(y.contains(&0) && y.contains(&1));
        let warped: Vec<(f64, f64)> = pts.iter().map(|&(a, b)| (a.ln(), b.powi(3) + 2.0)).collect();
        let (xw, _) = blobs(&warped, &labels[..pts.len()], 2);
        let cart = ModelSpec::parse("cart").unwrap();
        let p = cart.fit(&x, &y, 2, None, 0).unwrap().predict(&x);
        let pw = cart.fit(&xw, &y, 2, None, 0).unwrap().predict(&xw);
        prop_assert_eq!(p, pw);
    }

    #[test]
    fn knn_ignores_translation(
        pts in prop::collection::vec((-5f64..5.0, -5f64..5.0), 8..30),
        labels in prop::collection::vec(0usize..3, 30),
        shift in -100f64..100.0,
    ) {
        let (x, y) = blobs(&pts, &labels[..pts.len()], 3);
        let moved: Vec<(f64, f64)> = pts.iter().map(|&(a, b)| (a + shift, b + shift)).collect();
        let (xm, _) = blobs(&moved, &labels[..pts.len()], 3);
        let knn = ModelSpec::parse_expr("knn(k=3)").unwrap();
        let p = knn.fit(&x, &y, 3, None, 0).unwrap().predict(&x);
        let pm = knn.fit(&xm, &y, 3, None, 0).unwrap().predict(&xm);
        prop_assert_eq!(p, pm);
    }
}

#[test]
fn pipelines_round_trip_through_json() {
    let data = synth(4, 600);
    let (train, test) = split(&data, 0.25, 4, true).unwrap();
    for spec in small_models() {
        let pipe = Pipeline::fit(&stages(), &spec, &train, 4).unwrap();
        let back = Pipeline::from_json(&pipe.to_json().unwrap()).unwrap();
        assert_eq!(back.predict_proba(&test).unwrap(), pipe.predict_proba(&test).unwrap(), "{}", spec.describe());
    }
}

#[test]
fn pipeline_transforms_see_training_rows_only() {
    let data = synth(5, 400);
    let (train, test) = split(&data, 0.25, 5, true).unwrap();
    let spec = ModelSpec::parse("gnb").unwrap();
    let a = Pipeline::fit(&[StageSpec::MinMax], &spec, &train, 0).unwrap();
    let b = Pipeline::fit(&[StageSpec::MinMax], &spec, &train, 0).unwrap();
    // inflating a test column maps it outside [0, 1] instead of refitting
    let far = test.replace_column("f02", test.column("f02").unwrap().iter().map(|v| v * 1e6).collect()).unwrap();
    assert_eq!(a.transforms, b.transforms);
    let t = a.transform(&far).unwrap();
    assert!(t.as_slice().iter().any(|&v| v > 1.0));
    assert_eq!(a.transform(&test).unwrap(), b.transform(&test).unwrap());
}

#[test]
fn cross_validation_is_reproducible_and_separates_models() {
    let data = synth(6, 800);
    let cart = ModelSpec::parse("cart").unwrap();
    let a = kfold_cv(&cart, &stages(), &data, 5, 6, true).unwrap();
    let b = kfold_cv(&cart, &stages(), &data, 5, 6, true).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.scores.len(), 5);
    assert_eq!(a.metric, Metric::WeightedF1);
    assert!(a.mean > 0.9, "cart cv {}", a.mean);
    let other = kfold_cv(&cart, &stages(), &data, 5, 7, true).unwrap();
    assert_ne!(a.scores, other.scores);
}

#[test]
fn unknown_and_invalid_models_are_rejected() {
    assert!(ModelSpec::parse("xgboost").is_err());
    assert!(ModelSpec::parse_expr("rf(n_estimators=0)").is_err());
    assert!(ModelSpec::parse_expr("knn(k=-1)").is_err());
    assert!(ModelSpec::parse_expr("bagging(base=nope)").is_err());
    let b = ModelSpec::parse_expr("bagging(base=knn, base.k=1, n_estimators=3)").unwrap();
    assert_eq!(ModelSpec::parse_expr(&b.describe()).unwrap(), b);
}
