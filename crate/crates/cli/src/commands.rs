//! One function per subcommand. Each writes its step directory and returns
//! the in-memory results so `reproduce` can chain them.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use circloss::data::{boxplot_stats, class_distribution, describe as describe_columns, histogram, pearson_matrix};
use circloss::evaluate::{
    classification_report, compare_prepared, metrics, report_csv, ClassMetrics, Comparison, ConfusionMatrix,
};
use circloss::importance::{drop_column_importance, permutation_importance, ImportanceMethod, ImportanceReport};
use circloss::preprocess::{split_indices, Pipeline};
use circloss::search::{search_prepared, SearchResult};
use circloss::{Dataset, ModelSpec};
use serde::{Deserialize, Serialize};

use crate::config::parse_model;
use crate::error::{CliError, Result};
use crate::session::{log, InputRecord, Session, StepDir, MANIFEST, STEP_DIRS};

pub const HISTOGRAM_BINS: usize = 20;

fn csv_line(fields: &[String]) -> String {
    let mut w = String::new();
    for (i, f) in fields.iter().enumerate() {
        if i > 0 {
            w.push(',');
        }
        if f.contains([',', '"', '\n']) {
            w.push('"');
            w.push_str(&f.replace('"', "\"\""));
            w.push('"');
        } else {
            w.push_str(f);
        }
    }
    w.push('\n');
    w
}

pub fn synth(s: &Session) -> Result<PathBuf> {
    let (data, info) = s.synthesize()?;
    let mut dir = StepDir::create(&s.out, "data")?;
    dir.write_dataset("synth.csv", &data, s.label())?;
    dir.write_json("synth.json", &info)?;
    log("synth", &format!("{} rows, class counts {:?}", data.n_rows(), info.class_counts));
    let path = dir.finish(s, vec![InputRecord::Synth { spec: info.spec.clone() }])?;
    if s.cfg.data.input.is_none() {
        s.adopt(data, info.spec);
    }
    Ok(path)
}

pub fn describe(s: &Session) -> Result<PathBuf> {
    let (data, input) = s.data()?;
    let mut dir = StepDir::create(&s.out, "eda")?;

    let summary = describe_columns(data)?;
    let mut csv = csv_line(&["feature", "count", "mean", "std_dev", "min", "q25", "q50", "q75", "max"].map(String::from));
    let mut txt = format!(
        "{:12} {:>7} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12}\n",
        "feature", "count", "mean", "std", "min", "25%", "50%", "75%", "max"
    );
    for c in &summary {
        csv += &csv_line(&[
            c.name.clone(),
            c.count.to_string(),
            c.mean.to_string(),
            c.std_dev.to_string(),
            c.min.to_string(),
            c.q25.to_string(),
            c.q50.to_string(),
            c.q75.to_string(),
            c.max.to_string(),
        ]);
        txt += &format!(
            "{:12} {:>7} {:>12.4} {:>12.4} {:>12.4} {:>12.4} {:>12.4} {:>12.4} {:>12.4}\n",
            c.name, c.count, c.mean, c.std_dev, c.min, c.q25, c.q50, c.q75, c.max
        );
    }
    dir.write("summary.csv", csv)?;
    dir.write("summary.txt", txt)?;
    dir.write_json("summary.json", &summary)?;

    let corr = pearson_matrix(data)?;
    let mut header = vec!["feature".to_string()];
    header.extend(corr.names.iter().cloned());
    let mut csv = csv_line(&header);
    for (i, name) in corr.names.iter().enumerate() {
        let mut row = vec![name.clone()];
        row.extend((0..corr.names.len()).map(|j| corr.get(i, j).to_string()));
        csv += &csv_line(&row);
    }
    dir.write("correlation.csv", csv)?;

    let mut hist = csv_line(&["feature", "bin", "lo", "hi", "count"].map(String::from));
    let mut boxes = csv_line(&["feature", "q25", "q50", "q75", "whisker_lo", "whisker_hi", "n_outliers"].map(String::from));
    for (name, col) in data.names().iter().zip(data.columns()) {
        for (b, bin) in histogram(col, HISTOGRAM_BINS)?.iter().enumerate() {
            hist += &csv_line(&[name.clone(), b.to_string(), bin.lo.to_string(), bin.hi.to_string(), bin.count.to_string()]);
        }
        let bs = boxplot_stats(col)?;
        boxes += &csv_line(&[
            name.clone(),
            bs.q25.to_string(),
            bs.q50.to_string(),
            bs.q75.to_string(),
            bs.whisker_lo.to_string(),
            bs.whisker_hi.to_string(),
            bs.outliers.len().to_string(),
        ]);
    }
    dir.write("histograms.csv", hist)?;
    dir.write("boxplots.csv", boxes)?;

    let dist = class_distribution(data)?;
    dir.write_json("class_distribution.json", &dist)?;
    log("describe", &format!("{} rows, {} features, {} classes", data.n_rows(), data.n_features(), data.n_classes()));
    dir.finish(s, vec![input.clone()])
}

/// Capping, pruning and the hold-out split, with an audit trail.
pub fn preprocess(s: &Session) -> Result<PathBuf> {
    let p = s.prepared()?;
    let mut dir = StepDir::create(&s.out, "preprocess")?;
    let mut audit = String::new();
    match &p.bounds {
        Some(b) => {
            dir.write_json("cap_bounds.json", b)?;
            let mut csv = csv_line(&["feature", "lo", "hi", "n_capped"].map(String::from));
            writeln!(audit, "outlier capping (1.5 IQR fences, fitted on all rows)").ok();
            for (j, fence) in b.columns.iter().enumerate() {
                let n = p.full.columns()[j].iter().zip(&p.capped.columns()[j]).filter(|(a, b)| a != b).count();
                csv += &csv_line(&[fence.name.clone(), fence.lo.to_string(), fence.hi.to_string(), n.to_string()]);
                writeln!(audit, "  {:12} [{:.4}, {:.4}]  {} value(s) capped", fence.name, fence.lo, fence.hi, n).ok();
            }
            dir.write("cap_summary.csv", csv)?;
        }
        None => audit.push_str("outlier capping disabled\n"),
    }
    let mut csv = csv_line(&["kept", "dropped", "r"].map(String::from));
    writeln!(audit, "correlation pruning (|r| > {})", s.cfg.preprocess.threshold).ok();
    for step in &p.selection.removed {
        csv += &csv_line(&[step.kept.clone(), step.dropped.clone(), step.r.to_string()]);
        writeln!(audit, "  dropped {:12} kept {:12} r = {:.4}", step.dropped, step.kept, step.r).ok();
    }
    if p.selection.removed.is_empty() {
        writeln!(audit, "  nothing removed").ok();
    }
    dir.write("prune_audit.csv", csv)?;
    dir.write_json("selection.json", &p.selection)?;
    dir.write_dataset("data.csv", &p.cleaned, s.label())?;
    dir.write_json("split.json", &p.split)?;
    dir.write_dataset("train.csv", &p.train, s.label())?;
    dir.write_dataset("test.csv", &p.test, s.label())?;
    writeln!(
        audit,
        "split: {} train / {} test rows (test_frac {}, stratified {})",
        p.train.n_rows(),
        p.test.n_rows(),
        s.cfg.preprocess.test_frac,
        s.cfg.preprocess.stratified
    )
    .ok();
    writeln!(audit, "pipeline stages fitted per training set: {}", s.cfg.preprocess.stages.join(", ")).ok();
    dir.write("audit.txt", &audit)?;
    log("preprocess", &format!("kept {} of {} features", p.cleaned.n_features(), p.full.n_features()));
    dir.finish(s, vec![s.input()?])
}

/// Hold-out split of the raw input, without capping or pruning.
pub fn split(s: &Session) -> Result<PathBuf> {
    let (data, input) = s.data()?;
    let pp = &s.cfg.preprocess;
    let idx = split_indices(data, pp.test_frac, s.seed(), pp.stratified)?;
    let mut dir = StepDir::create(&s.out, "split")?;
    dir.write_json("split.json", &idx)?;
    dir.write_dataset("train.csv", &data.select_rows(&idx.train), s.label())?;
    dir.write_dataset("test.csv", &data.select_rows(&idx.test), s.label())?;
    log("split", &format!("{} train / {} test rows", idx.train.len(), idx.test.len()));
    dir.finish(s, vec![input.clone()])
}

fn write_comparison(dir: &mut StepDir, c: &Comparison) -> Result<()> {
    dir.write("ranking.csv", c.ranking_csv()?)?;
    dir.write("ranking.txt", c.to_text())?;
    dir.write("fold_scores.csv", c.fold_scores_csv()?)?;
    dir.write("box_stats.csv", c.box_stats_csv()?)?;
    dir.write_json("comparison.json", c)
}

fn run_comparison(s: &Session, step: &str, specs: &[ModelSpec]) -> Result<Comparison> {
    let folds = s.folds()?;
    log(step, &format!("{}-fold CV of {} model(s)", folds.folds.k, specs.len()));
    let c = compare_prepared(specs, folds, s.cfg.cv.metric()?, s.seed())?;
    for f in &c.failures {
        log(step, &format!("{} failed: {}", f.model, f.reason));
    }
    Ok(c)
}

pub fn compare(s: &Session) -> Result<(PathBuf, Comparison)> {
    let specs = s.cfg.compare.specs()?;
    let c = run_comparison(s, "compare", &specs)?;
    let mut dir = StepDir::create(&s.out, "compare")?;
    write_comparison(&mut dir, &c)?;
    Ok((dir.finish(s, vec![s.input()?])?, c))
}

/// Hold-out evaluation of a pipeline fitted on the training rows.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TestEvaluation {
    pub model: String,
    pub spec: String,
    pub confusion: ConfusionMatrix,
    pub metrics: ClassMetrics,
}

fn evaluate_on_test(s: &Session, spec: &ModelSpec) -> Result<(Pipeline, TestEvaluation)> {
    let p = s.prepared()?;
    let pipeline = Pipeline::fit(&s.cfg.preprocess.stage_specs()?, spec, &p.train, s.seed())?;
    let pred = pipeline.predict(&p.test)?;
    let confusion = ConfusionMatrix::from_indices(p.test.labels(), &pred, p.test.class_vocab())?;
    let metrics = metrics(&confusion)?;
    Ok((pipeline, TestEvaluation { model: spec.label().to_string(), spec: spec.describe(), confusion, metrics }))
}

fn write_evaluation(dir: &mut StepDir, prefix: &str, e: &TestEvaluation) -> Result<()> {
    dir.write(&format!("{prefix}/confusion.csv"), e.confusion.to_csv())?;
    dir.write(&format!("{prefix}/report.csv"), report_csv(&e.metrics)?)?;
    dir.write(&format!("{prefix}/report.txt"), format!("{}\n\n{}", e.spec, classification_report(&e.metrics)))?;
    dir.write_json(&format!("{prefix}/test_metrics.json"), e)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TuneOutcome {
    pub grid: String,
    pub search: SearchResult,
    pub test: TestEvaluation,
}

pub fn tune(s: &Session) -> Result<(PathBuf, Vec<TuneOutcome>)> {
    let metric = s.cfg.cv.metric()?;
    let mut outcomes = Vec::new();
    let mut dir = StepDir::create(&s.out, "tune")?;
    for (name, g) in &s.cfg.tune {
        let (base, grid) = g.resolve()?;
        log("tune", &format!("grid {name:?}: {} with {} point(s)", base.label(), grid.combinations().len()));
        let search = search_prepared(&base, &grid, s.folds()?, metric, s.seed())?;
        let (pipeline, test) = evaluate_on_test(s, &search.best_spec)?;
        log(
            "tune",
            &format!("grid {name:?}: best {} cv {:.4}, test {:.4}", test.spec, search.best_point().mean, metric.of(&test.metrics)),
        );
        dir.write(&format!("{name}/search.csv"), search.to_csv()?)?;
        dir.write_json(&format!("{name}/search.json"), &search)?;
        dir.write_json(&format!("{name}/best_spec.json"), &search.best_spec)?;
        dir.write(&format!("{name}/pipeline.json"), pipeline.to_json()? + "\n")?;
        write_evaluation(&mut dir, name, &test)?;
        outcomes.push(TuneOutcome { grid: name.clone(), search, test });
    }
    let mut csv = csv_line(&["grid", "model", "best", "cv_mean", "cv_std", "test_score"].map(String::from));
    let mut txt = format!("{:10} {:>8} {:>8} {:>10}  best\n", "grid", "cv_mean", "cv_std", "test");
    for o in &outcomes {
        let b = o.search.best_point();
        let t = metric.of(&o.test.metrics);
        csv += &csv_line(&[o.grid.clone(), o.search.model.clone(), o.test.spec.clone(), b.mean.to_string(), b.std.to_string(), t.to_string()]);
        txt += &format!("{:10} {:>8.4} {:>8.4} {:>10.4}  {}\n", o.grid, b.mean, b.std, t, o.test.spec);
    }
    dir.write("summary.csv", csv)?;
    dir.write("summary.txt", txt)?;
    Ok((dir.finish(s, vec![s.input()?])?, outcomes))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnsembleOutcome {
    pub comparison: Comparison,
    pub test: Vec<TestEvaluation>,
}

pub fn ensemble(s: &Session) -> Result<(PathBuf, EnsembleOutcome)> {
    let specs = s.cfg.ensemble.specs()?;
    let comparison = run_comparison(s, "ensemble", &specs)?;
    let mut dir = StepDir::create(&s.out, "ensemble")?;
    write_comparison(&mut dir, &comparison)?;
    let metric = s.cfg.cv.metric()?;
    let mut test = Vec::new();
    let mut csv = csv_line(&["model", "spec", "test_score"].map(String::from));
    let mut used: Vec<String> = Vec::new();
    for spec in &specs {
        let (_, e) = evaluate_on_test(s, spec)?;
        let mut sub = e.model.to_ascii_lowercase();
        if used.contains(&sub) {
            sub = format!("{sub}_{}", used.len() + 1);
        }
        used.push(sub.clone());
        write_evaluation(&mut dir, &sub, &e)?;
        csv += &csv_line(&[e.model.clone(), e.spec.clone(), metric.of(&e.metrics).to_string()]);
        test.push(e);
    }
    dir.write("test_scores.csv", csv)?;
    let outcome = EnsembleOutcome { comparison, test };
    Ok((dir.finish(s, vec![s.input()?])?, outcome))
}

/// The importance model: a tuned winner when the configured name matches a
/// tuning grid with results on disk, else the name parsed as a model string.
fn importance_model(s: &Session) -> Result<(ModelSpec, Vec<InputRecord>)> {
    let name = &s.cfg.importance.model;
    if s.cfg.tune.contains_key(name) {
        if let Some((text, record)) = s.read_artifact(&format!("tune/{name}/best_spec.json"))? {
            return Ok((serde_json::from_str(&text)?, vec![record]));
        }
        log("importance", &format!("no tuning results for {name:?}; using its untuned model"));
        let (base, _) = s.cfg.tune[name].resolve()?;
        return Ok((base, Vec::new()));
    }
    Ok((parse_model(name)?, Vec::new()))
}

pub fn importance(s: &Session) -> Result<(PathBuf, Vec<ImportanceReport>)> {
    let (spec, mut inputs) = importance_model(s)?;
    let p = s.prepared()?;
    let stages = s.cfg.preprocess.stage_specs()?;
    let metric = s.cfg.cv.metric()?;
    let mut dir = StepDir::create(&s.out, "importance")?;
    let mut reports = Vec::new();
    for method in s.cfg.importance.methods()? {
        log("importance", &format!("{method:?} on {}", spec.describe()));
        let (stem, report) = match method {
            ImportanceMethod::DropColumn => {
                ("drop_column", drop_column_importance(&spec, &stages, &p.train, &p.test, metric, s.seed())?)
            }
            ImportanceMethod::Permutation => {
                let pipeline = Pipeline::fit(&stages, &spec, &p.train, s.seed())?;
                let r = permutation_importance(&pipeline, &p.test, metric, s.cfg.importance.n_repeats, s.seed())?;
                ("permutation", r)
            }
        };
        for (f, why) in &report.failures {
            log("importance", &format!("{f}: {why}"));
        }
        dir.write(&format!("{stem}.csv"), report.to_csv()?)?;
        dir.write(&format!("{stem}.txt"), format!("{}\n{}", spec.describe(), report.to_text()))?;
        dir.write_json(&format!("{stem}.json"), &report)?;
        reports.push(report);
    }
    inputs.insert(0, s.input()?);
    Ok((dir.finish(s, inputs)?, reports))
}

fn read_if(path: &Path) -> Option<String> {
    fs::read_to_string(path).ok()
}

/// Collects the human-readable tables of every finished step into
/// `report.txt` at the run root.
pub fn report(run: &Path) -> Result<PathBuf> {
    let done: Vec<&str> = STEP_DIRS.iter().copied().filter(|d| run.join(d).join(MANIFEST).is_file()).collect();
    if done.is_empty() {
        return Err(CliError::EmptyRunDir(run.to_path_buf()));
    }
    let mut out = String::new();
    let section = |out: &mut String, title: &str, body: Option<String>| {
        if let Some(b) = body {
            let _ = write!(out, "== {title} ==\n{}\n", b.trim_end());
            out.push('\n');
        }
    };
    for step in done {
        let d = run.join(step);
        match step {
            "eda" => section(&mut out, "column summary", read_if(&d.join("summary.txt"))),
            "preprocess" => section(&mut out, "preprocessing", read_if(&d.join("audit.txt"))),
            "compare" => section(&mut out, "base model comparison (CV)", read_if(&d.join("ranking.txt"))),
            "tune" => {
                section(&mut out, "tuning", read_if(&d.join("summary.txt")));
                for grid in sorted_subdirs(&d)? {
                    section(&mut out, &format!("tuned {grid}: hold-out report"), read_if(&d.join(&grid).join("report.txt")));
                }
            }
            "ensemble" => {
                section(&mut out, "ensemble comparison (CV)", read_if(&d.join("ranking.txt")));
                for m in sorted_subdirs(&d)? {
                    section(&mut out, &format!("{m}: hold-out report"), read_if(&d.join(&m).join("report.txt")));
                }
            }
            "importance" => {
                section(&mut out, "drop-column importance", read_if(&d.join("drop_column.txt")));
                section(&mut out, "permutation importance", read_if(&d.join("permutation.txt")));
            }
            _ => {}
        }
    }
    let path = run.join("report.txt");
    fs::write(&path, out).map_err(|e| CliError::io(&path, e))?;
    log("report", &format!("wrote {}", path.display()));
    Ok(path)
}

fn sorted_subdirs(dir: &Path) -> Result<Vec<String>> {
    let mut names = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| CliError::io(dir, e))? {
        let entry = entry.map_err(|e| CliError::io(dir, e))?;
        if entry.path().is_dir() {
            names.push(entry.file_name().to_string_lossy().into_owned());
        }
    }
    names.sort();
    Ok(names)
}

/// Headline numbers of a `reproduce` run, also written to `summary.json`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReproduceSummary {
    pub n_rows: usize,
    pub class_counts: Vec<(String, usize)>,
    pub pruned: Vec<(String, String, f64)>,
    /// Base-model ranking as (model, mean, std), best first.
    pub compare: Vec<(String, f64, f64)>,
    pub ensemble: Vec<(String, f64, f64)>,
    /// Per tuning grid: (grid, best spec, cv mean, test score).
    pub tuned: Vec<(String, String, f64, f64)>,
    pub importance_top: Option<(String, f64)>,
}

/// synth (when no input is configured), describe, preprocess, compare,
/// tune, ensemble, importance, report.
pub fn reproduce(s: &Session) -> Result<ReproduceSummary> {
    if s.cfg.data.input.is_none() {
        synth(s)?;
    }
    describe(s)?;
    preprocess(s)?;
    let (_, cmp) = compare(s)?;
    let (_, tuned) = tune(s)?;
    let (_, ens) = ensemble(s)?;
    let (_, imp) = importance(s)?;
    report(&s.out)?;

    let data: &Dataset = &s.data()?.0;
    let dist = class_distribution(data)?;
    let metric = s.cfg.cv.metric()?;
    let rows = |c: &Comparison| c.rows.iter().map(|r| (r.model.clone(), r.mean, r.std)).collect::<Vec<_>>();
    let summary = ReproduceSummary {
        n_rows: data.n_rows(),
        class_counts: dist.classes.iter().map(|c| (c.name.clone(), c.count)).collect(),
        pruned: s.prepared()?.selection.removed.iter().map(|p| (p.kept.clone(), p.dropped.clone(), p.r)).collect(),
        compare: rows(&cmp),
        ensemble: rows(&ens.comparison),
        tuned: tuned
            .iter()
            .map(|o| (o.grid.clone(), o.test.spec.clone(), o.search.best_point().mean, metric.of(&o.test.metrics)))
            .collect(),
        importance_top: imp.first().and_then(|r| r.features.first()).map(|f| (f.feature.clone(), f.delta)),
    };
    let path = s.out.join("summary.json");
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    Ok(summary)
}
