use std::fs;
use std::path::Path;
use std::process::Command;

use circloss::data::{describe as describe_columns, load_csv};
use circloss::synth::{generate, SynthSpec};
use circloss_cli::commands;
use circloss_cli::config::{parse_model, RosterConfig};
use circloss_cli::session::Manifest;
use circloss_cli::{Config, Session};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_circloss"))
}

fn small_config() -> Config {
    let mut cfg = Config::default();
    cfg.synth.small = true;
    cfg
}

fn session(cfg: Config, out: &Path) -> Session {
    Session::new(cfg, out.to_path_buf()).unwrap()
}

#[test]
fn describe_writes_reports_matching_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin().args(["describe", "--small", "--seed", "4", "--out"]).arg(dir.path()).status().unwrap();
    assert!(status.success());
    let eda = dir.path().join("eda");
    for f in ["summary.csv", "summary.txt", "correlation.csv", "histograms.csv", "class_distribution.json", "manifest.json"] {
        assert!(eda.join(f).is_file(), "{f}");
    }
    let data = generate(&SynthSpec::small(4)).unwrap().data;
    let direct = describe_columns(&data).unwrap();
    let text = fs::read_to_string(eda.join("summary.csv")).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    for (rec, want) in rdr.records().zip(&direct) {
        let rec = rec.unwrap();
        assert_eq!(&rec[0], want.name);
        assert_eq!(rec[2].parse::<f64>().unwrap(), want.mean);
        assert_eq!(rec[7].parse::<f64>().unwrap(), want.q75);
    }
}

#[test]
fn missing_label_column_fails_with_its_name() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("in.csv");
    fs::write(&csv, "a,b,class\n1,2,x\n3,4,y\n").unwrap();
    let out = bin()
        .args(["describe", "--label", "severity", "--input"])
        .arg(&csv)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("severity"), "{err}");
}

#[test]
fn report_on_empty_dir_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().arg("report").arg(dir.path()).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("no workflow outputs"));
}

#[test]
fn out_root_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin().args(["synth", "--small"]).env("CIRCLOSS_OUT", dir.path()).status().unwrap();
    assert!(status.success());
    let reloaded = load_csv(dir.path().join("data/synth.csv"), "severity").unwrap();
    assert_eq!(reloaded, generate(&SynthSpec::small(0)).unwrap().data);
}

#[test]
fn bad_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "[compare]\nmodels = [\"forest\"]\n").unwrap();
    let out = bin().args(["compare", "--small", "--config"]).arg(&cfg).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("forest"));
}

#[test]
fn preprocess_audits_the_duplicate_and_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    commands::preprocess(&session(small_config(), a.path())).unwrap();
    commands::preprocess(&session(small_config(), b.path())).unwrap();
    let audit = fs::read_to_string(a.path().join("preprocess/prune_audit.csv")).unwrap();
    assert!(audit.lines().any(|l| l.starts_with("f01,f01_dup,0.9")), "{audit}");
    for f in ["prune_audit.csv", "data.csv", "train.csv", "test.csv", "split.json", "cap_bounds.json", "manifest.json"] {
        assert_eq!(fs::read(a.path().join("preprocess").join(f)).unwrap(), fs::read(b.path().join("preprocess").join(f)).unwrap(), "{f}");
    }

    let mut cfg = small_config();
    cfg.preprocess.threshold = 1.0;
    let c = tempfile::tempdir().unwrap();
    commands::preprocess(&session(cfg, c.path())).unwrap();
    let audit = fs::read_to_string(c.path().join("preprocess/prune_audit.csv")).unwrap();
    assert_eq!(audit.lines().count(), 1, "{audit}");
}

#[test]
fn manifest_records_inputs_hash_and_files() {
    let dir = tempfile::tempdir().unwrap();
    let s = session(small_config(), dir.path());
    commands::describe(&s).unwrap();
    let m: Manifest = serde_json::from_str(&fs::read_to_string(dir.path().join("eda/manifest.json")).unwrap()).unwrap();
    assert_eq!(m.step, "eda");
    assert_eq!(m.config_sha256, s.cfg.hash().unwrap());
    assert_eq!(m.inputs.len(), 1);
    assert!(m.files.contains_key("summary.csv"));
}

#[test]
fn compare_rosters() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config();
    cfg.compare = RosterConfig { models: vec!["cart".into()] };
    let (_, single) = commands::compare(&session(cfg, dir.path())).unwrap();
    assert_eq!(single.rows.len(), 1);
    let ranking = fs::read_to_string(dir.path().join("compare/ranking.csv")).unwrap();
    assert_eq!(ranking.lines().count(), 2);

    let (_, full) = commands::compare(&session(small_config(), dir.path())).unwrap();
    assert_eq!(full.rows.len(), 6);
    let nb = full.rank_of("NB").unwrap();
    assert!(full.rank_of("CART").unwrap() < nb && full.rank_of("KNN").unwrap() < nb);
}

#[test]
fn ensemble_default_roster_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config();
    cfg.ensemble.models = vec!["bagging(n_estimators=10)".into(), "adaboost(n_estimators=10)".into(), "rf(n_estimators=10)".into(), "gbc(n_estimators=10)".into()];
    let s = session(cfg, dir.path());
    let (_, out) = commands::ensemble(&s).unwrap();
    assert_eq!(out.comparison.rows.len(), 4);
    assert_eq!(Config::default().ensemble.specs().unwrap().len(), 4);
    assert!(dir.path().join("ensemble/rf/confusion.csv").is_file());
    let report = commands::report(dir.path()).unwrap();
    let text = fs::read_to_string(report).unwrap();
    assert!(text.contains("ensemble comparison"));
    assert!(!text.contains("base model comparison"));
}

#[test]
fn importance_reuses_tuned_winner() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config();
    cfg.tune.retain(|k, _| k == "rf");
    cfg.importance.method = "permutation".into();
    cfg.importance.n_repeats = 2;
    let s = session(cfg, dir.path());
    let (_, tuned) = commands::tune(&s).unwrap();
    let (_, reports) = commands::importance(&s).unwrap();
    assert_eq!(reports.len(), 1);
    let m: Manifest = serde_json::from_str(&fs::read_to_string(dir.path().join("importance/manifest.json")).unwrap()).unwrap();
    assert_eq!(m.inputs.len(), 2, "tuned spec recorded as an input");
    let text = fs::read_to_string(dir.path().join("importance/permutation.txt")).unwrap();
    assert!(text.starts_with(&tuned[0].test.spec));
    assert_eq!(parse_model(&tuned[0].test.spec).unwrap(), tuned[0].search.best_spec);
}
