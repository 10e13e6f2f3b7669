//! Classification-report emitters: an aligned text table (two decimals) and
//! a CSV form that keeps full precision and parses back exactly.

use super::metrics::{Average, ClassMetrics, ClassScore};
use crate::error::{Error, Result};

pub const MACRO_ROW: &str = "Macro average";
pub const WEIGHTED_ROW: &str = "Weighted average";
pub const ACCURACY_ROW: &str = "Accuracy";

pub fn classification_report(m: &ClassMetrics) -> String {
    let width = m
        .classes
        .iter()
        .map(|c| c.class.len())
        .chain([WEIGHTED_ROW.len()])
        .max()
        .unwrap_or(0);
    let mut s = format!(
        "{:width$}  {:>9}  {:>9}  {:>9}  {:>9}\n",
        "", "precision", "recall", "f1-score", "support"
    );
    let line = |name: &str, p: f64, r: f64, f: f64, n: usize| {
        format!("{name:width$}  {p:>9.2}  {r:>9.2}  {f:>9.2}  {n:>9}\n")
    };
    for c in &m.classes {
        s += &line(&c.class, c.precision, c.recall, c.f1, c.support);
    }
    s.push('\n');
    let a = &m.macro_avg;
    s += &line(MACRO_ROW, a.precision, a.recall, a.f1, a.support);
    let a = &m.weighted_avg;
    s += &line(WEIGHTED_ROW, a.precision, a.recall, a.f1, a.support);
    s += &format!("{ACCURACY_ROW:width$}  {:>9}  {:>9}  {:>9.2}  {:>9}\n", "", "", m.accuracy, m.total);
    s
}

pub fn report_csv(m: &ClassMetrics) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["row", "precision", "recall", "f1", "support"])?;
    let rec = |name: &str, p: f64, r: f64, f: f64, n: usize| {
        [name.to_string(), p.to_string(), r.to_string(), f.to_string(), n.to_string()]
    };
    for c in &m.classes {
        w.write_record(rec(&c.class, c.precision, c.recall, c.f1, c.support))?;
    }
    let a = &m.macro_avg;
    w.write_record(rec(MACRO_ROW, a.precision, a.recall, a.f1, a.support))?;
    let a = &m.weighted_avg;
    w.write_record(rec(WEIGHTED_ROW, a.precision, a.recall, a.f1, a.support))?;
    w.write_record([ACCURACY_ROW.to_string(), String::new(), String::new(), m.accuracy.to_string(), m.total.to_string()])?;
    let bytes = w.into_inner().map_err(|e| Error::InvalidData(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::InvalidData(e.to_string()))
}

/// Inverse of [`report_csv`]; warnings are not part of the CSV form.
pub fn parse_report_csv(s: &str) -> Result<ClassMetrics> {
    let mut r = csv::Reader::from_reader(s.as_bytes());
    let mut classes = Vec::new();
    let (mut macro_avg, mut weighted_avg, mut acc) = (None, None, None);
    for rec in r.records() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64> {
            rec[i].parse().map_err(|_| Error::InvalidData(format!("bad number {:?} in report", &rec[i])))
        };
        let support: usize = rec[4]
            .parse()
            .map_err(|_| Error::InvalidData(format!("bad support {:?} in report", &rec[4])))?;
        match &rec[0] {
            ACCURACY_ROW => acc = Some((num(3)?, support)),
            name @ (MACRO_ROW | WEIGHTED_ROW) => {
                let a = Average { precision: num(1)?, recall: num(2)?, f1: num(3)?, support };
                if name == MACRO_ROW { macro_avg = Some(a) } else { weighted_avg = Some(a) }
            }
            name => classes.push(ClassScore {
                class: name.to_string(),
                precision: num(1)?,
                recall: num(2)?,
                f1: num(3)?,
                support,
            }),
        }
    }
    let missing = || Error::InvalidData("report is missing aggregate rows".into());
    let (accuracy, total) = acc.ok_or_else(missing)?;
    Ok(ClassMetrics {
        classes,
        macro_avg: macro_avg.ok_or_else(missing)?,
        weighted_avg: weighted_avg.ok_or_else(missing)?,
        accuracy,
        total,
        warnings: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::super::confusion::ConfusionMatrix;
    use super::super::metrics::metrics;
    use super::*;
    use crate::data::SEVERITY_CLASSES;

    fn severity_metrics() -> ClassMetrics {
        let classes: Vec<String> = SEVERITY_CLASSES.iter().map(|s| s.to_string()).collect();
        let counts = vec![
            vec![9850, 10, 0, 0, 0],
            vec![7, 2550, 9, 0, 0],
            vec![0, 11, 559, 2, 0],
            vec![0, 0, 3, 66, 1],
            vec![0, 0, 0, 1, 7],
        ];
        metrics(&ConfusionMatrix { classes, counts }).unwrap()
    }

    #[test]
    fn layout_has_every_row() {
        let m = severity_metrics();
        assert_eq!(m.total, 13076);
        let text = classification_report(&m);
        for row in SEVERITY_CLASSES.iter().chain(&[MACRO_ROW, WEIGHTED_ROW, ACCURACY_ROW]) {
            assert!(text.lines().any(|l| l.starts_with(row)), "missing {row}");
        }
        assert!(text.contains("13076"));
    }

    #[test]
    fn csv_round_trips_exactly() {
        let m = severity_metrics();
        let back = parse_report_csv(&report_csv(&m).unwrap()).unwrap();
        assert_eq!(back, ClassMetrics { warnings: Vec::new(), ..m });
    }

    #[test]
    fn single_class() {
        let cm = ConfusionMatrix { classes: vec!["only".into()], counts: vec![vec![4]] };
        let m = metrics(&cm).unwrap();
        assert_eq!(m.accuracy, m.classes[0].recall);
        assert_eq!(classification_report(&m).lines().filter(|l| l.starts_with("only")).count(), 1);
    }
}
