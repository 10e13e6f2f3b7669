use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::Dataset;
use crate::error::{Error, Result};

/// Loads a comma-separated file with a header row. Every column except
/// `label_column` must parse as a finite number.
pub fn load_csv(path: impl AsRef<Path>, label_column: &str) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, label_column, None)
}

/// Reads CSV from any reader. `vocab` fixes the class order when given.
pub fn read_csv<R: Read>(reader: R, label_column: &str, vocab: Option<&[String]>) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let label_pos = header
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| Error::MissingColumn(label_column.to_string()))?;
    let names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != label_pos)
        .map(|(_, h)| h.clone())
        .collect();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    let mut labels = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let mut j = 0;
        for (i, cell) in rec.iter().enumerate() {
            if i == label_pos {
                labels.push(cell.to_string());
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row: row + 1,
                column: header[i].clone(),
                value: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row: row + 1,
                    column: header[i].clone(),
                    value: cell.to_string(),
                });
            }
            columns[j].push(v);
            j += 1;
        }
    }
    if labels.is_empty() {
        return Err(Error::Empty);
    }
    Dataset::from_named_labels(names, columns, &labels, vocab)
}

/// Writes the dataset in the same dialect [`load_csv`] reads, label last.
pub fn write_csv<W: Write>(data: &Dataset, writer: W, label_column: &str) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = data.names().iter().map(String::as_str).collect();
    header.push(label_column);
    w.write_record(&header)?;
    let mut record: Vec<String> = Vec::with_capacity(header.len());
    for i in 0..data.n_rows() {
        record.clear();
        for col in data.columns() {
            record.push(col[i].to_string());
        }
        record.push(data.class_vocab()[data.labels()[i]].clone());
        w.write_record(&record)?;
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_row_file() {
        let text = "a,b,label\n1,2,x\n3,4,y\n5,6,x\n";
        let d = read_csv(text.as_bytes(), "label", None).unwrap();
        assert_eq!(d.n_rows(), 3);
        assert_eq!(d.n_features(), 2);
        assert_eq!(d.names(), &["a".to_string(), "b".to_string()]);
        assert_eq!(d.class_vocab(), &["x".to_string(), "y".to_string()]);
        assert_eq!(d.labels(), &[0, 1, 0]);
    }

    #[test]
    fn label_column_may_sit_anywhere() {
        let text = "label,a\nx,1.5\n";
        let d = read_csv(text.as_bytes(), "label", None).unwrap();
        assert_eq!(d.columns()[0], vec![1.5]);
    }

    #[test]
    fn bad_cell_reports_row_and_column() {
        let text = "a,b,label\n1,2,x\n3,abc,y\n";
        match read_csv(text.as_bytes(), "label", None) {
            Err(Error::Parse { row, column, value }) => {
                assert_eq!(row, 2);
                assert_eq!(column, "b");
                assert_eq!(value, "abc");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn missing_label_and_empty_table() {
        let text = "a,b\n1,2\n";
        assert!(matches!(
            read_csv(text.as_bytes(), "label", None),
            Err(Error::MissingColumn(c)) if c == "label"
        ));
        assert!(matches!(
            read_csv("a,label\n".as_bytes(), "label", None),
            Err(Error::Empty)
        ));
        assert!(matches!(
            load_csv("/nonexistent/file.csv", "label"),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn explicit_vocab_wins() {
        let vocab = vec!["y".to_string(), "x".to_string()];
        let d = read_csv("a,label\n1,x\n2,y\n".as_bytes(), "label", Some(&vocab)).unwrap();
        assert_eq!(d.labels(), &[1, 0]);
    }

    #[test]
    fn write_then_read_is_identity() {
        let d = read_csv("a,b,label\n0.1,2,No Loss\n3e-5,4,Severe Loss\n".as_bytes(), "label", None)
            .unwrap();
        let mut buf = Vec::new();
        write_csv(&d, &mut buf, "label").unwrap();
        let back = read_csv(buf.as_slice(), "label", None).unwrap();
        assert_eq!(back, d);
    }
}
