//! CSV rows and artifact paths.

use std::path::{Path, PathBuf};

use crate::config::CliResult;

pub const HEADER: [&str; 7] = ["experiment", "matrix", "method", "n", "pad", "metric", "value"];

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub experiment: &'static str,
    pub matrix: String,
    pub method: String,
    pub n: usize,
    pub pad: usize,
    pub metric: String,
    pub value: f64,
}

/// Writes `DIR/{experiment}.csv`; values keep full precision.
pub fn write_csv(dir: &Path, experiment: &str, rows: &[Row]) -> CliResult<PathBuf> {
    let path = dir.join(format!("{experiment}.csv"));
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record([
            r.experiment.to_string(),
            r.matrix.clone(),
            r.method.clone(),
            r.n.to_string(),
            r.pad.to_string(),
            r.metric.clone(),
            format!("{:.17e}", r.value),
        ])?;
    }
    w.flush()?;
    Ok(path)
}

/// File-name-safe form of a matrix label such as `paper:A1`.
pub fn slug(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_round_trip_through_csv() {
        let dir = tempfile::tempdir().unwrap();
        let row = Row {
            experiment: "accuracy-sweep",
            matrix: "paper:A1".into(),
            method: "ha".into(),
            n: 100,
            pad: 5,
            metric: "nmse_acc".into(),
            value: 1.0 / 3.0,
        };
        let path = write_csv(dir.path(), "accuracy-sweep", &[row]).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), HEADER.join(","));
        let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(&fields[..6], &["accuracy-sweep", "paper:A1", "ha", "100", "5", "nmse_acc"]);
        assert_eq!(fields[6].parse::<f64>().unwrap(), 1.0 / 3.0);
    }

    #[test]
    fn slugs_are_path_safe() {
        assert_eq!(slug("paper:A1:raw"), "paper_A1_raw");
        assert_eq!(slug("file:/tmp/m.txt"), "file__tmp_m_txt");
    }
}
