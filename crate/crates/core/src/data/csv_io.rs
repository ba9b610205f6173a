use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use ndarray::Array2;

use super::{DataError, Dataset, GroundTruth};
use crate::classify::RelevanceClass;

fn io_err(path: &Path, source: std::io::Error) -> DataError {
    DataError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Reads a comma-separated file with a header row. Every column except
/// `label_column` must be numeric; the label column must hold exactly two
/// distinct values, mapped to `-1` and `+1` in sorted order.
pub fn load_csv(path: impl AsRef<Path>, label_column: &str) -> Result<Dataset, DataError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    read_csv(file, label_column)
}

pub fn read_csv<R: Read>(reader: R, label_column: &str) -> Result<Dataset, DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| DataError::Parse(e.to_string()))?
        .clone();
    let label_idx = headers
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| DataError::Label(format!("label column '{label_column}' not found")))?;
    let names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != label_idx)
        .map(|(_, h)| h.to_string())
        .collect();
    let d = names.len();
    let mut values = Vec::new();
    let mut raw_labels = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| DataError::Parse(e.to_string()))?;
        let line = row + 2;
        for (i, field) in record.iter().enumerate() {
            if i == label_idx {
                raw_labels.push(field.to_string());
                continue;
            }
            let v: f64 = field.parse().map_err(|_| {
                DataError::Parse(format!(
                    "line {line}, column '{}': '{field}' is not a number",
                    headers.get(i).unwrap_or("?")
                ))
            })?;
            if !v.is_finite() {
                return Err(DataError::Parse(format!("line {line}: non-finite value '{field}'")));
            }
            values.push(v);
        }
    }
    let labels = map_labels(&raw_labels)?;
    let n = labels.len();
    let samples = Array2::from_shape_vec((n, d), values)
        .map_err(|e| DataError::Shape(e.to_string()))?;
    Dataset::new(samples, labels, names)
}

fn map_labels(raw: &[String]) -> Result<Vec<f64>, DataError> {
    let mut distinct: Vec<&str> = raw.iter().map(String::as_str).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() != 2 {
        return Err(DataError::Label(format!(
            "expected exactly 2 distinct labels, found {}",
            distinct.len()
        )));
    }
    let numeric: Option<Vec<f64>> = distinct.iter().map(|s| s.parse::<f64>().ok()).collect();
    if let Some(nums) = numeric {
        if nums[1] < nums[0] {
            distinct.swap(0, 1);
        }
    }
    let negative = distinct[0];
    Ok(raw
        .iter()
        .map(|l| if l == negative { -1.0 } else { 1.0 })
        .collect())
}

/// Writes features followed by a `label` column holding `-1`/`1`. Values use
/// shortest round-trip formatting, so reloading reproduces them exactly.
pub fn write_csv<W: Write>(dataset: &Dataset, writer: W) -> Result<(), DataError> {
    let mut wtr = csv::Writer::from_writer(writer);
    let to_err = |e: csv::Error| DataError::Parse(e.to_string());
    let mut header: Vec<&str> = dataset.feature_names().iter().map(String::as_str).collect();
    header.push("label");
    wtr.write_record(&header).map_err(to_err)?;
    for (row, &y) in dataset.samples().rows().into_iter().zip(dataset.labels()) {
        let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        rec.push(if y > 0.0 { "1".into() } else { "-1".into() });
        wtr.write_record(&rec).map_err(to_err)?;
    }
    wtr.flush().map_err(|e| DataError::Parse(e.to_string()))
}

/// One `name,class` line per feature, no header.
pub fn write_ground_truth<W: Write>(
    names: &[String],
    truth: &GroundTruth,
    mut writer: W,
) -> Result<(), DataError> {
    let to_err = |e: std::io::Error| DataError::Parse(e.to_string());
    for (name, class) in names.iter().zip(&truth.classes) {
        writeln!(writer, "{name},{}", class.code()).map_err(to_err)?;
    }
    Ok(())
}

pub fn read_ground_truth<R: Read>(mut reader: R) -> Result<(Vec<String>, GroundTruth), DataError> {
    let mut text = String::new();
    reader
        .read_to_string(&mut text)
        .map_err(|e| DataError::Parse(e.to_string()))?;
    let mut names = Vec::new();
    let mut classes = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let (name, code) = line
            .rsplit_once(',')
            .ok_or_else(|| DataError::Parse(format!("ground truth line {}: missing ','", i + 1)))?;
        let class = code
            .trim()
            .parse::<u8>()
            .ok()
            .and_then(RelevanceClass::from_code)
            .ok_or_else(|| DataError::Parse(format!("ground truth line {}: bad class '{code}'", i + 1)))?;
        names.push(name.to_string());
        classes.push(class);
    }
    Ok((names, GroundTruth { classes }))
}
