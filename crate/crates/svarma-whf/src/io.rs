//! File formats. CSV is comma separated with a header row and one row per
//! time index; JSON is pretty printed with struct field order preserved.

use std::fs;
use std::path::Path;

use serde::Serialize;
use svarma_core::model::Dataset;

use crate::error::{CliError, Result};

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    if !path.exists() {
        return Err(CliError::DatasetNotFound(path.display().to_string()));
    }
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_path(path).map_err(|e| csv_error(path, e))?;
    let names: Vec<String> =
        rdr.headers().map_err(|e| csv_error(path, e))?.iter().map(|h| h.trim().to_string()).collect();
    let n = names.len();
    if n == 0 {
        return Err(CliError::invalid_data(path, "no columns"));
    }
    let mut values = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        for (j, field) in rec.iter().enumerate() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| CliError::invalid_data(path, format!("row {}, column {}: {field:?}", i + 1, names[j])))?;
            values.push(v);
        }
    }
    let t = values.len() / n;
    let mut data = Dataset::new(t, n, values).map_err(|e| CliError::invalid_data(path, e.to_string()))?;
    data.names = Some(names);
    Ok(data)
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::invalid_data(path, format!("{other:?}")),
    }
}

/// Write a numeric table. Floats use the shortest representation that round-trips.
pub fn write_table(path: &Path, header: &[String], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.write_record(row.iter().map(|v| v.to_string())).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_dataset(path: &Path, data: &Dataset) -> Result<()> {
    let header = column_names(data);
    write_table(path, &header, (0..data.t).map(|t| data.row(t).to_vec()))
}

pub fn column_names(data: &Dataset) -> Vec<String> {
    data.names.clone().unwrap_or_else(|| (0..data.n).map(|i| format!("y{}", i + 1)).collect())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::InvalidConfig(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    if !path.exists() {
        return Err(CliError::DatasetNotFound(path.display().to_string()));
    }
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::invalid_data(path, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dataset_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let mut d = Dataset::new(3, 2, vec![0.1, -2.0, 1e-17, 3.5, 7.0, 0.3333333333333333]).unwrap();
        d.names = Some(vec!["gdp".into(), "unemployment".into()]);
        write_dataset(&path, &d).unwrap();
        assert_eq!(read_dataset(&path).unwrap(), d);
    }

    #[test]
    fn bad_cell_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        fs::write(&path, "a,b\n1,2\n3,x\n").unwrap();
        let e = read_dataset(&path).unwrap_err();
        assert_eq!(e.code(), "invalid_data");
        assert!(e.to_string().contains("row 2"));
    }
}
