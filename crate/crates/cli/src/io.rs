use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::Serialize;

use crate::error::{CliError, CliResult};

pub struct Table {
    pub names: Vec<String>,
    pub values: Array2<f64>,
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    CliError::MalformedCsv {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn reader(path: &Path, header: bool) -> CliResult<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(header)
        .trim(csv::Trim::All)
        .from_reader(file))
}

/// Numeric matrix, observations × features. Row and column numbers in
/// errors are 1-based file coordinates.
pub fn read_matrix(path: &Path, header: bool) -> CliResult<Table> {
    let mut rdr = reader(path, header)?;
    let mut names = if header {
        rdr.headers()
            .map_err(|e| csv_err(path, e))?
            .iter()
            .map(str::to_string)
            .collect()
    } else {
        Vec::new()
    };
    let mut flat = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (r, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let line = r + 1 + usize::from(header);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        for (c, cell) in record.iter().enumerate() {
            let v = cell
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::NonNumeric {
                    path: path.to_path_buf(),
                    row: line,
                    column: c + 1,
                    value: cell.to_string(),
                })?;
            flat.push(v);
        }
        cols.get_or_insert(record.len());
        rows += 1;
    }
    let cols = cols.ok_or_else(|| CliError::MalformedCsv {
        path: path.to_path_buf(),
        message: "no data rows".into(),
    })?;
    if names.is_empty() {
        names = (1..=cols).map(|m| format!("V{m}")).collect();
    }
    let values =
        Array2::from_shape_vec((rows, cols), flat).map_err(|e| CliError::MalformedCsv {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
    Ok(Table { names, values })
}

/// All numeric cells of a file in reading order.
pub fn read_numbers(path: &Path) -> CliResult<Vec<f64>> {
    Ok(read_matrix(path, false)?.values.iter().copied().collect())
}

/// Label per row, taken from the last column.
pub fn read_labels(path: &Path, header: bool) -> CliResult<Vec<String>> {
    let mut rdr = reader(path, header)?;
    let mut labels = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_err(path, e))?;
        if let Some(last) = record.iter().next_back() {
            if !(record.len() == 1 && last.is_empty()) {
                labels.push(last.to_string());
            }
        }
    }
    Ok(labels)
}

pub fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|source| CliError::Write {
        path: dir.to_path_buf(),
        source,
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    write_text(path, &text)
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes a header and rows through a single writer.
pub fn write_csv<I, R>(path: &Path, header: &[&str], rows: I) -> CliResult<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let werr = |e: csv::Error| CliError::Write {
        path: path.to_path_buf(),
        source: e.into(),
    };
    let mut w = csv::Writer::from_path(path).map_err(werr)?;
    w.write_record(header).map_err(werr)?;
    for row in rows {
        w.write_record(row.into_iter().collect::<Vec<_>>())
            .map_err(werr)?;
    }
    w.flush().map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}
