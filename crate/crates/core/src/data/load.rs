use std::collections::HashSet;
use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use log::info;

use super::{Column, ColumnData, DataError, RawTable};

struct RawRows {
    header: Vec<String>,
    rows: Vec<(u64, Vec<String>)>,
}

fn read_rows<R: Read>(reader: R, source: &Path) -> Result<RawRows, DataError> {
    let csv_err = |e: csv::Error| DataError::Csv {
        path: source.to_path_buf(),
        message: e.to_string(),
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if header.is_empty() || header.iter().all(|h| h.is_empty()) {
        return Err(DataError::Csv {
            path: source.to_path_buf(),
            message: "missing header row".into(),
        });
    }
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != header.len() {
            return Err(DataError::Ragged {
                row: line,
                expected: header.len(),
                found: record.len(),
            });
        }
        rows.push((line, record.iter().map(|c| c.trim().to_string()).collect()));
    }
    Ok(RawRows { header, rows })
}

fn parse_label(cell: &str, row: u64) -> Result<u8, DataError> {
    match cell.parse::<f64>() {
        Ok(0.0) => Ok(0),
        Ok(1.0) => Ok(1),
        _ => Err(DataError::LabelNotBinary {
            row,
            value: cell.to_string(),
        }),
    }
}

fn parse_number(cell: &str) -> Option<f64> {
    cell.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn build_table(raw: RawRows, label_column: &str) -> Result<RawTable, DataError> {
    let mut seen = HashSet::new();
    for name in &raw.header {
        if !seen.insert(name.as_str()) {
            return Err(DataError::DuplicateColumn(name.clone()));
        }
    }
    let label_idx = raw
        .header
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| DataError::MissingLabelColumn(label_column.to_string()))?;

    let labels = raw
        .rows
        .iter()
        .map(|(line, cells)| parse_label(&cells[label_idx], *line))
        .collect::<Result<Vec<u8>, _>>()?;

    let columns = raw
        .header
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != label_idx)
        .map(|(j, name)| {
            let cells = raw.rows.iter().map(|(_, r)| r[j].as_str());
            let numeric = cells
                .clone()
                .filter(|c| !c.is_empty())
                .all(|c| parse_number(c).is_some());
            let data = if numeric {
                ColumnData::Numeric(cells.map(parse_number).collect())
            } else {
                ColumnData::Categorical(
                    cells
                        .map(|c| (!c.is_empty()).then(|| c.to_string()))
                        .collect(),
                )
            };
            Column {
                name: name.clone(),
                data,
            }
        })
        .collect();

    Ok(RawTable {
        columns,
        labels,
        label_column: label_column.to_string(),
    })
}

/// Parses CSV text from any reader; `source` only labels error messages.
pub fn parse_csv<R: Read>(reader: R, source: &Path, label_column: &str) -> Result<RawTable, DataError> {
    build_table(read_rows(reader, source)?, label_column)
}

pub fn load_csv(path: impl AsRef<Path>, label_column: &str) -> Result<RawTable, DataError> {
    load_csvs(&[path.as_ref().to_path_buf()], label_column)
}

/// Loads several CSV files sharing one header as a single table. Column types
/// are inferred over the union of all rows.
pub fn load_csvs(paths: &[PathBuf], label_column: &str) -> Result<RawTable, DataError> {
    let mut merged: Option<RawRows> = None;
    for path in paths {
        let file = File::open(path).map_err(|source| DataError::Io {
            path: path.clone(),
            source,
        })?;
        let part = read_rows(file, path)?;
        match &mut merged {
            None => merged = Some(part),
            Some(acc) => {
                if acc.header != part.header {
                    return Err(DataError::Csv {
                        path: path.clone(),
                        message: "header differs from the first file".into(),
                    });
                }
                acc.rows.extend(part.rows);
            }
        }
    }
    let merged = merged.ok_or_else(|| DataError::InvalidParameter("no CSV paths given".into()))?;
    build_table(merged, label_column)
}

/// Drops every feature column whose missing fraction is strictly greater
/// than `threshold`.
pub fn drop_sparse_columns(table: RawTable, threshold: f64) -> Result<RawTable, DataError> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(DataError::InvalidParameter(format!(
            "sparse-column threshold must lie in (0, 1], got {threshold}"
        )));
    }
    let n = table.n_rows().max(1) as f64;
    let (kept, dropped): (Vec<Column>, Vec<Column>) = table
        .columns
        .into_iter()
        .partition(|c| (c.data.missing() as f64 / n) <= threshold);
    if !dropped.is_empty() {
        let names: Vec<&str> = dropped.iter().map(|c| c.name.as_str()).collect();
        info!("dropped {} sparse column(s): {}", names.len(), names.join(", "));
    }
    if kept.is_empty() {
        return Err(DataError::NoFeatures);
    }
    Ok(RawTable {
        columns: kept,
        labels: table.labels,
        label_column: table.label_column,
    })
}
