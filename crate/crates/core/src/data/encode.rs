use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ColumnData, DataError, Dataset, RawTable};

/// Training-split statistics for one feature column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ColumnEncoder {
    /// Ordinal codes in lexicographic category order. Unseen or missing
    /// values map to `categories.len()`.
    Categorical {
        name: String,
        categories: BTreeMap<String, u32>,
    },
    Numeric {
        name: String,
        mean: f64,
        stddev: f64,
        median: f64,
        constant: bool,
    },
}

impl ColumnEncoder {
    pub fn name(&self) -> &str {
        match self {
            ColumnEncoder::Categorical { name, .. } | ColumnEncoder::Numeric { name, .. } => name,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Encoder {
    pub label_column: String,
    pub columns: Vec<ColumnEncoder>,
}

impl Encoder {
    pub fn feature_names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name().to_string()).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("encoder serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, DataError> {
        serde_json::from_str(text).map_err(|e| DataError::Format(format!("encoder: {e}")))
    }
}

fn median(sorted: &[f64]) -> f64 {
    match sorted.len() {
        0 => 0.0,
        n if n % 2 == 1 => sorted[n / 2],
        n => (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0,
    }
}

/// Fits on the training rows only.
pub fn fit_encoder(train: &RawTable) -> Encoder {
    let columns = train
        .columns
        .iter()
        .map(|col| match &col.data {
            ColumnData::Categorical(cells) => {
                let mut names: Vec<&str> = cells.iter().flatten().map(String::as_str).collect();
                names.sort_unstable();
                names.dedup();
                let categories = names
                    .into_iter()
                    .enumerate()
                    .map(|(i, c)| (c.to_string(), i as u32))
                    .collect();
                ColumnEncoder::Categorical {
                    name: col.name.clone(),
                    categories,
                }
            }
            ColumnData::Numeric(cells) => {
                let mut present: Vec<f64> = cells.iter().flatten().copied().collect();
                let n = present.len().max(1) as f64;
                let mean = present.iter().sum::<f64>() / n;
                let var = present.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
                present.sort_by(f64::total_cmp);
                let stddev = var.sqrt();
                ColumnEncoder::Numeric {
                    name: col.name.clone(),
                    mean,
                    stddev,
                    median: median(&present),
                    constant: stddev == 0.0,
                }
            }
        })
        .collect();
    Encoder {
        label_column: train.label_column.clone(),
        columns,
    }
}

pub fn apply_encoder(table: &RawTable, enc: &Encoder) -> Result<Dataset, DataError> {
    let expected = enc.feature_names();
    let found: Vec<String> = table.columns.iter().map(|c| c.name.clone()).collect();
    if expected != found {
        return Err(DataError::Schema(format!(
            "encoder expects columns {expected:?}, table has {found:?}"
        )));
    }
    let n = table.n_rows();
    let d = enc.columns.len();
    let mut features = vec![0.0f32; n * d];
    for (j, (col, ce)) in table.columns.iter().zip(&enc.columns).enumerate() {
        match (&col.data, ce) {
            (ColumnData::Categorical(cells), ColumnEncoder::Categorical { categories, .. }) => {
                let reserved = categories.len() as u32;
                for (i, cell) in cells.iter().enumerate() {
                    let code = cell
                        .as_ref()
                        .and_then(|c| categories.get(c).copied())
                        .unwrap_or(reserved);
                    features[i * d + j] = code as f32;
                }
            }
            (
                ColumnData::Numeric(cells),
                ColumnEncoder::Numeric {
                    mean,
                    stddev,
                    median,
                    constant,
                    ..
                },
            ) => {
                for (i, cell) in cells.iter().enumerate() {
                    let v = cell.unwrap_or(*median);
                    features[i * d + j] = if *constant {
                        0.0
                    } else {
                        ((v - mean) / stddev) as f32
                    };
                }
            }
            _ => {
                return Err(DataError::Schema(format!(
                    "column {:?} changed type since the encoder was fitted",
                    col.name
                )))
            }
        }
    }
    Dataset::new(features, table.labels.clone(), expected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Column;

    fn table(proto: &[&str], num: &[Option<f64>]) -> RawTable {
        RawTable {
            columns: vec![
                Column {
                    name: "proto".into(),
                    data: ColumnData::Categorical(proto.iter().map(|s| Some(s.to_string())).collect()),
                },
                Column { name: "bytes".into(), data: ColumnData::Numeric(num.to_vec()) },
            ],
            labels: vec![0; proto.len()],
            label_column: "label".into(),
        }
    }

    #[test]
    fn lexicographic_codes_and_reserved_index() {
        let train = table(&["tcp", "udp", "arp", "tcp"], &[Some(8.0), Some(12.0), Some(10.0), Some(10.0)]);
        let enc = fit_encoder(&train);
        let ds = apply_encoder(&train, &enc).unwrap();
        let codes: Vec<f32> = (0..4).map(|i| ds.row(i)[0]).collect();
        assert_eq!(codes, vec![1.0, 2.0, 0.0, 1.0]);

        let test = table(&["sctp"], &[Some(14.0)]);
        let ds = apply_encoder(&test, &enc).unwrap();
        assert_eq!(ds.row(0)[0], 3.0);
    }

    #[test]
    fn z_score_and_median_imputation() {
        // mean 10, population std 2
        let train = table(&["a", "a", "a", "a"], &[Some(8.0), Some(12.0), Some(8.0), Some(12.0)]);
        let enc = fit_encoder(&train);
        let test = table(&["a", "a"], &[Some(14.0), None]);
        let ds = apply_encoder(&test, &enc).unwrap();
        assert_eq!(ds.row(0)[1], 2.0);
        assert_eq!(ds.row(1)[1], 0.0);
    }

    #[test]
    fn constant_columns_map_to_zero() {
        let train = table(&["a", "b"], &[Some(3.0), Some(3.0)]);
        let enc = fit_encoder(&train);
        assert!(matches!(enc.columns[1], ColumnEncoder::Numeric { constant: true, .. }));
        let ds = apply_encoder(&table(&["a"], &[Some(100.0)]), &enc).unwrap();
        assert_eq!(ds.row(0)[1], 0.0);
    }

    #[test]
    fn unknown_column_set_is_schema_error() {
        let enc = fit_encoder(&table(&["a"], &[Some(1.0)]));
        let mut other = table(&["a"], &[Some(1.0)]);
        other.columns[1].name = "pkts".into();
        assert!(matches!(apply_encoder(&other, &enc), Err(DataError::Schema(_))));
    }

    #[test]
    fn json_round_trip() {
        let enc = fit_encoder(&table(&["x", "y"], &[Some(1.0), None]));
        assert_eq!(Encoder::from_json(&enc.to_json()).unwrap(), enc);
    }
}
