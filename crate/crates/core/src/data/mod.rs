//! Tabular ingestion and preprocessing.
//!
//! The pipeline runs `load → drop sparse columns → split → fit encoder on the
//! training rows → encode both splits → partition the training rows across
//! clients`.

mod encode;
mod io;
mod load;
mod split;
mod synth;

use std::path::PathBuf;

use thiserror::Error;

use crate::nn::Samples;

pub use encode::{apply_encoder, fit_encoder, ColumnEncoder, Encoder};
pub use io::{read_dataset, write_dataset, DATASET_MAGIC, DATASET_VERSION};
pub use load::{drop_sparse_columns, load_csv, load_csvs, parse_csv};
pub use split::{
    partition_by_group, partition_clients, partition_sizes, split_sizes, train_test_split,
    ClientShard, Rows, STRATIFICATION_TOLERANCE,
};
pub use synth::{synth_dataset, ClientSkew, SynthSpec};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Csv { path: PathBuf, message: String },
    #[error("label column {0:?} not found in header")]
    MissingLabelColumn(String),
    #[error("duplicate column name {0:?}")]
    DuplicateColumn(String),
    #[error("row {row}: expected {expected} fields, found {found}")]
    Ragged { row: u64, expected: usize, found: usize },
    #[error("row {row}: label not binary ({value:?})")]
    LabelNotBinary { row: u64, value: String },
    #[error("no features remain")]
    NoFeatures,
    #[error("schema error: {0}")]
    Schema(String),
    #[error("need at least {needed} rows, have {found}")]
    TooFewRows { needed: usize, found: usize },
    #[error("class {class} has {count} rows, too few to stratify over {n_clients} clients")]
    ClassTooSmall { class: u8, count: usize, n_clients: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("malformed dataset file: {0}")]
    Format(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Numeric(Vec<Option<f64>>),
    Categorical(Vec<Option<String>>),
}

impl ColumnData {
    pub fn len(&self) -> usize {
        match self {
            ColumnData::Numeric(v) => v.len(),
            ColumnData::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn missing(&self) -> usize {
        match self {
            ColumnData::Numeric(v) => v.iter().filter(|c| c.is_none()).count(),
            ColumnData::Categorical(v) => v.iter().filter(|c| c.is_none()).count(),
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, ColumnData::Numeric(_))
    }

    fn select(&self, idx: &[usize]) -> ColumnData {
        match self {
            ColumnData::Numeric(v) => ColumnData::Numeric(idx.iter().map(|&i| v[i]).collect()),
            ColumnData::Categorical(v) => {
                ColumnData::Categorical(idx.iter().map(|&i| v[i].clone()).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub data: ColumnData,
}

/// Typed feature columns plus the binary label, before encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub columns: Vec<Column>,
    pub labels: Vec<u8>,
    pub label_column: String,
}

impl RawTable {
    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn column_names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }
}

/// Encoded samples: row-major `n × d` features with binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f32>,
    labels: Vec<u8>,
    feature_names: Vec<String>,
    /// Generator-assigned home client of each row (synthetic non-IID data).
    groups: Option<Vec<u32>>,
}

impl Dataset {
    pub fn new(features: Vec<f32>, labels: Vec<u8>, feature_names: Vec<String>) -> Result<Self, DataError> {
        let d = feature_names.len();
        if d == 0 {
            return Err(DataError::NoFeatures);
        }
        if labels.is_empty() {
            return Err(DataError::TooFewRows { needed: 1, found: 0 });
        }
        if features.len() != labels.len() * d {
            return Err(DataError::Schema(format!(
                "{} feature values for {} rows of {d} columns",
                features.len(),
                labels.len()
            )));
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(DataError::Schema(format!(
                "non-finite value at row {}, column {}",
                pos / d,
                pos % d
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&y| y > 1) {
            return Err(DataError::LabelNotBinary {
                row: 0,
                value: bad.to_string(),
            });
        }
        Ok(Self {
            features,
            labels,
            feature_names,
            groups: None,
        })
    }

    pub fn with_groups(mut self, groups: Vec<u32>) -> Result<Self, DataError> {
        if groups.len() != self.labels.len() {
            return Err(DataError::Schema(format!(
                "{} group ids for {} rows",
                groups.len(),
                self.labels.len()
            )));
        }
        self.groups = Some(groups);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.feature_names.len()
    }

    pub fn features(&self) -> &[f32] {
        &self.features
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn groups(&self) -> Option<&[u32]> {
        self.groups.as_deref()
    }

    pub fn row(&self, i: usize) -> &[f32] {
        let d = self.dim();
        &self.features[i * d..(i + 1) * d]
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&y| y == 1).count()
    }

    pub fn pos_ratio(&self) -> f64 {
        self.positives() as f64 / self.len() as f64
    }

    pub fn samples(&self) -> Samples<'_> {
        Samples::new(&self.features, &self.labels, self.dim())
    }

    /// Row-wise concatenation; every part must share the feature names.
    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a Dataset>) -> Result<Dataset, DataError> {
        let mut parts = parts.into_iter();
        let first = parts
            .next()
            .ok_or(DataError::TooFewRows { needed: 1, found: 0 })?;
        let mut out = first.clone();
        for part in parts {
            if part.feature_names != out.feature_names {
                return Err(DataError::Schema("concatenating datasets with different columns".into()));
            }
            out.features.extend_from_slice(&part.features);
            out.labels.extend_from_slice(&part.labels);
            out.groups = match (out.groups.take(), &part.groups) {
                (Some(mut a), Some(b)) => {
                    a.extend_from_slice(b);
                    Some(a)
                }
                _ => None,
            };
        }
        Ok(out)
    }
}
