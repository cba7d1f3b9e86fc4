use std::fs;
use std::path::Path;

use log::info;
use serde::{Deserialize, Serialize};

use super::{DataSource, ExperimentConfig, ExperimentError};
use crate::data::{
    apply_encoder, drop_sparse_columns, fit_encoder, load_csvs, partition_by_group, partition_clients,
    read_dataset, synth_dataset, train_test_split, write_dataset, ClientShard, DataError, Dataset, Encoder,
};
use crate::nn::derive_seed;

const SPLIT_STREAM: u64 = 1;
const PARTITION_STREAM: u64 = 3;

pub const SPLIT_MANIFEST: &str = "split_manifest.json";
pub const ENCODER_FILE: &str = "encoder.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShardSummary {
    pub client: u32,
    pub rows: usize,
    pub positives: usize,
    pub pos_ratio: f64,
}

/// What preprocessing did, written next to the prepared data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub source: String,
    pub total_rows: usize,
    pub dropped_columns: Vec<String>,
    pub feature_names: Vec<String>,
    pub train_rows: usize,
    pub test_rows: usize,
    pub train_pos_ratio: f64,
    pub test_pos_ratio: f64,
    /// `stratified` or `group`.
    pub partition: String,
    pub partition_dropped: usize,
    pub shards: Vec<ShardSummary>,
}

#[derive(Debug, Clone)]
pub struct PreparedData {
    pub train: Dataset,
    pub test: Dataset,
    pub shards: Vec<ClientShard>,
    pub encoder: Option<Encoder>,
    pub manifest: SplitManifest,
}

fn shard_summary(shard: &ClientShard) -> ShardSummary {
    ShardSummary {
        client: shard.client_id,
        rows: shard.data.len(),
        positives: shard.data.positives(),
        pos_ratio: shard.pos_ratio,
    }
}

/// Load or generate the data, split, encode and partition it in memory.
pub fn prepare(cfg: &ExperimentConfig) -> Result<PreparedData, ExperimentError> {
    let split_seed = derive_seed(cfg.seeds.data, SPLIT_STREAM);
    let (source, total_rows, dropped_columns, train, test, encoder) = match &cfg.source {
        DataSource::Csv { paths, label_column } => {
            let raw = load_csvs(paths, label_column)?;
            let total = raw.n_rows();
            let before: Vec<String> = raw.column_names().iter().map(|s| s.to_string()).collect();
            let kept = drop_sparse_columns(raw, cfg.sparse_threshold)?;
            let dropped = before
                .into_iter()
                .filter(|name| kept.column(name).is_none())
                .collect();
            let (train_raw, test_raw) = train_test_split(&kept, cfg.train_fraction, split_seed)?;
            let encoder = fit_encoder(&train_raw);
            let train = apply_encoder(&train_raw, &encoder)?;
            let test = apply_encoder(&test_raw, &encoder)?;
            ("csv", total, dropped, train, test, Some(encoder))
        }
        DataSource::Synthetic(spec) => {
            let mut spec = spec.clone();
            spec.seed = cfg.seeds.data;
            let all = synth_dataset(&spec)?;
            let total = all.len();
            let (train, test) = train_test_split(&all, cfg.train_fraction, split_seed)?;
            ("synthetic", total, Vec::new(), train, test, None)
        }
    };

    let partition_seed = derive_seed(cfg.seeds.data, PARTITION_STREAM);
    let (partition, shards) = if train.groups().is_some() {
        ("group", partition_by_group(&train, cfg.n_clients, partition_seed)?)
    } else {
        ("stratified", partition_clients(&train, cfg.n_clients, partition_seed)?)
    };
    let assigned: usize = shards.iter().map(|s| s.data.len()).sum();
    let manifest = SplitManifest {
        source: source.into(),
        total_rows,
        dropped_columns,
        feature_names: train.feature_names().to_vec(),
        train_rows: train.len(),
        test_rows: test.len(),
        train_pos_ratio: train.pos_ratio(),
        test_pos_ratio: test.pos_ratio(),
        partition: partition.into(),
        partition_dropped: train.len() - assigned,
        shards: shards.iter().map(shard_summary).collect(),
    };
    info!(
        "prepared {} rows: {} train / {} test, {} shards of {} rows",
        total_rows,
        manifest.train_rows,
        manifest.test_rows,
        shards.len(),
        shards.first().map_or(0, |s| s.data.len())
    );
    Ok(PreparedData {
        train,
        test,
        shards,
        encoder,
        manifest,
    })
}

fn shard_file(k: usize) -> String {
    format!("client_{k}.hfld")
}

fn write_text(path: &Path, text: &str) -> Result<(), ExperimentError> {
    fs::write(path, text).map_err(|e| ExperimentError::io(path, e))
}

impl PreparedData {
    /// Writes `train.hfld`, `test.hfld`, one `client_{k}.hfld` per shard, the
    /// split manifest and, for CSV sources, the fitted encoder.
    pub fn persist(&self, dir: &Path) -> Result<(), ExperimentError> {
        fs::create_dir_all(dir).map_err(|e| ExperimentError::io(dir, e))?;
        write_dataset(dir.join("train.hfld"), &self.train)?;
        write_dataset(dir.join("test.hfld"), &self.test)?;
        for (k, shard) in self.shards.iter().enumerate() {
            write_dataset(dir.join(shard_file(k)), &shard.data)?;
        }
        if let Some(enc) = &self.encoder {
            write_text(&dir.join(ENCODER_FILE), &enc.to_json())?;
        }
        let json = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        write_text(&dir.join(SPLIT_MANIFEST), &json)
    }
}

/// Reads back what [`PreparedData::persist`] wrote.
pub fn load_prepared(dir: &Path) -> Result<PreparedData, ExperimentError> {
    let manifest_path = dir.join(SPLIT_MANIFEST);
    let text = fs::read_to_string(&manifest_path).map_err(|e| ExperimentError::io(&manifest_path, e))?;
    let manifest: SplitManifest = serde_json::from_str(&text).map_err(|e| ExperimentError::Manifest {
        path: manifest_path.clone(),
        message: e.to_string(),
    })?;
    let names = || Some(manifest.feature_names.clone());
    let train = read_dataset(dir.join("train.hfld"), names())?;
    let test = read_dataset(dir.join("test.hfld"), names())?;
    let mut shards = Vec::with_capacity(manifest.shards.len());
    for (k, summary) in manifest.shards.iter().enumerate() {
        let data = read_dataset(dir.join(shard_file(k)), names())?;
        if data.len() != summary.rows {
            return Err(DataError::Format(format!(
                "{}: {} rows, manifest says {}",
                shard_file(k),
                data.len(),
                summary.rows
            ))
            .into());
        }
        shards.push(ClientShard {
            client_id: summary.client,
            pos_ratio: data.pos_ratio(),
            data,
        });
    }
    let encoder_path = dir.join(ENCODER_FILE);
    let encoder = if encoder_path.exists() {
        let text = fs::read_to_string(&encoder_path).map_err(|e| ExperimentError::io(&encoder_path, e))?;
        Some(Encoder::from_json(&text)?)
    } else {
        None
    };
    Ok(PreparedData {
        train,
        test,
        shards,
        encoder,
        manifest,
    })
}
