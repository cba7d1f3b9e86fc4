use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ExperimentError;
use crate::data::SynthSpec;
use crate::federation::{EarlyStopConfig, EdgeFailure, FederationConfig};
use crate::nn::{mlp_spec, Hyperparams, LayerSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Central,
    Individual,
    Hfl,
}

impl std::str::FromStr for Mode {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "central" => Ok(Mode::Central),
            "individual" => Ok(Mode::Individual),
            "hfl" => Ok(Mode::Hfl),
            other => Err(ExperimentError::Config(format!(
                "unknown mode {other:?} (expected central, individual or hfl)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum DataSource {
    Csv {
        paths: Vec<PathBuf>,
        #[serde(default = "default_label_column")]
        label_column: String,
    },
    /// The generator seed is taken from `seeds.data`.
    Synthetic(SynthSpec),
}

fn default_label_column() -> String {
    "label".into()
}

/// Every seed is required; nothing draws from OS entropy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Seeds {
    pub data: u64,
    pub model: u64,
    pub shuffle: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EarlyStopSection {
    #[serde(default = "yes")]
    pub enabled: bool,
    #[serde(default = "default_patience")]
    pub patience: usize,
    #[serde(default = "default_min_delta")]
    pub min_delta: f64,
}

fn default_patience() -> usize {
    EarlyStopConfig::default().patience
}

fn default_min_delta() -> f64 {
    EarlyStopConfig::default().min_delta
}

impl EarlyStopSection {
    pub fn config(&self) -> EarlyStopConfig {
        EarlyStopConfig {
            patience: self.patience,
            min_delta: self.min_delta,
            ..EarlyStopConfig::default()
        }
    }
}

fn yes() -> bool {
    true
}

impl Default for EarlyStopSection {
    fn default() -> Self {
        Self {
            enabled: true,
            patience: default_patience(),
            min_delta: default_min_delta(),
        }
    }
}

fn default_itrs() -> usize {
    50
}

fn default_hidden() -> Vec<usize> {
    vec![256, 256]
}

fn default_train_fraction() -> f64 {
    0.9
}

fn default_validation_fraction() -> f64 {
    0.1
}

fn default_sparse_threshold() -> f64 {
    0.5
}

/// One experiment, read from a TOML document. CLI flags override fields
/// after loading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    #[serde(default)]
    pub label: Option<String>,
    pub source: DataSource,
    pub n_clients: usize,
    #[serde(default = "default_n_edges")]
    pub n_edges: usize,
    #[serde(default)]
    pub hp: Hyperparams,
    #[serde(default = "default_hidden")]
    pub hidden: Vec<usize>,
    #[serde(default = "default_itrs")]
    pub itrs: usize,
    #[serde(default)]
    pub early_stop: EarlyStopSection,
    #[serde(default)]
    pub weighted_aggregation: bool,
    #[serde(default)]
    pub edge_failures: Vec<EdgeFailure>,
    pub seeds: Seeds,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    /// Share of each client's shard held out for validation.
    #[serde(default = "default_validation_fraction")]
    pub validation_fraction: f64,
    #[serde(default = "default_sparse_threshold")]
    pub sparse_threshold: f64,
    #[serde(default = "yes")]
    pub record_timing: bool,
    /// Where `preprocess` writes and `train` reads the prepared data.
    pub data_dir: PathBuf,
    /// Where `train` writes run outputs. Not part of the config hash.
    #[serde(skip_serializing)]
    pub out_dir: PathBuf,
}

fn default_n_edges() -> usize {
    1
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ExperimentError> {
        toml::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))
    }

    /// Relative paths inside the document resolve against its directory.
    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ExperimentError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml_str(&text)
            .map_err(|e| ExperimentError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut cfg.data_dir);
        resolve(&mut cfg.out_dir);
        if let DataSource::Csv { paths, .. } = &mut cfg.source {
            paths.iter_mut().for_each(resolve);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let err = |m: String| Err(ExperimentError::Config(m));
        if self.n_clients == 0 {
            return err("n_clients must be ≥ 1".into());
        }
        if self.mode == Mode::Hfl && self.n_edges == 0 {
            return err("hfl mode needs n_edges ≥ 1".into());
        }
        if self.hidden.contains(&0) {
            return err("hidden layer widths must be ≥ 1".into());
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return err(format!("train_fraction must lie in (0, 1), got {}", self.train_fraction));
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return err(format!(
                "validation_fraction must lie in (0, 1), got {}",
                self.validation_fraction
            ));
        }
        if self.early_stop.enabled && self.early_stop.patience == 0 {
            return err("early_stop.patience must be ≥ 1".into());
        }
        if self.early_stop.min_delta < 0.0 {
            return err("early_stop.min_delta must be ≥ 0".into());
        }
        if let DataSource::Synthetic(spec) = &self.source {
            if let Some(skew) = spec.skew {
                if skew.n_clients != self.n_clients {
                    return err(format!(
                        "synthetic skew is laid out for {} clients but n_clients = {}",
                        skew.n_clients, self.n_clients
                    ));
                }
            }
        }
        if let DataSource::Csv { paths, .. } = &self.source {
            if paths.is_empty() {
                return err("source.csv.paths is empty".into());
            }
        }
        self.hp
            .validate()
            .map_err(|e| ExperimentError::Config(e.to_string()))
    }

    pub fn specs(&self, input_dim: usize) -> Vec<LayerSpec> {
        mlp_spec(input_dim, &self.hidden)
    }

    pub fn federation(&self, input_dim: usize, threads: Option<usize>) -> FederationConfig {
        FederationConfig {
            specs: self.specs(input_dim),
            hp: self.hp,
            itrs: self.itrs,
            early_stop: self.early_stop.enabled.then(|| self.early_stop.config()),
            weighted_aggregation: self.weighted_aggregation,
            model_seed: self.seeds.model,
            shuffle_seed: self.seeds.shuffle,
            edge_failures: self.edge_failures.clone(),
            record_timing: self.record_timing,
            threads,
        }
    }

    pub fn default_label(&self) -> String {
        if let Some(label) = &self.label {
            return label.clone();
        }
        match self.mode {
            Mode::Central => "Centralized ANN".into(),
            Mode::Individual => "Individual".into(),
            Mode::Hfl => format!("{} Clients / {} Edge Servers", self.n_clients, self.n_edges),
        }
    }

    /// Canonical JSON of the config, without the output directory.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical_json().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = r#"
mode = "hfl"
n_clients = 4
n_edges = 2
itrs = 10
hidden = [16]
data_dir = "data"
out_dir = "runs/a"

[source.synthetic]
n = 2000
d = 8
n_clusters = 4
anomaly_fraction = 0.125
seed = 0

[hp]
learning_rate = 0.05
batch_size = 32
local_epochs = 1
classification_threshold = 0.5

[seeds]
data = 1
model = 2
shuffle = 3
"#;

    #[test]
    fn parses_and_validates() {
        let cfg = ExperimentConfig::from_toml_str(DOC).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.mode, Mode::Hfl);
        assert_eq!(cfg.early_stop.patience, 5);
        assert_eq!(cfg.default_label(), "4 Clients / 2 Edge Servers");
        let fed = cfg.federation(8, None);
        assert_eq!(fed.specs.len(), 2);
        assert!(fed.early_stop.is_some());
    }

    #[test]
    fn seeds_are_mandatory() {
        let doc = DOC.replace("[seeds]\ndata = 1\nmodel = 2\nshuffle = 3\n", "");
        assert!(ExperimentConfig::from_toml_str(&doc).is_err());
        let doc = DOC.replace("shuffle = 3\n", "");
        assert!(ExperimentConfig::from_toml_str(&doc).is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        let doc = format!("{DOC}\nbogus = 1\n");
        assert!(ExperimentConfig::from_toml_str(&doc).is_err());
    }

    #[test]
    fn hash_ignores_output_dir_only() {
        let a = ExperimentConfig::from_toml_str(DOC).unwrap();
        let mut b = a.clone();
        b.out_dir = PathBuf::from("elsewhere");
        assert_eq!(a.hash(), b.hash());
        b.seeds.model = 9;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn hfl_needs_edges() {
        let mut cfg = ExperimentConfig::from_toml_str(DOC).unwrap();
        cfg.n_edges = 0;
        assert!(cfg.validate().is_err());
        cfg.mode = Mode::Central;
        assert!(cfg.validate().is_ok());
    }
}
