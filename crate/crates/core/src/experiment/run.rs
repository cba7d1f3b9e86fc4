use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, ExperimentError, Mode, PreparedData, Seeds};
use crate::data::{train_test_split, Dataset};
use crate::federation::{
    build_topology, client_schedule_seed, run_training, train_local, FederatedData, RoundHistory,
    TrainingOutcome,
};
use crate::metrics::{evaluate, MetricsReport};
use crate::nn::{derive_seed, param_count, Model};
use crate::transport::{encode, ParameterMessage, Role};

const VALIDATION_STREAM: u64 = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClientMetrics {
    pub client: usize,
    pub label: String,
    pub rows: usize,
    pub metrics: MetricsReport,
}

/// Everything needed to compare a run with others. Serialized as
/// `manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub label: String,
    pub mode: Mode,
    pub config_hash: String,
    pub config: serde_json::Value,
    pub seeds: Seeds,
    /// Layer widths from input to output.
    pub architecture: Vec<usize>,
    pub param_count: usize,
    pub rounds_run: usize,
    pub best_round: usize,
    pub train_seconds: f64,
    /// Best-validation model on the test split.
    pub metrics: MetricsReport,
    /// Per-client evaluation (each client's validation holdout for hfl).
    #[serde(default)]
    pub client_metrics: Vec<ClientMetrics>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub manifest: RunManifest,
    pub history: RoundHistory,
    pub model: Model,
}

/// Splits each shard into its fitting rows and validation holdout.
pub fn carve_validation(
    prepared: &PreparedData,
    cfg: &ExperimentConfig,
) -> Result<Vec<(Dataset, Dataset)>, ExperimentError> {
    prepared
        .shards
        .iter()
        .enumerate()
        .map(|(k, shard)| {
            let seed = derive_seed(cfg.seeds.data, VALIDATION_STREAM + k as u64);
            Ok(train_test_split(&shard.data, 1.0 - cfg.validation_fraction, seed)?)
        })
        .collect()
}

fn architecture(model: &Model) -> Vec<usize> {
    let specs = model.specs();
    std::iter::once(specs[0].in_dim)
        .chain(specs.iter().map(|s| s.out_dim))
        .collect()
}

fn config_json(cfg: &ExperimentConfig) -> serde_json::Value {
    serde_json::from_str(&cfg.canonical_json()).expect("canonical JSON parses")
}

fn manifest_for(
    cfg: &ExperimentConfig,
    label: String,
    outcome: &TrainingOutcome,
    metrics: MetricsReport,
    client_metrics: Vec<ClientMetrics>,
) -> RunManifest {
    RunManifest {
        label,
        mode: cfg.mode,
        config_hash: cfg.hash(),
        config: config_json(cfg),
        seeds: cfg.seeds,
        architecture: architecture(&outcome.best_model),
        param_count: param_count(&outcome.best_model.specs()),
        rounds_run: outcome.history.len(),
        best_round: outcome.best_round,
        train_seconds: outcome.train_seconds,
        metrics,
        client_metrics,
    }
}

/// Runs the configured mode. Central and hfl yield one run; individual
/// yields one run per client.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    prepared: &PreparedData,
    threads: Option<usize>,
) -> Result<Vec<RunOutput>, ExperimentError> {
    cfg.validate()?;
    if prepared.shards.len() != cfg.n_clients {
        return Err(ExperimentError::Config(format!(
            "prepared data holds {} client shards but n_clients = {}; rerun preprocess",
            prepared.shards.len(),
            cfg.n_clients
        )));
    }
    let parts = carve_validation(prepared, cfg)?;
    let fits: Vec<Dataset> = parts.iter().map(|(f, _)| f.clone()).collect();
    let validation = Dataset::concat(parts.iter().map(|(_, v)| v))?;
    let test = &prepared.test;
    let fed = cfg.federation(test.dim(), threads);
    let threshold = cfg.hp.classification_threshold;
    let fail = |e| ExperimentError::training(e, cfg.hp.local_epochs);

    match cfg.mode {
        Mode::Central => {
            let train = Dataset::concat(&fits)?;
            let outcome = train_local(&train, &validation, test, &fed, client_schedule_seed(cfg.seeds.shuffle, 0))
                .map_err(fail)?;
            let metrics = evaluate(&outcome.best_model, test.samples(), threshold).map_err(|e| fail(e.into()))?;
            let manifest = manifest_for(cfg, cfg.default_label(), &outcome, metrics, Vec::new());
            Ok(vec![RunOutput {
                manifest,
                history: outcome.history,
                model: outcome.best_model,
            }])
        }
        Mode::Individual => parts
            .iter()
            .enumerate()
            .map(|(c, (fit, val))| {
                let outcome =
                    train_local(fit, val, test, &fed, client_schedule_seed(cfg.seeds.shuffle, c)).map_err(fail)?;
                let metrics =
                    evaluate(&outcome.best_model, test.samples(), threshold).map_err(|e| fail(e.into()))?;
                let label = match &cfg.label {
                    Some(l) => format!("{l} (client {})", c + 1),
                    None => format!("Client {} (Individual)", c + 1),
                };
                let manifest = manifest_for(cfg, label, &outcome, metrics, Vec::new());
                Ok(RunOutput {
                    manifest,
                    history: outcome.history,
                    model: outcome.best_model,
                })
            })
            .collect(),
        Mode::Hfl => {
            let topology = build_topology(cfg.n_clients, cfg.n_edges).map_err(|e| ExperimentError::Config(e.to_string()))?;
            let data = FederatedData {
                clients: &fits,
                validation: &validation,
                evaluation: test,
            };
            let outcome = run_training(&data, &topology, &fed).map_err(fail)?;
            let metrics = evaluate(&outcome.best_model, test.samples(), threshold).map_err(|e| fail(e.into()))?;
            let client_metrics = parts
                .iter()
                .enumerate()
                .map(|(c, (_, val))| {
                    Ok(ClientMetrics {
                        client: c,
                        label: format!("Client {} (HFL)", c + 1),
                        rows: val.len(),
                        metrics: evaluate(&outcome.best_model, val.samples(), threshold)
                            .map_err(|e| fail(e.into()))?,
                    })
                })
                .collect::<Result<Vec<_>, ExperimentError>>()?;
            let manifest = manifest_for(cfg, cfg.default_label(), &outcome, metrics, client_metrics);
            Ok(vec![RunOutput {
                manifest,
                history: outcome.history,
                model: outcome.best_model,
            }])
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), ExperimentError> {
    fs::write(path, bytes).map_err(|e| ExperimentError::io(path, e))
}

/// Writes `manifest.json`, `history.csv`, `clients.csv` and `model.hflp`
/// (the best model as a parameter frame) into `dir`.
pub fn write_run(dir: &Path, run: &RunOutput) -> Result<(), ExperimentError> {
    fs::create_dir_all(dir).map_err(|e| ExperimentError::io(dir, e))?;
    let mut json = serde_json::to_string_pretty(&run.manifest).expect("manifest serializes");
    json.push('\n');
    write_file(&dir.join("manifest.json"), json.as_bytes())?;
    write_file(&dir.join("history.csv"), run.history.to_csv().as_bytes())?;
    write_file(&dir.join("clients.csv"), run.history.client_losses_csv().as_bytes())?;
    let frame = encode(&ParameterMessage::new(
        Role::Global,
        0,
        run.manifest.best_round as u32,
        run.model.get_params().into_values(),
    ));
    write_file(&dir.join("model.hflp"), &frame)
}

/// Output directories of a finished experiment: `out` itself, or one
/// `client_{c}` subdirectory per client in individual mode.
pub fn run_dirs(out: &Path, mode: Mode, runs: usize) -> Vec<PathBuf> {
    match mode {
        Mode::Individual => (0..runs).map(|c| out.join(format!("client_{c}"))).collect(),
        _ => vec![out.to_path_buf()],
    }
}

pub fn read_manifest(path: &Path) -> Result<RunManifest, ExperimentError> {
    let text = fs::read_to_string(path).map_err(|e| ExperimentError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| ExperimentError::Manifest {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}
