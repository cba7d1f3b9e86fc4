//! Config-driven experiment harness: preprocessing, the three training
//! modes, run manifests, comparison tables and learning-curve exports.

mod config;
mod pipeline;
mod report;
mod run;

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::data::DataError;
use crate::federation::FederationError;
use crate::nn::NnError;

pub use config::{DataSource, EarlyStopSection, ExperimentConfig, Mode, Seeds};
pub use pipeline::{load_prepared, prepare, PreparedData, ShardSummary, SplitManifest};
pub use report::{
    cmd_compare, cmd_curves, curve_run_name, ComparisonRow, ComparisonTable, COMPARISON_HEADER, CURVES_HEADER,
};
pub use run::{
    carve_validation, read_manifest, run_dirs, run_experiment, write_run, ClientMetrics, RunManifest, RunOutput,
};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Manifest { path: PathBuf, message: String },
    #[error("{0}")]
    Diverged(String),
    #[error(transparent)]
    Training(FederationError),
}

impl ExperimentError {
    /// 1 for usage or config problems, 2 for data problems, 3 when
    /// training diverged.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Config(_) => 1,
            ExperimentError::Diverged(_) => 3,
            ExperimentError::Training(e) if e.is_divergence() => 3,
            ExperimentError::Training(FederationError::InvalidConfig(_)) => 1,
            _ => 2,
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        ExperimentError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

impl From<FederationError> for ExperimentError {
    fn from(e: FederationError) -> Self {
        ExperimentError::Training(e)
    }
}

impl ExperimentError {
    /// Adds the round in which a client diverged.
    pub(crate) fn training(e: FederationError, local_epochs: usize) -> Self {
        match e {
            FederationError::ClientDiverged {
                client,
                source: NnError::Diverged { epoch, batch },
            } => ExperimentError::Diverged(format!(
                "training diverged in round {}: client {client}, local epoch {}, batch {batch}",
                epoch / local_epochs.max(1) + 1,
                epoch % local_epochs.max(1) + 1,
            )),
            other => ExperimentError::Training(other),
        }
    }
}
