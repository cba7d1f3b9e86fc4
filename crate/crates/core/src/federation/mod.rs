//! Hierarchical federation: clients train locally, edge servers average
//! their clients, the global server averages the edges.

mod aggregate;
mod early_stop;
mod history;
mod round;
mod topology;

use thiserror::Error;

use crate::metrics::MetricsError;
use crate::nn::NnError;
use crate::transport::TransportError;

pub use aggregate::{edge_aggregate, global_aggregate, global_aggregate_weighted};
pub use early_stop::{early_stop_check, EarlyStopConfig, Monitored, StopDecision};
pub use history::{parse_history_csv, HistoryRow, RoundHistory, RoundRecord, HISTORY_HEADER};
pub use round::{
    client_schedule_seed, run_round, run_training, train_local, EdgeFailure, FederatedData,
    FederationConfig, RoundState, TrainingOutcome,
};
pub use topology::{build_topology, EdgeStatus, Topology};

#[derive(Debug, Error)]
pub enum FederationError {
    #[error("nothing to aggregate")]
    EmptyAggregation,
    #[error("parameter layout mismatch: expected {expected:#018x}, found {found:#018x}")]
    DigestMismatch { expected: u64, found: u64 },
    #[error("no edge available")]
    NoEdgeAvailable,
    #[error("invalid federation config: {0}")]
    InvalidConfig(String),
    #[error("client {client}: {source}")]
    ClientDiverged {
        client: usize,
        #[source]
        source: NnError,
    },
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Model(#[from] NnError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("history CSV: {0}")]
    HistoryFormat(String),
}

impl FederationError {
    /// True when a client's local training blew up.
    pub fn is_divergence(&self) -> bool {
        matches!(
            self,
            FederationError::ClientDiverged { .. } | FederationError::Model(NnError::Diverged { .. })
        )
    }
}
