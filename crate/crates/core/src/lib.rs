//! Hierarchical federated learning for binary network anomaly detection.
//!
//! Clients train a dense classifier on their own traffic records, edge
//! servers average the parameters of the clients wired to them, and a global
//! server averages the edge aggregates.

pub mod data;
pub mod experiment;
pub mod federation;
pub mod metrics;
pub mod nn;
pub mod transport;
