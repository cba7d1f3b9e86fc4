use std::time::Instant;

use log::warn;
use serde::{Deserialize, Serialize};

use super::aggregate::{edge_aggregate, global_aggregate, global_aggregate_weighted};
use super::early_stop::{early_stop_check, EarlyStopConfig, StopDecision};
use super::history::{RoundHistory, RoundRecord};
use super::topology::Topology;
use super::FederationError;
use crate::data::Dataset;
use crate::metrics::evaluate;
use crate::nn::{derive_seed, init_model, train_epochs, BatchSchedule, Hyperparams, LayerSpec, Model, ParamVector};
use crate::transport::{channel, ParamReceiver, ParamSender, ParameterMessage, Role};

/// Take `edge` offline just before the (0-based) round `before_round`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeFailure {
    pub before_round: usize,
    pub edge: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FederationConfig {
    pub specs: Vec<LayerSpec>,
    pub hp: Hyperparams,
    pub itrs: usize,
    pub early_stop: Option<EarlyStopConfig>,
    /// Weight each edge by its client count at the global step.
    pub weighted_aggregation: bool,
    pub model_seed: u64,
    pub shuffle_seed: u64,
    pub edge_failures: Vec<EdgeFailure>,
    /// When false every duration is recorded as 0 and the clock is never read.
    pub record_timing: bool,
    /// Cap on parallel client training; `None` uses every core.
    pub threads: Option<usize>,
}

impl FederationConfig {
    pub fn new(specs: Vec<LayerSpec>, hp: Hyperparams, itrs: usize) -> Self {
        Self {
            specs,
            hp,
            itrs,
            early_stop: Some(EarlyStopConfig::default()),
            weighted_aggregation: false,
            model_seed: 0,
            shuffle_seed: 0,
            edge_failures: Vec::new(),
            record_timing: true,
            threads: None,
        }
    }
}

/// Training rows of every client (indexed by client id) plus the server-side
/// validation and evaluation sets.
#[derive(Debug, Clone, Copy)]
pub struct FederatedData<'a> {
    pub clients: &'a [Dataset],
    pub validation: &'a Dataset,
    pub evaluation: &'a Dataset,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundState {
    /// Completed rounds.
    pub round_index: usize,
    pub global_params: ParamVector,
    pub per_client_params: Vec<ParamVector>,
    pub history: RoundHistory,
}

impl RoundState {
    pub fn new(global: &Model) -> Self {
        Self {
            round_index: 0,
            global_params: global.get_params(),
            per_client_params: Vec::new(),
            history: RoundHistory::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainingOutcome {
    /// Global model of the round with the lowest validation loss.
    pub best_model: Model,
    /// 1-based; 0 when no round ran.
    pub best_round: usize,
    pub final_params: ParamVector,
    pub history: RoundHistory,
    pub topology: Option<Topology>,
    pub train_seconds: f64,
}

/// Shuffle seed of client `client`'s batch schedule.
pub fn client_schedule_seed(shuffle_seed: u64, client: usize) -> u64 {
    derive_seed(shuffle_seed, client as u64)
}

struct Clock(Option<Instant>);

impl Clock {
    fn start(enabled: bool) -> Self {
        Clock(enabled.then(Instant::now))
    }

    fn seconds(&self) -> f64 {
        self.0.map_or(0.0, |t| t.elapsed().as_secs_f64())
    }
}

fn score_global(
    model: &Model,
    data: &FederatedData<'_>,
    hp: &Hyperparams,
) -> Result<(f64, crate::metrics::MetricsReport), FederationError> {
    let val_loss = model.loss(data.validation.samples())?;
    let metrics = evaluate(model, data.evaluation.samples(), hp.classification_threshold)?;
    Ok((val_loss, metrics))
}

struct ClientUpdate {
    loss: f64,
    params: ParamVector,
}

fn train_client(
    client: usize,
    downlink: ParamReceiver,
    uplink: &ParamSender,
    template: &Model,
    shard: &Dataset,
    round: usize,
    cfg: &FederationConfig,
) -> Result<ClientUpdate, FederationError> {
    let msg = downlink.recv()?;
    let mut local = template.clone();
    local.set_params(&ParamVector::new(msg.values, template.layout_digest()))?;
    let schedule = BatchSchedule::starting_at(
        client_schedule_seed(cfg.shuffle_seed, client),
        (round * cfg.hp.local_epochs) as u64,
    );
    let losses = train_epochs(&mut local, shard.samples(), &cfg.hp, schedule)
        .map_err(|source| FederationError::ClientDiverged { client, source })?;
    let params = local.get_params();
    uplink.send(&ParameterMessage::new(
        Role::Client,
        client as u32,
        round as u32,
        params.values().to_vec(),
    ))?;
    Ok(ClientUpdate {
        loss: losses.iter().sum::<f64>() / losses.len() as f64,
        params,
    })
}

fn recv_sorted(rx: &ParamReceiver, count: usize) -> Result<Vec<ParameterMessage>, FederationError> {
    let mut msgs = (0..count).map(|_| rx.recv()).collect::<Result<Vec<_>, _>>()?;
    msgs.sort_by_key(|m| m.sender_id);
    Ok(msgs)
}

/// One synchronous round: broadcast, local training, edge then global
/// aggregation, evaluation. Every parameter exchange is encoded to the wire
/// format and decoded on the receiving side.
pub fn run_round(
    state: &mut RoundState,
    topology: &Topology,
    template: &Model,
    data: &FederatedData<'_>,
    cfg: &FederationConfig,
) -> Result<(), FederationError> {
    let clock = Clock::start(cfg.record_timing);
    let round = state.round_index;
    let n_clients = topology.n_clients();
    if data.clients.len() != n_clients {
        return Err(FederationError::InvalidConfig(format!(
            "{} client datasets for a {n_clients}-client topology",
            data.clients.len()
        )));
    }
    let digest = template.layout_digest();
    if state.global_params.layout_digest() != digest {
        return Err(FederationError::DigestMismatch {
            expected: digest,
            found: state.global_params.layout_digest(),
        });
    }

    // broadcast
    let broadcast = ParameterMessage::new(Role::Global, 0, round as u32, state.global_params.values().to_vec());
    let mut downlinks = Vec::with_capacity(n_clients);
    for _ in 0..n_clients {
        let (tx, rx) = channel();
        tx.send(&broadcast)?;
        downlinks.push(rx);
    }

    // local training, clients feed their edge
    let (edge_tx, edge_rx): (Vec<ParamSender>, Vec<ParamReceiver>) =
        (0..topology.n_edges()).map(|_| channel()).unzip();
    let jobs: Vec<(usize, ParamReceiver)> = downlinks.into_iter().enumerate().collect();
    let run = |(c, rx): (usize, ParamReceiver)| {
        train_client(c, rx, &edge_tx[topology.edge_of(c)], template, &data.clients[c], round, cfg)
    };
    #[cfg(feature = "parallel")]
    let updates: Vec<Result<ClientUpdate, FederationError>> = {
        use rayon::prelude::*;
        jobs.into_par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let updates: Vec<Result<ClientUpdate, FederationError>> = jobs.into_iter().map(run).collect();
    drop(edge_tx);
    let updates = updates.into_iter().collect::<Result<Vec<_>, _>>()?;

    // edge aggregation
    let (global_tx, global_rx) = channel();
    let mut reporting = Vec::new();
    for edge in topology.up_edges() {
        let members = topology.clients_of(edge);
        if members.is_empty() {
            warn!("round {}: edge {edge} has no clients and is left out of the global mean", round + 1);
            continue;
        }
        let msgs = recv_sorted(&edge_rx[edge], members.len())?;
        let params: Vec<ParamVector> = msgs
            .into_iter()
            .map(|m| ParamVector::new(m.values, digest))
            .collect();
        let refs: Vec<&ParamVector> = params.iter().collect();
        let aggregated = edge_aggregate(&refs)?;
        global_tx.send(&ParameterMessage::new(
            Role::Edge,
            edge as u32,
            round as u32,
            aggregated.into_values(),
        ))?;
        reporting.push((edge, members.len()));
    }
    drop(global_tx);

    // global aggregation
    let msgs = recv_sorted(&global_rx, reporting.len())?;
    let edge_params: Vec<ParamVector> = msgs
        .into_iter()
        .map(|m| ParamVector::new(m.values, digest))
        .collect();
    let refs: Vec<&ParamVector> = edge_params.iter().collect();
    let global = if cfg.weighted_aggregation {
        let counts: Vec<usize> = reporting.iter().map(|&(_, m)| m).collect();
        global_aggregate_weighted(&refs, &counts)?
    } else {
        global_aggregate(&refs)?
    };

    let model = template.with_params(&global)?;
    let (val_loss, metrics) = score_global(&model, data, &cfg.hp)?;
    state.global_params = global;
    state.per_client_params = updates.iter().map(|u| u.params.clone()).collect();
    state.round_index += 1;
    state.history.push(RoundRecord {
        round: state.round_index,
        val_loss,
        metrics,
        client_losses: updates.iter().map(|u| u.loss).collect(),
        seconds: clock.seconds(),
    });
    Ok(())
}

fn with_thread_cap<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, FederationError> {
    #[cfg(feature = "parallel")]
    if let Some(n) = threads {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| FederationError::InvalidConfig(format!("thread pool: {e}")))?;
        return Ok(pool.install(f));
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
    Ok(f())
}

struct BestTracker {
    loss: f64,
    round: usize,
    params: ParamVector,
}

impl BestTracker {
    fn offer(&mut self, round: usize, loss: f64, params: &ParamVector) {
        if round == 1 || loss < self.loss {
            self.loss = loss;
            self.round = round;
            self.params = params.clone();
        }
    }
}

/// Hierarchical training: up to `itrs` rounds, stopping early on a
/// validation-loss plateau. Returns the best-validation global model.
pub fn run_training(
    data: &FederatedData<'_>,
    topology: &Topology,
    cfg: &FederationConfig,
) -> Result<TrainingOutcome, FederationError> {
    cfg.hp.validate()?;
    let template = init_model(&cfg.specs, cfg.model_seed)?;
    let clock = Clock::start(cfg.record_timing);
    with_thread_cap(cfg.threads, || {
        let mut topology = topology.clone();
        let mut state = RoundState::new(&template);
        let mut best = BestTracker {
            loss: f64::INFINITY,
            round: 0,
            params: state.global_params.clone(),
        };
        for round in 0..cfg.itrs {
            for failure in cfg.edge_failures.iter().filter(|f| f.before_round == round) {
                topology = topology.handle_edge_failure(failure.edge)?;
            }
            run_round(&mut state, &topology, &template, data, cfg)?;
            let record = state.history.last().expect("round recorded");
            best.offer(record.round, record.val_loss, &state.global_params);
            if let Some(es) = &cfg.early_stop {
                if early_stop_check(&state.history.val_losses(), es) == StopDecision::Stop {
                    break;
                }
            }
        }
        Ok(TrainingOutcome {
            best_model: template.with_params(&best.params)?,
            best_round: best.round,
            final_params: state.global_params,
            history: state.history,
            topology: Some(topology),
            train_seconds: clock.seconds(),
        })
    })?
}

/// Non-federated training with the same round structure: each round runs
/// `local_epochs` epochs on `train`, then scores the model. With
/// `schedule_seed = client_schedule_seed(shuffle_seed, c)` this replays
/// client `c` of a one-client federation exactly.
pub fn train_local(
    train: &Dataset,
    validation: &Dataset,
    evaluation: &Dataset,
    cfg: &FederationConfig,
    schedule_seed: u64,
) -> Result<TrainingOutcome, FederationError> {
    cfg.hp.validate()?;
    let mut model = init_model(&cfg.specs, cfg.model_seed)?;
    let data = FederatedData {
        clients: std::slice::from_ref(train),
        validation,
        evaluation,
    };
    let total = Clock::start(cfg.record_timing);
    let mut history = RoundHistory::default();
    let mut best = BestTracker {
        loss: f64::INFINITY,
        round: 0,
        params: model.get_params(),
    };
    for round in 0..cfg.itrs {
        let clock = Clock::start(cfg.record_timing);
        let schedule = BatchSchedule::starting_at(schedule_seed, (round * cfg.hp.local_epochs) as u64);
        let losses = train_epochs(&mut model, train.samples(), &cfg.hp, schedule)
            .map_err(|source| FederationError::ClientDiverged { client: 0, source })?;
        let (val_loss, metrics) = score_global(&model, &data, &cfg.hp)?;
        history.push(RoundRecord {
            round: round + 1,
            val_loss,
            metrics,
            client_losses: vec![losses.iter().sum::<f64>() / losses.len() as f64],
            seconds: clock.seconds(),
        });
        best.offer(round + 1, val_loss, &model.get_params());
        if let Some(es) = &cfg.early_stop {
            if early_stop_check(&history.val_losses(), es) == StopDecision::Stop {
                break;
            }
        }
    }
    Ok(TrainingOutcome {
        best_model: model.with_params(&best.params)?,
        best_round: best.round,
        final_params: model.get_params(),
        history,
        topology: None,
        train_seconds: total.seconds(),
    })
}
