use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Monitored {
    ValidationLoss,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EarlyStopConfig {
    pub patience: usize,
    pub min_delta: f64,
    #[serde(default = "default_monitored")]
    pub monitored: Monitored,
}

fn default_monitored() -> Monitored {
    Monitored::ValidationLoss
}

impl Default for EarlyStopConfig {
    fn default() -> Self {
        Self {
            patience: 5,
            min_delta: 1e-4,
            monitored: Monitored::ValidationLoss,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopDecision {
    Continue,
    Stop,
}

/// Stop once `patience` consecutive rounds failed to beat the running best
/// validation loss by more than `min_delta`.
pub fn early_stop_check(val_losses: &[f64], cfg: &EarlyStopConfig) -> StopDecision {
    let Some((&first, rest)) = val_losses.split_first() else {
        return StopDecision::Continue;
    };
    let mut best = first;
    let mut stale = 0usize;
    for &loss in rest {
        if best - loss > cfg.min_delta {
            best = loss;
            stale = 0;
        } else {
            stale += 1;
        }
    }
    if stale >= cfg.patience.max(1) {
        StopDecision::Stop
    } else {
        StopDecision::Continue
    }
}
