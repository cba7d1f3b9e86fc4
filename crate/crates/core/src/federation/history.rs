use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::FederationError;
use crate::metrics::MetricsReport;

pub const HISTORY_HEADER: &str = "round,val_loss,accuracy,precision,recall,f1,seconds";

/// Metrics of the global model after one round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    /// 1-based.
    pub round: usize,
    pub val_loss: f64,
    pub metrics: MetricsReport,
    /// Mean training loss of each client over its local epochs, by client id.
    pub client_losses: Vec<f64>,
    pub seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RoundHistory {
    pub records: Vec<RoundRecord>,
}

/// One parsed line of a history CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryRow {
    pub round: usize,
    pub val_loss: f64,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub seconds: f64,
}

impl HistoryRow {
    pub const METRICS: [&'static str; 6] = ["val_loss", "accuracy", "precision", "recall", "f1", "seconds"];

    pub fn metric_values(&self) -> [f64; 6] {
        [
            self.val_loss,
            self.accuracy,
            self.precision,
            self.recall,
            self.f1,
            self.seconds,
        ]
    }
}

impl RoundHistory {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn push(&mut self, record: RoundRecord) {
        debug_assert!(self.records.last().is_none_or(|r| r.round < record.round));
        self.records.push(record);
    }

    pub fn val_losses(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.val_loss).collect()
    }

    pub fn last(&self) -> Option<&RoundRecord> {
        self.records.last()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(HISTORY_HEADER);
        out.push('\n');
        for r in &self.records {
            let m = &r.metrics;
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.round, r.val_loss, m.accuracy, m.precision, m.recall, m.f1, r.seconds
            )
            .expect("writing to a String");
        }
        out
    }

    /// Per-client training losses in long form: `round,client,train_loss`.
    pub fn client_losses_csv(&self) -> String {
        let mut out = String::from("round,client,train_loss\n");
        for r in &self.records {
            for (c, loss) in r.client_losses.iter().enumerate() {
                writeln!(out, "{},{c},{loss}", r.round).expect("writing to a String");
            }
        }
        out
    }
}

pub fn parse_history_csv(text: &str) -> Result<Vec<HistoryRow>, FederationError> {
    let bad = |line: usize, msg: &str| FederationError::HistoryFormat(format!("line {line}: {msg}"));
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == HISTORY_HEADER => {}
        _ => return Err(bad(1, "missing or unexpected header")),
    }
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 7 {
                return Err(bad(i + 1, "expected 7 fields"));
            }
            let num = |k: usize| {
                fields[k]
                    .parse::<f64>()
                    .map_err(|_| bad(i + 1, &format!("not a number: {:?}", fields[k])))
            };
            Ok(HistoryRow {
                round: fields[0]
                    .parse()
                    .map_err(|_| bad(i + 1, "round is not an integer"))?,
                val_loss: num(1)?,
                accuracy: num(2)?,
                precision: num(3)?,
                recall: num(4)?,
                f1: num(5)?,
                seconds: num(6)?,
            })
        })
        .collect()
}
