//! WebAssembly entry points for the browser demo. Each export takes plain
//! numbers and returns a JSON document for the page to draw.

use std::path::PathBuf;

use hfl_core::data::{synth_dataset, ClientSkew, SynthSpec};
use hfl_core::experiment::{
    prepare, run_experiment, DataSource, EarlyStopSection, ExperimentConfig, Mode, RunOutput, Seeds,
};
use hfl_core::nn::Hyperparams;
use serde::Serialize;
use wasm_bindgen::prelude::*;

const N_CLIENTS: usize = 4;
const N_CLUSTERS: usize = 8;

#[derive(Debug, Serialize)]
pub struct Scatter {
    /// `[x, y]` per row.
    pub points: Vec<[f32; 2]>,
    pub labels: Vec<u8>,
    /// Home client of each row.
    pub clients: Vec<u32>,
}

/// Two-feature synthetic traffic, four home clients.
pub fn scatter(n: usize, strength: f64, separation: f64, seed: u64) -> Result<Scatter, String> {
    let mut spec = SynthSpec::new(n, 2, N_CLUSTERS, 0.125, seed);
    spec.separation = separation;
    spec.skew = Some(ClientSkew {
        n_clients: N_CLIENTS,
        strength,
    });
    let ds = synth_dataset(&spec).map_err(|e| e.to_string())?;
    Ok(Scatter {
        points: (0..ds.len()).map(|i| [ds.row(i)[0], ds.row(i)[1]]).collect(),
        labels: ds.labels().to_vec(),
        clients: ds.groups().map(<[u32]>::to_vec).unwrap_or_default(),
    })
}

#[derive(Debug, Serialize)]
pub struct Curve {
    pub label: String,
    /// Test accuracy after each round, in percent.
    pub accuracy: Vec<f64>,
    /// Test accuracy of the best-validation model, in percent.
    pub final_accuracy: f64,
}

fn demo_config(mode: Mode, rounds: usize, strength: f64, n_edges: usize, seed: u64) -> ExperimentConfig {
    let mut spec = SynthSpec::new(6_000, 8, N_CLUSTERS, 0.125, 0);
    spec.skew = Some(ClientSkew {
        n_clients: N_CLIENTS,
        strength,
    });
    ExperimentConfig {
        mode,
        label: None,
        source: DataSource::Synthetic(spec),
        n_clients: N_CLIENTS,
        n_edges,
        hp: Hyperparams {
            learning_rate: 0.05,
            batch_size: 64,
            local_epochs: 1,
            classification_threshold: 0.5,
        },
        hidden: vec![16, 16],
        itrs: rounds,
        early_stop: EarlyStopSection {
            enabled: false,
            ..EarlyStopSection::default()
        },
        weighted_aggregation: false,
        edge_failures: Vec::new(),
        seeds: Seeds {
            data: seed,
            model: seed.wrapping_add(1),
            shuffle: seed.wrapping_add(2),
        },
        train_fraction: 0.9,
        validation_fraction: 0.1,
        sparse_threshold: 0.5,
        // the browser has no monotonic clock for std
        record_timing: false,
        data_dir: PathBuf::new(),
        out_dir: PathBuf::new(),
    }
}

fn curve(run: &RunOutput) -> Curve {
    Curve {
        label: run.manifest.label.clone(),
        accuracy: run
            .history
            .records
            .iter()
            .map(|r| r.metrics.accuracy * 100.0)
            .collect(),
        final_accuracy: run.manifest.metrics.accuracy * 100.0,
    }
}

/// Global HFL model (4 clients, 2 edges) against the four clients trained
/// alone, all scored on the shared test split.
pub fn learning_curves(rounds: usize, strength: f64, seed: u64) -> Result<Vec<Curve>, String> {
    let hfl = demo_config(Mode::Hfl, rounds, strength, 2, seed);
    let prepared = prepare(&hfl).map_err(|e| e.to_string())?;
    let mut curves: Vec<Curve> = run_experiment(&hfl, &prepared, None)
        .map_err(|e| e.to_string())?
        .iter()
        .map(curve)
        .collect();
    let alone = demo_config(Mode::Individual, rounds, strength, 2, seed);
    curves.extend(
        run_experiment(&alone, &prepared, None)
            .map_err(|e| e.to_string())?
            .iter()
            .map(curve),
    );
    Ok(curves)
}

/// Same clients wired to `n_edges` edge servers, averaged three ways: one
/// edge (flat mean), unweighted edge means, and edges weighted by client
/// count.
pub fn aggregation_curves(rounds: usize, n_edges: usize, seed: u64) -> Result<Vec<Curve>, String> {
    let flat = demo_config(Mode::Hfl, rounds, 0.9, 1, seed);
    let prepared = prepare(&flat).map_err(|e| e.to_string())?;
    let unweighted = demo_config(Mode::Hfl, rounds, 0.9, n_edges, seed);
    let mut weighted = unweighted.clone();
    weighted.weighted_aggregation = true;
    let mut out = Vec::new();
    for (label, cfg) in [
        ("flat mean (1 edge)".to_string(), &flat),
        (format!("{n_edges} edges, unweighted"), &unweighted),
        (format!("{n_edges} edges, weighted by clients"), &weighted),
    ] {
        let runs = run_experiment(cfg, &prepared, None).map_err(|e| e.to_string())?;
        let mut c = curve(&runs[0]);
        c.label = label;
        out.push(c);
    }
    Ok(out)
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    r.map(|v| serde_json::to_string(&v).expect("serializable"))
        .map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = scatter)]
pub fn scatter_js(n: usize, strength: f64, separation: f64, seed: u32) -> Result<String, JsError> {
    to_js(scatter(n, strength, separation, u64::from(seed)))
}

#[wasm_bindgen(js_name = learningCurves)]
pub fn learning_curves_js(rounds: usize, strength: f64, seed: u32) -> Result<String, JsError> {
    to_js(learning_curves(rounds, strength, u64::from(seed)))
}

#[wasm_bindgen(js_name = aggregationCurves)]
pub fn aggregation_curves_js(rounds: usize, n_edges: usize, seed: u32) -> Result<String, JsError> {
    to_js(aggregation_curves(rounds, n_edges, u64::from(seed)))
}
