//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::path::PathBuf;
use std::time::Instant;

use hfl_core::data::{
    partition_clients, partition_sizes, split_sizes, train_test_split, ClientSkew, Dataset, SynthSpec,
};
use hfl_core::experiment::{
    prepare, run_experiment, write_run, DataSource, EarlyStopSection, ExperimentConfig, Mode, Seeds,
};
use hfl_core::federation::{
    build_topology, client_schedule_seed, edge_aggregate, global_aggregate, run_training, FederatedData,
    FederationConfig,
};
use hfl_core::metrics::{confusion, f1_score, scores, ConfusionCounts};
use hfl_core::nn::{
    init_model, mlp_spec, train_epochs, BatchSchedule, Hyperparams, LayerSpec, ParamVector, Samples,
};
use hfl_core::transport::{decode, encode, ParameterMessage, Role, TransportError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn dataset_with_labels(labels: Vec<u8>) -> Dataset {
    let features = (0..labels.len()).map(|i| i as f32).collect();
    Dataset::new(features, labels, vec!["id".into()]).unwrap()
}

fn criterion_1() -> Verdict {
    let mut failures = Vec::new();
    let (train, test) = split_sizes(2_540_043, 0.9);
    if (train, test) != (2_286_038, 254_005) {
        failures.push(format!("split_sizes gave {train}/{test}"));
    }

    // Full-size run with an 87.5 : 12.5 class mix, as in each UNSW-NB15 shard.
    let n = 2_540_043usize;
    let positives = n / 8;
    let labels: Vec<u8> = (0..n).map(|i| u8::from(i % 8 == 7)).collect();
    assert_eq!(labels.iter().filter(|&&y| y == 1).count(), positives);
    let full = dataset_with_labels(labels);
    let (tr, te) = train_test_split(&full, 0.9, 0).unwrap();
    if (tr.len(), te.len()) != (2_286_038, 254_005) {
        failures.push(format!("train_test_split gave {}/{}", tr.len(), te.len()));
    }
    let shards = partition_clients(&tr, 4, 0).unwrap();
    let sizes: Vec<usize> = shards.iter().map(|s| s.data.len()).collect();
    if sizes != [571_509; 4] {
        failures.push(format!("partition gave {sizes:?}"));
    }

    // 50 randomized sizes against an integer-arithmetic oracle.
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..50 {
        let n = rng.random_range(50..60_000usize);
        let permille = rng.random_range(500..=950usize);
        let k = rng.random_range(1..=10usize);
        let pos_share = rng.random_range(0.05..0.5);
        let labels: Vec<u8> = (0..n).map(|_| u8::from(rng.random_bool(pos_share))).collect();
        let ds = dataset_with_labels(labels);
        let (tr, te) = train_test_split(&ds, permille as f64 / 1000.0, rng.random()).unwrap();
        let want_train = n * permille / 1000;
        if tr.len() != want_train || te.len() != n - want_train {
            failures.push(format!("n={n} f={permille}‰: {}/{}", tr.len(), te.len()));
            continue;
        }
        let counts = [tr.len() - tr.positives(), tr.positives()];
        if counts.iter().any(|&c| c < k) {
            continue;
        }
        let want_shard = counts[0] / k + counts[1] / k;
        let want_drop = counts[0] % k + counts[1] % k;
        if partition_sizes(&counts, k) != (want_shard, want_drop) {
            failures.push(format!("partition_sizes({counts:?}, {k})"));
        }
        let shards = partition_clients(&tr, k, rng.random()).unwrap();
        if shards.iter().any(|s| s.data.len() != want_shard) {
            failures.push(format!("n={n} k={k}: shard sizes off"));
        }
    }
    verdict(
        failures.is_empty(),
        if failures.is_empty() {
            "2,286,038/254,005 and 4×571,509 exact; 50 randomized sizes follow floor/drop rules".to_string()
        } else {
            failures.join("; ")
        },
    )
}

fn criterion_2() -> Verdict {
    let headline = scores_f1(98.09, 97.18);
    let mut failures = Vec::new();
    if (headline - 97.63).abs() > 0.01 {
        failures.push(format!("Global HFL F1 {headline:.4}"));
    }
    let rows: [(&str, f64, f64, f64); 12] = [
        ("Client 1 (Individual)", 91.89, 91.42, 91.65),
        ("Client 1 (HFL)", 98.46, 97.65, 98.05),
        ("Client 2 (Individual)", 91.63, 92.03, 91.82),
        ("Client 2 (HFL)", 98.5, 97.82, 98.15),
        ("Client 3 (Individual)", 91.58, 92.07, 91.82),
        ("Client 3 (HFL)", 98.58, 97.79, 98.18),
        ("Client 4 (Individual)", 92.03, 91.51, 91.76),
        ("Client 4 (HFL)", 98.57, 97.8, 98.18),
        ("Centralized SVM", 89.10, 88.19, 90.28),
        ("Centralized RF", 87.21, 88.32, 89.11),
        ("Centralized ANN", 90.10, 90.40, 92.15),
        ("Global HFL (ANN)", 98.09, 97.18, 97.63),
    ];
    for (label, p, r, f1) in rows {
        let got = scores_f1(p, r);
        if (got - f1).abs() > 0.03 {
            failures.push(format!("{label}: recomputed {got:.2} vs stated {f1:.2}"));
        }
    }
    verdict(
        failures.is_empty(),
        if failures.is_empty() {
            format!("headline F1 {headline:.2}; all 12 rows within ±0.03")
        } else {
            format!("headline F1 {headline:.4}; {}", failures.join("; "))
        },
    )
}

/// F1 in percent through `scores()`, from counts that realise the given
/// precision and recall to within 1e-6.
fn scores_f1(precision_pct: f64, recall_pct: f64) -> f64 {
    let tp = 1_000_000u64;
    let fp = (tp as f64 * (100.0 / precision_pct - 1.0)).round() as u64;
    let fn_ = (tp as f64 * (100.0 / recall_pct - 1.0)).round() as u64;
    let report = scores(ConfusionCounts { tp, fp, tn: 0, fn_ }, 0.5).unwrap();
    let direct = f1_score(precision_pct / 100.0, recall_pct / 100.0).unwrap() * 100.0;
    assert!((report.f1 * 100.0 - direct).abs() < 1e-3);
    report.f1 * 100.0
}

fn criterion_3() -> Verdict {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let edges = rng.random_range(1..=5usize);
        let per_edge = rng.random_range(1..=5usize);
        let len = rng.random_range(1..=64usize);
        let clients: Vec<ParamVector> = (0..edges * per_edge)
            .map(|_| ParamVector::new((0..len).map(|_| rng.random_range(-10.0f32..10.0)).collect(), 1))
            .collect();
        let mut assignment: Vec<usize> = (0..edges * per_edge).map(|c| c % edges).collect();
        // any equal-size grouping: shuffle the assignment
        for i in (1..assignment.len()).rev() {
            let j = rng.random_range(0..=i);
            assignment.swap(i, j);
        }
        let edge_means: Vec<ParamVector> = (0..edges)
            .map(|e| {
                let members: Vec<&ParamVector> = clients
                    .iter()
                    .zip(&assignment)
                    .filter(|(_, &a)| a == e)
                    .map(|(p, _)| p)
                    .collect();
                edge_aggregate(&members).unwrap()
            })
            .collect();
        let hierarchical = global_aggregate(&edge_means.iter().collect::<Vec<_>>()).unwrap();
        let flat = flat_mean(&clients);
        for (j, (h, f)) in hierarchical.values().iter().zip(&flat).enumerate() {
            let scale = clients.iter().map(|c| c.values()[j].abs() as f64).fold(f64::MIN_POSITIVE, f64::max);
            worst = worst.max((*h as f64 - f).abs() / scale);
        }
    }
    // Unequal groups weight a lone client as heavily as a whole edge.
    let a = ParamVector::new(vec![0.0], 1);
    let b = ParamVector::new(vec![4.0], 1);
    let hier = global_aggregate(&[&edge_aggregate(&[&a]).unwrap(), &edge_aggregate(&[&b, &b, &b]).unwrap()]).unwrap();
    let flat = flat_mean(&[a, b.clone(), b.clone(), b]);
    let counterexample = (hier.values()[0] as f64 - flat[0]).abs() > 0.5;
    let secs = started.elapsed().as_secs_f64();
    verdict(
        worst <= 1e-6 && counterexample && secs < 5.0,
        format!(
            "max relative gap {worst:.2e}; unequal groups {} vs flat {}; {secs:.2}s",
            hier.values()[0],
            flat[0]
        ),
    )
}

fn flat_mean(vs: &[ParamVector]) -> Vec<f64> {
    let mut sum = vec![0.0f64; vs[0].len()];
    for v in vs {
        for (s, x) in sum.iter_mut().zip(v.values()) {
            *s += *x as f64;
        }
    }
    sum.iter().map(|s| s / vs.len() as f64).collect()
}

/// Independent forward pass: ReLU hidden layers, sigmoid head, clamped BCE.
struct Oracle {
    specs: Vec<LayerSpec>,
}

impl Oracle {
    fn pre_activations(&self, params: &[f64], x: &[f64], rows: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut pre = Vec::new();
        let mut probs = Vec::with_capacity(rows);
        for r in 0..rows {
            let mut a: Vec<f64> = x[r * self.specs[0].in_dim..(r + 1) * self.specs[0].in_dim].to_vec();
            let mut offset = 0;
            for (k, s) in self.specs.iter().enumerate() {
                let w = &params[offset..offset + s.in_dim * s.out_dim];
                let b = &params[offset + s.in_dim * s.out_dim..offset + s.in_dim * s.out_dim + s.out_dim];
                offset += s.in_dim * s.out_dim + s.out_dim;
                let z: Vec<f64> = (0..s.out_dim)
                    .map(|o| b[o] + (0..s.in_dim).map(|i| w[o * s.in_dim + i] * a[i]).sum::<f64>())
                    .collect();
                if k + 1 < self.specs.len() {
                    pre.push(z.clone());
                    a = z.iter().map(|v| v.max(0.0)).collect();
                } else {
                    a = z.iter().map(|v| 1.0 / (1.0 + (-v).exp())).collect();
                }
            }
            probs.push(a[0]);
        }
        (pre, probs)
    }

    fn loss(&self, params: &[f64], x: &[f64], y: &[u8]) -> (f64, Vec<Vec<f64>>) {
        let (pre, probs) = self.pre_activations(params, x, y.len());
        let eps = 1e-7;
        let total: f64 = probs
            .iter()
            .zip(y)
            .map(|(&p, &t)| {
                let p = p.clamp(eps, 1.0 - eps);
                if t == 1 {
                    -p.ln()
                } else {
                    -(1.0 - p).ln()
                }
            })
            .sum();
        (total / y.len() as f64, pre)
    }
}

fn criterion_4() -> Verdict {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let h = 1e-4;
    let (mut checked, mut skipped, mut worst) = (0usize, 0usize, 0.0f64);
    let mut failures = Vec::new();
    for net in 0..20 {
        let input = rng.random_range(1..=5usize);
        let hidden: Vec<usize> = (0..rng.random_range(1..=2usize)).map(|_| rng.random_range(1..=5)).collect();
        let specs = mlp_spec(input, &hidden);
        let model = init_model(&specs, rng.random()).unwrap();
        let rows = rng.random_range(1..=10usize);
        let x: Vec<f32> = (0..rows * input).map(|_| rng.random_range(-2.0f32..2.0)).collect();
        let y: Vec<u8> = (0..rows).map(|_| rng.random_range(0..2u8)).collect();
        let grads = model.backward(Samples::new(&x, &y, input)).unwrap();

        let oracle = Oracle { specs: specs.clone() };
        let x64: Vec<f64> = x.iter().map(|&v| v as f64).collect();
        let base: Vec<f64> = model.get_params().values().iter().map(|&v| v as f64).collect();
        for (j, &analytic) in grads.values().iter().enumerate() {
            let mut plus = base.clone();
            plus[j] += h;
            let mut minus = base.clone();
            minus[j] -= h;
            let (lp, pre_p) = oracle.loss(&plus, &x64, &y);
            let (lm, pre_m) = oracle.loss(&minus, &x64, &y);
            let kink = pre_p
                .iter()
                .flatten()
                .zip(pre_m.iter().flatten())
                .any(|(a, b)| (*a > 0.0) != (*b > 0.0));
            if kink {
                skipped += 1;
                continue;
            }
            let numeric = (lp - lm) / (2.0 * h);
            let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-3);
            worst = worst.max(rel);
            checked += 1;
            if rel > 1e-4 {
                failures.push(format!("net {net} param {j}: {analytic} vs {numeric}"));
            }
        }
    }
    let secs = started.elapsed().as_secs_f64();
    let pass = failures.is_empty() && secs < 10.0 && skipped * 20 < checked;
    verdict(
        pass,
        format!(
            "{checked} entries, worst relative error {worst:.2e}, {skipped} skipped at ReLU kinks, {secs:.2}s{}",
            if failures.is_empty() { String::new() } else { format!("; {}", failures.join("; ")) }
        ),
    )
}

fn criterion_5() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let threshold = 0.5;
    let probs: Vec<f32> = (0..10_000)
        .map(|i| match i % 50 {
            0 => 0.5,
            1 => 0.0,
            2 => 1.0,
            _ => rng.random_range(0.0f32..=1.0),
        })
        .collect();
    let labels: Vec<u8> = (0..10_000).map(|_| rng.random_range(0..2u8)).collect();
    let (mut tp, mut fp, mut tn, mut fn_) = (0u64, 0u64, 0u64, 0u64);
    for (p, y) in probs.iter().zip(&labels) {
        let predicted = *p as f64 >= threshold;
        if predicted && *y == 1 {
            tp += 1;
        } else if predicted {
            fp += 1;
        } else if *y == 1 {
            fn_ += 1;
        } else {
            tn += 1;
        }
    }
    let counts = confusion(&probs, &labels, threshold).unwrap();
    let report = scores(counts, threshold).unwrap();
    let acc = (tp + tn) as f64 / 10_000.0;
    let prec = tp as f64 / (tp + fp) as f64;
    let rec = tp as f64 / (tp + fn_) as f64;
    let f1 = 2.0 * prec * rec / (prec + rec);
    let pass = counts == ConfusionCounts { tp, fp, tn, fn_ }
        && report.accuracy == acc
        && report.precision == prec
        && report.recall == rec
        && report.f1 == f1;
    verdict(pass, format!("tp={tp} fp={fp} tn={tn} fn={fn_}, scores identical"))
}

fn small_hp(lr: f64, batch: usize, epochs: usize) -> Hyperparams {
    Hyperparams {
        learning_rate: lr,
        batch_size: batch,
        local_epochs: epochs,
        classification_threshold: 0.5,
    }
}

fn criterion_6() -> Verdict {
    let all = hfl_core::data::synth_dataset(&SynthSpec::new(600, 5, 3, 0.2, 6)).unwrap();
    let (train, holdout) = train_test_split(&all, 0.8, 6).unwrap();
    let mut cfg = FederationConfig::new(mlp_spec(5, &[8, 4]), small_hp(0.05, 16, 2), 5);
    cfg.early_stop = None;
    cfg.record_timing = false;
    cfg.model_seed = 61;
    cfg.shuffle_seed = 62;
    let fed = run_training(
        &FederatedData {
            clients: std::slice::from_ref(&train),
            validation: &holdout,
            evaluation: &holdout,
        },
        &build_topology(1, 1).unwrap(),
        &cfg,
    )
    .unwrap();
    let mut model = init_model(&cfg.specs, cfg.model_seed).unwrap();
    train_epochs(
        &mut model,
        train.samples(),
        &small_hp(0.05, 16, 10),
        BatchSchedule::new(client_schedule_seed(cfg.shuffle_seed, 0)),
    )
    .unwrap();
    let a = fed.final_params.values();
    let b = model.get_params();
    let mismatches = a.iter().zip(b.values()).filter(|(x, y)| x.to_bits() != y.to_bits()).count();
    verdict(
        mismatches == 0 && a.len() == b.len(),
        format!("{} parameters, {mismatches} bit mismatches after 5 rounds × 2 epochs", a.len()),
    )
}

fn criterion_7() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let specials = [0.0f32, -0.0, f32::MIN_POSITIVE / 2.0, -f32::from_bits(1), f32::from_bits(1), f32::MAX, f32::INFINITY, f32::NAN];
    let mut frames = Vec::new();
    let mut bad_round_trips = 0;
    for i in 0..1_000 {
        let len = rng.random_range(0..200usize);
        let mut values: Vec<f32> = (0..len).map(|_| f32::from_bits(rng.random())).collect();
        values.extend(specials.iter().take(i % (specials.len() + 1)));
        let msg = ParameterMessage::new(Role::try_from(rng.random_range(0..3u8)).unwrap(), rng.random(), rng.random(), values);
        let frame = encode(&msg);
        match decode(&frame) {
            Ok(back) if back == msg => {}
            _ => bad_round_trips += 1,
        }
        frames.push(frame);
    }
    let mut accepted = 0;
    let mut via_crc = 0;
    for i in 0..100 {
        let mut frame = frames[i * 7].clone();
        // any bit of the checksummed body or the checksum itself, except
        // version and count, which are validated before the checksum
        let pos = loop {
            let p = rng.random_range(4..frame.len());
            if p != 4 && !(14..22).contains(&p) {
                break p;
            }
        };
        frame[pos] ^= 1 << rng.random_range(0..8);
        match decode(&frame) {
            Ok(_) => accepted += 1,
            Err(TransportError::Checksum { .. }) => via_crc += 1,
            Err(_) => {}
        }
    }
    verdict(
        bad_round_trips == 0 && accepted == 0 && via_crc == 100,
        format!("1000 payloads, {bad_round_trips} mismatches; 100 bit flips, {via_crc} rejected by CRC, {accepted} accepted"),
    )
}

fn trend_config(seed: u64, mode: Mode) -> ExperimentConfig {
    let mut spec = SynthSpec::new(20_000, 16, 8, 0.125, 0);
    spec.skew = Some(ClientSkew { n_clients: 4, strength: 0.9 });
    ExperimentConfig {
        mode,
        label: None,
        source: DataSource::Synthetic(spec),
        n_clients: 4,
        n_edges: 2,
        hp: small_hp(0.05, 64, 1),
        hidden: vec![32, 32],
        itrs: 50,
        early_stop: EarlyStopSection {
            enabled: false,
            ..EarlyStopSection::default()
        },
        weighted_aggregation: false,
        edge_failures: Vec::new(),
        seeds: Seeds {
            data: seed,
            model: seed + 1000,
            shuffle: seed + 2000,
        },
        train_fraction: 0.9,
        validation_fraction: 0.1,
        sparse_threshold: 0.5,
        record_timing: true,
        data_dir: PathBuf::new(),
        out_dir: PathBuf::new(),
    }
}

struct TrendRun {
    hfl_accuracy: f64,
    individual_mean: f64,
    first_round: f64,
    last_round: f64,
}

fn criteria_8_and_9() -> (Verdict, Verdict) {
    let started = Instant::now();
    let mut runs = Vec::new();
    for seed in 1..=5u64 {
        let hfl = trend_config(seed, Mode::Hfl);
        let prepared = prepare(&hfl).unwrap();
        let fed = run_experiment(&hfl, &prepared, None).unwrap().remove(0);
        let individual = run_experiment(&trend_config(seed, Mode::Individual), &prepared, None).unwrap();
        let individual_mean =
            individual.iter().map(|r| r.manifest.metrics.accuracy).sum::<f64>() / individual.len() as f64;
        let records = &fed.history.records;
        runs.push(TrendRun {
            hfl_accuracy: fed.manifest.metrics.accuracy,
            individual_mean,
            first_round: records.first().unwrap().metrics.accuracy,
            last_round: records.last().unwrap().metrics.accuracy,
        });
    }
    let secs = started.elapsed().as_secs_f64();
    let wins = runs.iter().filter(|r| r.hfl_accuracy > r.individual_mean).count();
    let gap = runs.iter().map(|r| r.hfl_accuracy - r.individual_mean).sum::<f64>() / runs.len() as f64 * 100.0;
    let per_seed: Vec<String> = runs
        .iter()
        .map(|r| format!("{:.2}/{:.2}", r.hfl_accuracy * 100.0, r.individual_mean * 100.0))
        .collect();
    let c8 = verdict(
        wins >= 4 && gap >= 2.0 && secs < 120.0,
        format!(
            "HFL beats individual mean in {wins}/5 seeds, mean gap {gap:.2} pp, {secs:.1}s (HFL/individual %: {})",
            per_seed.join(", ")
        ),
    );
    let rising = runs.iter().filter(|r| r.last_round > r.first_round).count();
    let curves: Vec<String> = runs
        .iter()
        .map(|r| format!("{:.2}→{:.2}", r.first_round * 100.0, r.last_round * 100.0))
        .collect();
    let c9 = verdict(
        rising == runs.len(),
        format!("{rising}/5 runs end above round 1 ({})", curves.join(", ")),
    );
    (c8, c9)
}

fn criterion_10() -> Verdict {
    let tmp = tempfile::tempdir().unwrap();
    let mut failures = Vec::new();
    for mode in [Mode::Hfl, Mode::Central, Mode::Individual] {
        let mut cfg = trend_config(42, mode);
        if let DataSource::Synthetic(spec) = &mut cfg.source {
            spec.n = 4_000;
        }
        cfg.itrs = 4;
        cfg.hidden = vec![16];
        cfg.record_timing = false;
        cfg.early_stop.enabled = true;
        let prepared = prepare(&cfg).unwrap();
        let mut outputs = Vec::new();
        for (attempt, threads) in [(0, Some(1)), (1, Some(3)), (2, None)] {
            let runs = run_experiment(&cfg, &prepared, threads).unwrap();
            let mut files = Vec::new();
            for (k, run) in runs.iter().enumerate() {
                let dir = tmp.path().join(format!("{mode:?}_{attempt}_{k}"));
                write_run(&dir, run).unwrap();
                for name in ["history.csv", "manifest.json", "clients.csv", "model.hflp"] {
                    files.push(std::fs::read(dir.join(name)).unwrap());
                }
            }
            outputs.push(files);
        }
        if outputs.windows(2).any(|w| w[0] != w[1]) {
            failures.push(format!("{mode:?}"));
        }
    }
    verdict(
        failures.is_empty(),
        if failures.is_empty() {
            "hfl, central and individual outputs byte-identical across 1, 3 and all threads".to_string()
        } else {
            format!("outputs differ for {}", failures.join(", "))
        },
    )
}

fn criterion_11() -> Option<Verdict> {
    let dir = std::env::var_os("UNSW_NB15_DIR")?;
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)
        .ok()?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    paths.sort();
    let mut cfg = trend_config(0, Mode::Hfl);
    cfg.source = DataSource::Csv {
        paths,
        label_column: "label".into(),
    };
    cfg.hidden = vec![256, 256];
    cfg.hp = small_hp(0.01, 512, 1);
    cfg.early_stop.enabled = true;
    let outcome = prepare(&cfg).and_then(|p| run_experiment(&cfg, &p, None));
    Some(match outcome {
        Ok(mut runs) => {
            let acc = runs.remove(0).manifest.metrics.accuracy * 100.0;
            verdict(acc >= 93.0, format!("global HFL accuracy {acc:.2}% (non-binding)"))
        }
        Err(e) => verdict(false, format!("{e} (non-binding)")),
    })
}

fn main() {
    let mut results: Vec<(&str, Verdict)> = vec![
        ("1 split arithmetic", criterion_1()),
        ("2 F1 consistency", criterion_2()),
        ("3 hierarchical-flat equivalence", criterion_3()),
        ("4 gradient oracle", criterion_4()),
        ("5 metric oracle", criterion_5()),
        ("6 degenerate federation", criterion_6()),
        ("7 codec round-trip", criterion_7()),
    ];
    let (c8, c9) = criteria_8_and_9();
    results.push(("8 scaled-down individual-vs-HFL trend", c8));
    results.push(("9 learning-curve shape", c9));
    results.push(("10 determinism", criterion_10()));

    let mut failed = 0;
    for (name, v) in &results {
        println!("criterion {name}: {} ({})", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        failed += usize::from(!v.pass);
    }
    match criterion_11() {
        Some(v) => println!(
            "criterion 11 full-data stretch: {} ({})",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        ),
        None => println!("criterion 11 full-data stretch: SKIP (set UNSW_NB15_DIR to a directory of labelled CSVs)"),
    }
    println!("{} of {} binding criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
