use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{DataError, Dataset};

/// Skews which clusters each client's rows come from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClientSkew {
    pub n_clients: usize,
    /// Probability that a row is drawn from one of its home client's clusters
    /// instead of uniformly from all clusters.
    pub strength: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub n: usize,
    pub d: usize,
    pub n_clusters: usize,
    pub anomaly_fraction: f64,
    #[serde(default)]
    pub label_noise: f64,
    /// Distance between a normal cluster centre and its anomaly twin.
    #[serde(default = "default_separation")]
    pub separation: f64,
    #[serde(default)]
    pub skew: Option<ClientSkew>,
    #[serde(default)]
    pub seed: u64,
}

fn default_separation() -> f64 {
    4.0
}

impl SynthSpec {
    pub fn new(n: usize, d: usize, n_clusters: usize, anomaly_fraction: f64, seed: u64) -> Self {
        Self {
            n,
            d,
            n_clusters,
            anomaly_fraction,
            label_noise: 0.0,
            separation: default_separation(),
            skew: None,
            seed,
        }
    }
}

const CENTRE_SPREAD: f64 = 3.0;
const NORMAL_SCALE: f64 = 1.0;
const ANOMALY_SCALE: f64 = 1.5;

/// Gaussian clusters of normal traffic, each paired with a shifted, wider
/// anomaly cluster. With `skew`, rows also carry a home-client group id.
pub fn synth_dataset(spec: &SynthSpec) -> Result<Dataset, DataError> {
    let invalid = |m: String| Err(DataError::InvalidParameter(m));
    if spec.n_clusters < 1 {
        return invalid("n_clusters must be ≥ 1".into());
    }
    if spec.d < 2 {
        return invalid(format!("d must be ≥ 2, got {}", spec.d));
    }
    if spec.n < 1 {
        return invalid("n must be ≥ 1".into());
    }
    if !(spec.anomaly_fraction > 0.0 && spec.anomaly_fraction < 1.0) {
        return invalid(format!("anomaly_fraction must lie in (0, 1), got {}", spec.anomaly_fraction));
    }
    if !(0.0..=1.0).contains(&spec.label_noise) {
        return invalid(format!("label_noise must lie in [0, 1], got {}", spec.label_noise));
    }
    if let Some(skew) = spec.skew {
        if skew.n_clients < 1 || skew.n_clients > spec.n_clusters {
            return invalid(format!(
                "client skew needs 1 ≤ n_clients ≤ n_clusters, got {} clients for {} clusters",
                skew.n_clients, spec.n_clusters
            ));
        }
        if !(0.0..=1.0).contains(&skew.strength) {
            return invalid(format!("skew strength must lie in [0, 1], got {}", skew.strength));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let centre = Normal::new(0.0, CENTRE_SPREAD).expect("valid spread");
    let normal_centres: Vec<Vec<f64>> = (0..spec.n_clusters)
        .map(|_| (0..spec.d).map(|_| centre.sample(&mut rng)).collect())
        .collect();
    let anomaly_centres: Vec<Vec<f64>> = normal_centres
        .iter()
        .map(|c| {
            let dir: Vec<f64> = (0..spec.d).map(|_| rng.sample(StandardNormal)).collect();
            let norm = dir.iter().map(|v: &f64| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
            c.iter().zip(&dir).map(|(c, u)| c + spec.separation * u / norm).collect()
        })
        .collect();

    let mut features = Vec::with_capacity(spec.n * spec.d);
    let mut labels = Vec::with_capacity(spec.n);
    let mut groups = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let anomalous = rng.random_bool(spec.anomaly_fraction);
        let cluster = match spec.skew {
            Some(skew) => {
                let home = rng.random_range(0..skew.n_clients);
                groups.push(home as u32);
                if rng.random_bool(skew.strength) {
                    let owned = (spec.n_clusters - home).div_ceil(skew.n_clients);
                    home + skew.n_clients * rng.random_range(0..owned)
                } else {
                    rng.random_range(0..spec.n_clusters)
                }
            }
            None => rng.random_range(0..spec.n_clusters),
        };
        let (centre, scale) = if anomalous {
            (&anomaly_centres[cluster], ANOMALY_SCALE)
        } else {
            (&normal_centres[cluster], NORMAL_SCALE)
        };
        for &c in centre {
            let z: f64 = rng.sample(StandardNormal);
            features.push((c + scale * z) as f32);
        }
        let flip = spec.label_noise > 0.0 && rng.random_bool(spec.label_noise);
        labels.push(u8::from(anomalous != flip));
    }
    let names = (0..spec.d).map(|j| format!("f{j}")).collect();
    let ds = Dataset::new(features, labels, names)?;
    if spec.skew.is_some() {
        ds.with_groups(groups)
    } else {
        Ok(ds)
    }
}
