use log::warn;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Column, DataError, Dataset, RawTable};
use crate::nn::derive_seed;

/// Largest allowed gap between a shard's positive ratio and its parent's.
pub const STRATIFICATION_TOLERANCE: f64 = 0.005;

/// Row selection shared by raw and encoded tables.
pub trait Rows: Sized {
    fn n_rows(&self) -> usize;
    fn select(&self, idx: &[usize]) -> Self;
    fn labels(&self) -> &[u8];
}

impl Rows for RawTable {
    fn n_rows(&self) -> usize {
        self.labels.len()
    }

    fn select(&self, idx: &[usize]) -> Self {
        RawTable {
            columns: self
                .columns
                .iter()
                .map(|c| Column {
                    name: c.name.clone(),
                    data: c.data.select(idx),
                })
                .collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            label_column: self.label_column.clone(),
        }
    }

    fn labels(&self) -> &[u8] {
        &self.labels
    }
}

impl Rows for Dataset {
    fn n_rows(&self) -> usize {
        self.len()
    }

    fn select(&self, idx: &[usize]) -> Self {
        let d = self.dim();
        let mut features = Vec::with_capacity(idx.len() * d);
        for &i in idx {
            features.extend_from_slice(self.row(i));
        }
        Dataset {
            features,
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            feature_names: self.feature_names.clone(),
            groups: self.groups.as_ref().map(|g| idx.iter().map(|&i| g[i]).collect()),
        }
    }

    fn labels(&self) -> &[u8] {
        &self.labels
    }
}

/// `(floor(n·fraction), n − train)`.
pub fn split_sizes(n: usize, train_fraction: f64) -> (usize, usize) {
    let exact = n as f64 * train_fraction;
    let nearest = exact.round();
    // Products that are integers in exact arithmetic can land a hair below.
    let train = if (exact - nearest).abs() <= 1e-9 * exact.max(1.0) {
        nearest as usize
    } else {
        exact.floor() as usize
    };
    (train, n - train)
}

/// Seeded uniform split. Both halves keep the source row order.
pub fn train_test_split<T: Rows>(table: &T, train_fraction: f64, seed: u64) -> Result<(T, T), DataError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(DataError::InvalidParameter(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let n = table.n_rows();
    if n < 2 {
        return Err(DataError::TooFewRows { needed: 2, found: n });
    }
    let (n_train, _) = split_sizes(n, train_fraction);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (train_idx, test_idx) = order.split_at(n_train);
    let mut train_idx = train_idx.to_vec();
    let mut test_idx = test_idx.to_vec();
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    Ok((table.select(&train_idx), table.select(&test_idx)))
}

/// Equal-size shard size and the number of dropped remainder rows for the
/// given per-class row counts.
pub fn partition_sizes(class_counts: &[usize], n_clients: usize) -> (usize, usize) {
    let per_shard = class_counts.iter().map(|c| c / n_clients).sum();
    let dropped = class_counts.iter().map(|c| c % n_clients).sum();
    (per_shard, dropped)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClientShard {
    pub client_id: u32,
    pub data: Dataset,
    pub pos_ratio: f64,
}

fn class_indices(labels: &[u8]) -> [Vec<usize>; 2] {
    let mut by_class = [Vec::new(), Vec::new()];
    for (i, &y) in labels.iter().enumerate() {
        by_class[usize::from(y)].push(i);
    }
    by_class
}

fn finish(train: &Dataset, mut shard_rows: Vec<Vec<usize>>) -> Vec<ClientShard> {
    let parent = train.pos_ratio();
    shard_rows
        .iter_mut()
        .enumerate()
        .map(|(k, rows)| {
            rows.sort_unstable();
            let data = train.select(rows);
            let pos_ratio = data.pos_ratio();
            if (pos_ratio - parent).abs() > STRATIFICATION_TOLERANCE {
                warn!(
                    "shard {k}: positive ratio {pos_ratio:.4} is more than 0.5 pp from parent {parent:.4}"
                );
            }
            ClientShard {
                client_id: k as u32,
                data,
                pos_ratio,
            }
        })
        .collect()
}

/// Stratified equal-size partition. Per class, rows are shuffled and dealt in
/// blocks of `floor(count / n_clients)`; the remainder is dropped.
pub fn partition_clients(train: &Dataset, n_clients: usize, seed: u64) -> Result<Vec<ClientShard>, DataError> {
    if n_clients == 0 {
        return Err(DataError::InvalidParameter("n_clients must be ≥ 1".into()));
    }
    let mut shards = vec![Vec::new(); n_clients];
    for (class, mut idx) in class_indices(train.labels()).into_iter().enumerate() {
        if idx.len() < n_clients {
            return Err(DataError::ClassTooSmall {
                class: class as u8,
                count: idx.len(),
                n_clients,
            });
        }
        idx.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(seed, class as u64)));
        let block = idx.len() / n_clients;
        for (k, shard) in shards.iter_mut().enumerate() {
            shard.extend_from_slice(&idx[k * block..(k + 1) * block]);
        }
    }
    Ok(finish(train, shards))
}

/// Partition that follows the generator's group ids (non-IID data). Every
/// shard receives the same number of rows of each class, capped by the
/// smallest (group, class) cell.
pub fn partition_by_group(train: &Dataset, n_clients: usize, seed: u64) -> Result<Vec<ClientShard>, DataError> {
    if n_clients == 0 {
        return Err(DataError::InvalidParameter("n_clients must be ≥ 1".into()));
    }
    let groups = train
        .groups()
        .ok_or_else(|| DataError::InvalidParameter("dataset carries no group ids".into()))?;
    if let Some(&g) = groups.iter().find(|&&g| g as usize >= n_clients) {
        return Err(DataError::InvalidParameter(format!(
            "group id {g} out of range for {n_clients} clients"
        )));
    }
    let mut cells = vec![[Vec::new(), Vec::new()]; n_clients];
    for (i, (&g, &y)) in groups.iter().zip(train.labels()).enumerate() {
        cells[g as usize][usize::from(y)].push(i);
    }
    let mut shards = vec![Vec::new(); n_clients];
    for class in 0..2 {
        let take = cells.iter().map(|c| c[class].len()).min().unwrap_or(0);
        if take == 0 {
            return Err(DataError::ClassTooSmall {
                class: class as u8,
                count: 0,
                n_clients,
            });
        }
        for (g, cell) in cells.iter_mut().enumerate() {
            let idx = &mut cell[class];
            let stream = (g * 2 + class) as u64;
            idx.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(seed, stream)));
            shards[g].extend_from_slice(&idx[..take]);
        }
    }
    Ok(finish(train, shards))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labelled(pos: usize, neg: usize) -> Dataset {
        let n = pos + neg;
        let labels: Vec<u8> = (0..n).map(|i| u8::from(i < pos)).collect();
        let features = (0..n).map(|i| i as f32).collect();
        Dataset::new(features, labels, vec!["id".into()]).unwrap()
    }

    #[test]
    fn unsw_nb15_split_arithmetic() {
        assert_eq!(split_sizes(2_540_043, 0.9), (2_286_038, 254_005));
        assert_eq!(split_sizes(10, 0.9), (9, 1));
        assert_eq!(split_sizes(20_000, 0.9), (18_000, 2_000));
    }

    #[test]
    fn split_is_seeded_disjoint_and_exhaustive() {
        let ds = labelled(30, 70);
        let (a, b) = train_test_split(&ds, 0.9, 5).unwrap();
        let (a2, _) = train_test_split(&ds, 0.9, 5).unwrap();
        assert_eq!(a, a2);
        assert_eq!((a.len(), b.len()), (90, 10));
        let mut ids: Vec<f32> = a.features().iter().chain(b.features()).copied().collect();
        ids.sort_by(f32::total_cmp);
        assert_eq!(ids, (0..100).map(|i| i as f32).collect::<Vec<_>>());
    }

    #[test]
    fn split_rejects_tiny_or_bad_fraction() {
        assert!(matches!(train_test_split(&labelled(1, 0), 0.9, 0), Err(DataError::TooFewRows { .. })));
        assert!(train_test_split(&labelled(5, 5), 1.0, 0).is_err());
    }

    #[test]
    fn exact_division_stratifies_perfectly() {
        let shards = partition_clients(&labelled(20, 80), 4, 1).unwrap();
        assert_eq!(shards.len(), 4);
        for s in &shards {
            assert_eq!(s.data.len(), 25);
            assert_eq!(s.data.positives(), 5);
            assert_eq!(s.pos_ratio, 0.2);
        }
    }

    #[test]
    fn single_client_drops_nothing() {
        let shards = partition_clients(&labelled(7, 13), 1, 3).unwrap();
        assert_eq!(shards[0].data.len(), 20);
    }

    #[test]
    fn unsw_nb15_partition_arithmetic() {
        // 2,286,038 rows whose class remainders mod 4 sum to 2.
        assert_eq!(partition_sizes(&[2_000_284, 285_754], 4), (571_509, 2));
    }

    #[test]
    fn too_small_class_errors() {
        assert!(matches!(
            partition_clients(&labelled(3, 50), 4, 0),
            Err(DataError::ClassTooSmall { class: 1, count: 3, .. })
        ));
    }

    #[test]
    fn group_partition_follows_groups() {
        let ds = labelled(40, 60);
        let groups = (0..100).map(|i| (i % 2) as u32).collect();
        let ds = ds.with_groups(groups).unwrap();
        let shards = partition_by_group(&ds, 2, 0).unwrap();
        for (k, s) in shards.iter().enumerate() {
            assert!(s.data.groups().unwrap().iter().all(|&g| g as usize == k));
            assert_eq!(s.data.len(), 50);
        }
    }
}
