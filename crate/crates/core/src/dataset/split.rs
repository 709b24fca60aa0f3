use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::ImageRecord;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitConfig {
    pub train_frac: f64,
    pub val_frac: f64,
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            train_frac: 0.6,
            val_frac: 0.2,
            seed: 0,
        }
    }
}

/// Sequence ids per partition, each list sorted.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Split {
    pub train: Vec<String>,
    pub val: Vec<String>,
    pub test: Vec<String>,
}

impl Split {
    /// Image counts of `(train, val, test)` for the given records.
    pub fn image_counts<T>(&self, records: &[ImageRecord<T>]) -> (usize, usize, usize) {
        let count = |ids: &[String]| {
            records
                .iter()
                .filter(|r| ids.binary_search(&r.sequence_id).is_ok())
                .count()
        };
        (count(&self.train), count(&self.val), count(&self.test))
    }
}

const TRAIN: usize = 0;
const VAL: usize = 1;
const TEST: usize = 2;

/// Assigns whole sequences to train/validation/test.
///
/// Sequences are visited largest first (ties in seeded random order) and each
/// goes to the partition furthest below its image-count target. Afterwards
/// every partition is guaranteed at least one sequence by moving the smallest
/// sequence out of the most populated partition.
pub fn split<T>(records: &[ImageRecord<T>], config: SplitConfig) -> Result<Split> {
    let SplitConfig {
        train_frac,
        val_frac,
        seed,
    } = config;
    let valid = |f: f64| f.is_finite() && f > 0.0;
    if !valid(train_frac) || !valid(val_frac) || train_frac + val_frac > 1.0 {
        return Err(Error::InvalidArgument(format!(
            "fractions must be positive with train + val <= 1, got train={train_frac} val={val_frac}"
        )));
    }

    let mut sizes: BTreeMap<&str, usize> = BTreeMap::new();
    for r in records {
        *sizes.entry(r.sequence_id.as_str()).or_default() += 1;
    }
    if sizes.len() < 3 {
        return Err(Error::Dataset(format!(
            "need at least 3 sequences to split, found {}",
            sizes.len()
        )));
    }

    let mut order: Vec<(&str, usize)> = sizes.into_iter().collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    order.sort_by_key(|&(_, size)| std::cmp::Reverse(size));

    let total = records.len() as f64;
    let train_target = train_frac * total;
    let val_target = val_frac * total;
    let targets = [
        train_target,
        val_target,
        (total - train_target - val_target).max(0.0),
    ];
    let mut load = [0.0f64; 3];
    let mut parts: [Vec<(&str, usize)>; 3] = Default::default();
    for (id, size) in order {
        let mut pick = TRAIN;
        for p in [VAL, TEST] {
            if targets[p] - load[p] > targets[pick] - load[pick] {
                pick = p;
            }
        }
        load[pick] += size as f64;
        parts[pick].push((id, size));
    }

    for needy in [VAL, TEST, TRAIN] {
        if !parts[needy].is_empty() {
            continue;
        }
        let donor = [TRAIN, VAL, TEST]
            .into_iter()
            .filter(|&p| parts[p].len() >= 2)
            .max_by(|&a, &b| parts[a].len().cmp(&parts[b].len()).then(b.cmp(&a)))
            .expect("three or more sequences leave a partition with two");
        let smallest = (0..parts[donor].len())
            .min_by(|&i, &j| {
                let (a, b) = (parts[donor][i], parts[donor][j]);
                a.1.cmp(&b.1).then(a.0.cmp(b.0))
            })
            .unwrap();
        let moved = parts[donor].remove(smallest);
        parts[needy].push(moved);
    }

    let [train, val, test] = parts.map(|p| {
        let mut ids: Vec<String> = p.into_iter().map(|(id, _)| id.to_string()).collect();
        ids.sort();
        ids
    });
    Ok(Split { train, val, test })
}
