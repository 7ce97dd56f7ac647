use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::MtsDataset;
use crate::error::{Result, StemError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_fraction: 0.8,
            seed: 0,
            stratified: true,
        }
    }
}

/// Sample ids on each side of a split, in dataset order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<String>,
    pub test: Vec<String>,
}

/// Test-set size for a group of `n`: `max(1, floor((1 - f) * n))`, never
/// taking the whole group.
fn test_count(n: usize, train_fraction: f64) -> usize {
    if n < 2 {
        return 0;
    }
    // slack absorbs products like (1 - 0.8) * 10 = 1.9999999999999996
    let raw = ((1.0 - train_fraction) * n as f64 + 1e-9).floor() as usize;
    raw.max(1).min(n - 1)
}

/// Seeded train/test split. Stratified splits shuffle each class on its own
/// (classes visited in label order); a class with a single sample goes to
/// the training side.
pub fn split_dataset(ds: &MtsDataset, spec: &SplitSpec) -> Result<Split> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(StemError::Config(format!(
            "train fraction must lie in (0, 1), got {}",
            spec.train_fraction
        )));
    }
    if let Some(s) = ds.samples().iter().find(|s| s.label().is_none()) {
        return Err(StemError::Unlabeled(s.id().to_string()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut is_test = vec![false; ds.len()];
    let groups: Vec<(String, Vec<usize>)> = if spec.stratified {
        let mut by_label: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, s) in ds.samples().iter().enumerate() {
            by_label.entry(s.label().unwrap_or_default()).or_default().push(i);
        }
        by_label.into_iter().map(|(l, idx)| (l.to_string(), idx)).collect()
    } else {
        vec![(String::new(), (0..ds.len()).collect())]
    };

    for (label, mut members) in groups {
        if members.len() < 2 {
            log::warn!("class `{label}` has a single sample; it goes to the training set");
        }
        members.shuffle(&mut rng);
        for &i in &members[..test_count(members.len(), spec.train_fraction)] {
            is_test[i] = true;
        }
    }

    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (s, t) in ds.samples().iter().zip(is_test) {
        if t {
            test.push(s.id().to_string());
        } else {
            train.push(s.id().to_string());
        }
    }
    Ok(Split { train, test })
}
