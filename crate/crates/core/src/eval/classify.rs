use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, StemError};
use crate::features::FeatureVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Euclidean,
    Cosine,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Euclidean => "euclidean",
            Metric::Cosine => "cosine",
        })
    }
}

impl FromStr for Metric {
    type Err = StemError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(Metric::Euclidean),
            "cosine" => Ok(Metric::Cosine),
            other => Err(StemError::Config(format!("unknown metric `{other}`"))),
        }
    }
}

impl Metric {
    /// Euclidean distance, or `1 - cos` for cosine. A zero vector is at
    /// cosine distance 0 from another zero vector and 1 from anything else.
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
            Metric::Cosine => {
                let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
                for (x, y) in a.iter().zip(b) {
                    dot += x * y;
                    na += x * x;
                    nb += y * y;
                }
                match (na == 0.0, nb == 0.0) {
                    (true, true) => 0.0,
                    (true, false) | (false, true) => 1.0,
                    _ => (1.0 - dot / (na.sqrt() * nb.sqrt())).max(0.0),
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassifierConfig {
    Knn { k: usize, metric: Metric },
    NearestCentroid { metric: Metric },
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig::Knn {
            k: 1,
            metric: Metric::Euclidean,
        }
    }
}

impl ClassifierConfig {
    pub fn metric(&self) -> Metric {
        match *self {
            ClassifierConfig::Knn { metric, .. } | ClassifierConfig::NearestCentroid { metric } => metric,
        }
    }

    pub fn fit(&self, train: &[FeatureVector]) -> Result<Box<dyn Classifier>> {
        Ok(match *self {
            ClassifierConfig::Knn { k, metric } => Box::new(KnnModel::fit(train, k, metric)?),
            ClassifierConfig::NearestCentroid { metric } => Box::new(CentroidModel::fit(train, metric)?),
        })
    }
}

pub trait Classifier: Send + Sync {
    fn predict(&self, query: &FeatureVector) -> Result<String>;
}

struct Labeled<'a> {
    label: &'a str,
    values: &'a [f64],
}

fn labeled(train: &[FeatureVector]) -> Result<Vec<Labeled<'_>>> {
    if train.is_empty() {
        return Err(StemError::NoModel);
    }
    let width = train[0].values.len();
    train
        .iter()
        .map(|v| {
            if v.values.len() != width {
                return Err(StemError::IncompatibleVector {
                    expected: width,
                    actual: v.values.len(),
                });
            }
            let label = v
                .label
                .as_deref()
                .ok_or_else(|| StemError::Unlabeled(v.sample_id.clone()))?;
            Ok(Labeled {
                label,
                values: &v.values,
            })
        })
        .collect()
}

fn check_width(expected: usize, query: &FeatureVector) -> Result<()> {
    if query.values.len() != expected {
        return Err(StemError::IncompatibleVector {
            expected,
            actual: query.values.len(),
        });
    }
    Ok(())
}

/// Majority vote among the `k` nearest training vectors. Equal distances are
/// ordered by training position; vote ties go to the label with the smaller
/// mean neighbor distance, then to the lexicographically smaller label.
pub fn knn_classify(train: &[FeatureVector], query: &FeatureVector, k: usize, metric: Metric) -> Result<String> {
    let train = labeled(train)?;
    knn_predict(&train, query, k, metric)
}

fn knn_predict(train: &[Labeled<'_>], query: &FeatureVector, k: usize, metric: Metric) -> Result<String> {
    if train.is_empty() {
        return Err(StemError::NoModel);
    }
    if k == 0 || k > train.len() {
        return Err(StemError::Config(format!("k must lie in 1..={}, got {k}", train.len())));
    }
    check_width(train[0].values.len(), query)?;

    let mut dists: Vec<(f64, usize)> = train
        .iter()
        .enumerate()
        .map(|(i, t)| (metric.distance(t.values, &query.values), i))
        .collect();
    dists.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut votes: BTreeMap<&str, (usize, f64)> = BTreeMap::new();
    for &(d, i) in &dists[..k] {
        let e = votes.entry(train[i].label).or_insert((0, 0.0));
        e.0 += 1;
        e.1 += d;
    }
    let best = votes
        .into_iter()
        .map(|(label, (count, sum))| (label, count, sum / count as f64))
        .min_by(|a, b| {
            b.1.cmp(&a.1)
                .then_with(|| a.2.total_cmp(&b.2))
                .then_with(|| a.0.cmp(b.0))
        })
        .expect("k >= 1 neighbors vote");
    Ok(best.0.to_string())
}

/// Label of the closest class mean; ties go to the lexicographically smaller label.
pub fn nearest_centroid_classify(train: &[FeatureVector], query: &FeatureVector, metric: Metric) -> Result<String> {
    CentroidModel::fit(train, metric)?.predict(query)
}

pub struct KnnModel {
    labels: Vec<String>,
    vectors: Vec<Vec<f64>>,
    k: usize,
    metric: Metric,
}

impl KnnModel {
    pub fn fit(train: &[FeatureVector], k: usize, metric: Metric) -> Result<Self> {
        let rows = labeled(train)?;
        if k == 0 || k > rows.len() {
            return Err(StemError::Config(format!("k must lie in 1..={}, got {k}", rows.len())));
        }
        Ok(Self {
            labels: rows.iter().map(|r| r.label.to_string()).collect(),
            vectors: rows.iter().map(|r| r.values.to_vec()).collect(),
            k,
            metric,
        })
    }
}

impl Classifier for KnnModel {
    fn predict(&self, query: &FeatureVector) -> Result<String> {
        let rows: Vec<Labeled<'_>> = self
            .labels
            .iter()
            .zip(&self.vectors)
            .map(|(label, values)| Labeled { label, values })
            .collect();
        knn_predict(&rows, query, self.k, self.metric)
    }
}

pub struct CentroidModel {
    centroids: BTreeMap<String, Vec<f64>>,
    width: usize,
    metric: Metric,
}

impl CentroidModel {
    pub fn fit(train: &[FeatureVector], metric: Metric) -> Result<Self> {
        let rows = labeled(train)?;
        let width = rows[0].values.len();
        let mut sums: BTreeMap<String, (Vec<f64>, usize)> = BTreeMap::new();
        for r in &rows {
            let e = sums.entry(r.label.to_string()).or_insert_with(|| (vec![0.0; width], 0));
            for (acc, x) in e.0.iter_mut().zip(r.values) {
                *acc += x;
            }
            e.1 += 1;
        }
        let centroids = sums
            .into_iter()
            .map(|(label, (sum, n))| (label, sum.into_iter().map(|s| s / n as f64).collect()))
            .collect();
        Ok(Self {
            centroids,
            width,
            metric,
        })
    }

    pub fn centroid(&self, label: &str) -> Option<&[f64]> {
        self.centroids.get(label).map(Vec::as_slice)
    }
}

impl Classifier for CentroidModel {
    fn predict(&self, query: &FeatureVector) -> Result<String> {
        check_width(self.width, query)?;
        let mut best: Option<(&str, f64)> = None;
        for (label, c) in &self.centroids {
            let d = self.metric.distance(c, &query.values);
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((label, d));
            }
        }
        Ok(best.expect("at least one class").0.to_string())
    }
}
