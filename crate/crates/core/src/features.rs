//! Feature vocabularies and position-normalized occurrence vectors.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, StemError};
use crate::miner::{MinSupport, MinedTuple, MinerConfig, Tuple};
use crate::symbolize::{explain_event, EventCode, EventSequence};

pub const VOCABULARY_FORMAT: &str = "stem-vocabulary/1";

/// Miner settings recorded alongside a vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinerSnapshot {
    pub min_support: MinSupport,
    pub resolved_min_support: u32,
    pub max_len: usize,
    pub gain_gamma: f64,
    pub n_samples: usize,
}

impl MinerSnapshot {
    pub fn new(cfg: &MinerConfig, n_samples: usize) -> Self {
        Self {
            min_support: cfg.min_support,
            resolved_min_support: cfg.min_support.resolve(n_samples),
            max_len: cfg.max_len,
            gain_gamma: cfg.gain_gamma,
            n_samples,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureStats {
    pub doc_support: u32,
    pub occ_count: u64,
}

/// An ordered, immutable set of tuples plus the context needed to reproduce it.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVocabulary {
    features: Vec<Tuple>,
    stats: Vec<Option<FeatureStats>>,
    index: HashMap<Tuple, usize>,
    lengths: Vec<usize>,
    dims: usize,
    delta: f64,
    miner: Option<MinerSnapshot>,
}

/// Sorts `features` by length then codes. Duplicates are rejected.
pub fn build_vocabulary(
    features: Vec<Tuple>,
    dims: usize,
    delta: f64,
    miner: Option<MinerSnapshot>,
) -> Result<FeatureVocabulary> {
    FeatureVocabulary::assemble(features.into_iter().map(|t| (t, None)).collect(), dims, delta, miner)
}

impl FeatureVocabulary {
    /// Vocabulary over mined tuples, keeping their support statistics.
    pub fn from_mined(mined: &[MinedTuple], dims: usize, delta: f64, miner: Option<MinerSnapshot>) -> Result<Self> {
        let entries = mined
            .iter()
            .map(|m| {
                let stats = FeatureStats {
                    doc_support: m.doc_support,
                    occ_count: m.occ_count,
                };
                (m.tuple.clone(), Some(stats))
            })
            .collect();
        Self::assemble(entries, dims, delta, miner)
    }

    fn assemble(
        mut entries: Vec<(Tuple, Option<FeatureStats>)>,
        dims: usize,
        delta: f64,
        miner: Option<MinerSnapshot>,
    ) -> Result<Self> {
        if let Some((t, _)) = entries.iter().find(|(t, _)| t.is_empty()) {
            return Err(StemError::Config(format!("empty feature tuple {t}")));
        }
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        if let Some(w) = entries.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(StemError::DuplicateFeature(w[0].0.to_string()));
        }
        if entries.is_empty() {
            log::warn!("feature vocabulary is empty");
        }
        let (features, stats): (Vec<_>, Vec<_>) = entries.into_iter().unzip();
        let index = features.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        let mut lengths: Vec<usize> = features.iter().map(Tuple::len).collect();
        lengths.dedup();
        Ok(Self {
            features,
            stats,
            index,
            lengths,
            dims,
            delta,
            miner,
        })
    }

    pub fn features(&self) -> &[Tuple] {
        &self.features
    }

    pub fn stats(&self, i: usize) -> Option<FeatureStats> {
        self.stats.get(i).copied().flatten()
    }

    pub fn get(&self, tuple: &[EventCode]) -> Option<usize> {
        self.index.get(tuple).copied()
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn miner(&self) -> Option<&MinerSnapshot> {
        self.miner.as_ref()
    }

    pub fn to_file_repr(&self) -> Result<VocabularyFile> {
        let features = self
            .features
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let explanation = t
                    .codes()
                    .iter()
                    .map(|&c| explain_event(c, self.dims, None))
                    .collect::<Result<Vec<_>>>()?;
                let stats = self.stats(i);
                Ok(FeatureRecord {
                    ordinal: i,
                    length: t.len(),
                    codes: t.codes().iter().map(|c| c.0).collect(),
                    doc_support: stats.map(|s| s.doc_support),
                    occ_count: stats.map(|s| s.occ_count),
                    explanation,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(VocabularyFile {
            format: VOCABULARY_FORMAT.to_string(),
            dims: self.dims,
            delta: self.delta,
            miner: self.miner,
            features,
        })
    }

    pub fn from_file_repr(file: VocabularyFile) -> Result<Self> {
        if file.format != VOCABULARY_FORMAT {
            return Err(StemError::Schema(format!(
                "unsupported vocabulary format `{}`",
                file.format
            )));
        }
        let entries = file
            .features
            .into_iter()
            .map(|r| {
                if r.codes.len() != r.length {
                    return Err(StemError::Schema(format!(
                        "feature {} declares length {} but has {} codes",
                        r.ordinal,
                        r.length,
                        r.codes.len()
                    )));
                }
                let stats = match (r.doc_support, r.occ_count) {
                    (Some(doc_support), Some(occ_count)) => Some(FeatureStats { doc_support, occ_count }),
                    _ => None,
                };
                Ok((Tuple::from_codes(r.codes), stats))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::assemble(entries, file.dims, file.delta, file.miner)
    }

    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        let mut writer = writer;
        serde_json::to_writer_pretty(&mut writer, &self.to_file_repr()?)?;
        writer
            .write_all(b"\n")
            .map_err(|e| StemError::io("<vocabulary output>", e))
    }

    pub fn read_json<R: Read>(reader: R) -> Result<Self> {
        Self::from_file_repr(serde_json::from_reader(reader)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| StemError::io(path, e))?;
        self.write_json(std::io::BufWriter::new(file))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| StemError::io(path, e))?;
        Self::read_json(std::io::BufReader::new(file))
    }
}

/// On-disk form of a vocabulary; also the feature list written by mining.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VocabularyFile {
    pub format: String,
    pub dims: usize,
    pub delta: f64,
    pub miner: Option<MinerSnapshot>,
    pub features: Vec<FeatureRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRecord {
    pub ordinal: usize,
    pub length: usize,
    pub codes: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doc_support: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub occ_count: Option<u64>,
    #[serde(default)]
    pub explanation: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub sample_id: String,
    pub label: Option<String>,
    pub values: Vec<f64>,
}

/// Entry `j` is the number of (overlapping) occurrences of feature `j`
/// divided by the number of window positions of that length; zero when the
/// sequence is shorter than the feature.
pub fn vectorize(seq: &EventSequence, vocab: &FeatureVocabulary) -> Result<FeatureVector> {
    if seq.dims() != vocab.dims() {
        return Err(StemError::IncompatibleVocabulary {
            sample: seq.sample_id().to_string(),
            message: format!("sequence has {} dimensions, vocabulary {}", seq.dims(), vocab.dims()),
        });
    }
    let codes = seq.codes();
    let mut counts = vec![0u32; vocab.len()];
    for &len in &vocab.lengths {
        if len > codes.len() {
            break;
        }
        for window in codes.windows(len) {
            if let Some(j) = vocab.get(window) {
                counts[j] += 1;
            }
        }
    }
    let values = counts
        .iter()
        .zip(vocab.features())
        .map(|(&count, t)| {
            if codes.len() < t.len() {
                0.0
            } else {
                f64::from(count) / (codes.len() - t.len() + 1) as f64
            }
        })
        .collect();
    Ok(FeatureVector {
        sample_id: seq.sample_id().to_string(),
        label: seq.label().map(str::to_string),
        values,
    })
}

pub fn vectorize_dataset(seqs: &[EventSequence], vocab: &FeatureVocabulary) -> Result<Vec<FeatureVector>> {
    seqs.iter().map(|s| vectorize(s, vocab)).collect()
}

/// Normalized 1-gram histogram over the full `3^D` alphabet.
pub fn event_histogram(seq: &EventSequence) -> FeatureVector {
    let size = crate::symbolize::alphabet_size(seq.dims()) as usize;
    let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
    for c in seq.codes() {
        *counts.entry(c.0).or_default() += 1;
    }
    let mut values = vec![0.0; size];
    let n = seq.len().max(1) as f64;
    for (c, k) in counts {
        values[c as usize] = f64::from(k) / n;
    }
    FeatureVector {
        sample_id: seq.sample_id().to_string(),
        label: seq.label().map(str::to_string),
        values,
    }
}

/// Writes `sample_id,label,f_0,...,f_{K-1}`.
pub fn write_feature_matrix<W: Write>(vectors: &[FeatureVector], width: usize, writer: W) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    let mut header = vec!["sample_id".to_string(), "label".to_string()];
    header.extend((0..width).map(|j| format!("f_{j}")));
    wtr.write_record(&header)?;
    for v in vectors {
        if v.values.len() != width {
            return Err(StemError::IncompatibleVector {
                expected: width,
                actual: v.values.len(),
            });
        }
        let mut record = vec![v.sample_id.clone(), v.label.clone().unwrap_or_default()];
        record.extend(v.values.iter().map(|x| format!("{x:?}")));
        wtr.write_record(&record)?;
    }
    wtr.flush().map_err(|e| StemError::io("<feature matrix output>", e))?;
    Ok(())
}
