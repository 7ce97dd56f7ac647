//! Train/test evaluation of event-sequence features: seeded splits,
//! nearest-neighbor classifiers, per-stage CPU timing and report tables.

mod classify;
mod cputime;
mod report;
mod split;

pub use classify::{
    knn_classify, nearest_centroid_classify, CentroidModel, Classifier, ClassifierConfig, KnnModel, Metric,
};
pub use cputime::{cpu_timed, process_cpu_time};
pub use report::{ConfigEcho, DatasetReport, EvalReport, ReportFile, Timings};
pub use split::{split_dataset, Split, SplitSpec};

use std::collections::HashSet;

use rayon::prelude::*;

use crate::data::{normalize_sample, MtsDataset, MtsSample};
use crate::error::{Result, StemError};
use crate::features::{event_histogram, vectorize, FeatureVector, FeatureVocabulary, MinerSnapshot};
use crate::miner::{build_forest_parallel, extract_rts_features, prune_bottom_up, MinerConfig};
use crate::symbolize::{symbolize_sample, EventSequence, SymbolizerConfig};

pub const STEM_METHOD: &str = "STEM";
pub const BASELINE_METHOD: &str = "1-gram histogram";

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PipelineConfig {
    pub symbolizer: SymbolizerConfig,
    pub miner: MinerConfig,
    pub split: SplitSpec,
    pub classifier: ClassifierConfig,
    /// Train and test on the full dataset.
    pub resubstitution: bool,
}

/// Result of a full pipeline run: the report plus the training vocabulary.
#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub report: EvalReport,
    pub vocabulary: FeatureVocabulary,
}

struct Partition<'a> {
    train: Vec<&'a MtsSample>,
    test: Vec<&'a MtsSample>,
}

fn partition<'a>(ds: &'a MtsDataset, cfg: &PipelineConfig) -> Result<Partition<'a>> {
    let labels = ds.label_set();
    if labels.len() < 2 {
        return Err(StemError::DegenerateTask(format!(
            "need at least 2 classes, found {}",
            labels.len()
        )));
    }
    if cfg.resubstitution {
        if let Some(s) = ds.samples().iter().find(|s| s.label().is_none()) {
            return Err(StemError::Unlabeled(s.id().to_string()));
        }
        let all: Vec<_> = ds.samples().iter().collect();
        return Ok(Partition {
            train: all.clone(),
            test: all,
        });
    }
    let split = split_dataset(ds, &cfg.split)?;
    let test_ids: HashSet<&str> = split.test.iter().map(String::as_str).collect();
    let (test, train): (Vec<_>, Vec<_>) = ds.samples().iter().partition(|s| test_ids.contains(s.id()));
    if test.is_empty() {
        return Err(StemError::DegenerateTask("split left the test set empty".into()));
    }
    Ok(Partition { train, test })
}

fn symbolize_all(samples: &[&MtsSample], cfg: &SymbolizerConfig) -> Result<Vec<EventSequence>> {
    samples
        .par_iter()
        .map(|s| symbolize_sample(&normalize_sample(s), cfg))
        .collect()
}

fn echo(cfg: &PipelineConfig, miner: Option<(&MinerConfig, u32)>) -> ConfigEcho {
    ConfigEcho {
        delta: cfg.symbolizer.delta(),
        min_support: miner.map(|(m, _)| m.min_support),
        resolved_min_support: miner.map(|(_, s)| s),
        max_len: miner.map(|(m, _)| m.max_len),
        gain_gamma: miner.map(|(m, _)| m.gain_gamma),
        classifier: cfg.classifier,
        train_fraction: cfg.split.train_fraction,
        seed: cfg.split.seed,
        stratified: cfg.split.stratified,
        resubstitution: cfg.resubstitution,
    }
}

fn classify_all(model: &dyn Classifier, test: &[FeatureVector]) -> Result<Vec<String>> {
    test.par_iter().map(|q| model.predict(q)).collect()
}

fn truth(test: &[&MtsSample]) -> Vec<String> {
    test.iter().map(|s| s.label().unwrap_or_default().to_string()).collect()
}

/// Symbolizes every sample, mines tuples from the training side only,
/// vectorizes both sides against the training vocabulary and classifies the
/// test side. Stage timings are process CPU seconds.
pub fn evaluate_pipeline(ds: &MtsDataset, cfg: &PipelineConfig) -> Result<PipelineOutcome> {
    cfg.miner.validate()?;
    let labels = ds.label_set();
    let part = partition(ds, cfg)?;
    let mut timings = Timings::default();
    let start = process_cpu_time();

    let (seqs, t) = cpu_timed(|| -> Result<_> {
        Ok((
            symbolize_all(&part.train, &cfg.symbolizer)?,
            symbolize_all(&part.test, &cfg.symbolizer)?,
        ))
    });
    let (train_seqs, test_seqs) = seqs?;
    timings.symbolize = t;

    let (mined, t) = cpu_timed(|| -> Result<_> {
        let forest = build_forest_parallel(&train_seqs, &cfg.miner, rayon::current_num_threads())?;
        let pruned = prune_bottom_up(&forest, &cfg.miner);
        Ok(extract_rts_features(&pruned))
    });
    let mined = mined?;
    timings.mine = t;

    let (vectors, t) = cpu_timed(|| -> Result<_> {
        let snapshot = MinerSnapshot::new(&cfg.miner, train_seqs.len());
        let vocab = FeatureVocabulary::from_mined(&mined, ds.dims(), cfg.symbolizer.delta(), Some(snapshot))?;
        let train: Vec<_> = train_seqs
            .par_iter()
            .map(|s| vectorize(s, &vocab))
            .collect::<Result<_>>()?;
        let test: Vec<_> = test_seqs
            .par_iter()
            .map(|s| vectorize(s, &vocab))
            .collect::<Result<_>>()?;
        Ok((vocab, train, test))
    });
    let (vocabulary, train_vecs, test_vecs) = vectors?;
    timings.featurize = t;
    if vocabulary.is_empty() {
        log::warn!("no tuples survived mining; every feature vector is empty");
    }

    let (predicted, t) = cpu_timed(|| -> Result<_> {
        let model = cfg.classifier.fit(&train_vecs)?;
        classify_all(model.as_ref(), &test_vecs)
    });
    let predicted = predicted?;
    timings.classify = t;
    timings.total = (process_cpu_time() - start).as_secs_f64();

    let sigma = cfg.miner.min_support.resolve(train_seqs.len());
    let report = EvalReport::from_predictions(
        STEM_METHOD,
        &labels,
        &truth(&part.test),
        &predicted,
        part.train.len(),
        vocabulary.len(),
        echo(cfg, Some((&cfg.miner, sigma))),
        timings,
    )?;
    Ok(PipelineOutcome { report, vocabulary })
}

/// Same split and classifier, with normalized event-code histograms as features.
pub fn baseline_histogram_eval(ds: &MtsDataset, cfg: &PipelineConfig) -> Result<EvalReport> {
    let labels = ds.label_set();
    let part = partition(ds, cfg)?;
    let mut timings = Timings::default();
    let start = process_cpu_time();

    let (seqs, t) = cpu_timed(|| -> Result<_> {
        Ok((
            symbolize_all(&part.train, &cfg.symbolizer)?,
            symbolize_all(&part.test, &cfg.symbolizer)?,
        ))
    });
    let (train_seqs, test_seqs) = seqs?;
    timings.symbolize = t;

    let ((train_vecs, test_vecs), t) = cpu_timed(|| {
        let train: Vec<_> = train_seqs.par_iter().map(event_histogram).collect();
        let test: Vec<_> = test_seqs.par_iter().map(event_histogram).collect();
        (train, test)
    });
    timings.featurize = t;

    let (predicted, t) = cpu_timed(|| -> Result<_> {
        let model = cfg.classifier.fit(&train_vecs)?;
        classify_all(model.as_ref(), &test_vecs)
    });
    let predicted = predicted?;
    timings.classify = t;
    timings.total = (process_cpu_time() - start).as_secs_f64();

    let width = train_vecs.first().map_or(0, |v| v.values.len());
    EvalReport::from_predictions(
        BASELINE_METHOD,
        &labels,
        &truth(&part.test),
        &predicted,
        part.train.len(),
        width,
        echo(cfg, None),
        timings,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_synthetic, Direction, Segment, SynthClass, SynthSpec};
    use crate::miner::MinSupport;

    fn spec(noise: f64, per_class: usize) -> SynthSpec {
        use Direction::*;
        let motif = |a: [Direction; 3]| {
            a.iter()
                .map(|&d| vec![Segment::new(d, 3), Segment::new(Flat, 3)])
                .collect()
        };
        SynthSpec {
            classes: vec![
                SynthClass {
                    label: "a".into(),
                    motif: motif([Up, Down, Flat]),
                },
                SynthClass {
                    label: "b".into(),
                    motif: motif([Down, Up, Flat]),
                },
                SynthClass {
                    label: "c".into(),
                    motif: motif([Flat, Up, Up]),
                },
            ],
            samples_per_class: per_class,
            length: 30,
            noise_amplitude: noise,
            seed: 5,
            step: 1.0,
            separable: noise < 0.5,
            random_phase: true,
        }
    }

    fn config() -> PipelineConfig {
        PipelineConfig {
            miner: MinerConfig::new(MinSupport::Count(2), 4).unwrap(),
            ..Default::default()
        }
    }

    #[test]
    fn noiseless_separable_is_perfect() {
        let ds = generate_synthetic(&spec(0.0, 10)).unwrap();
        let out = evaluate_pipeline(&ds, &config()).unwrap();
        assert_eq!(out.report.accuracy, 1.0);
        assert_eq!(out.report.n_test, 6);
        assert!(!out.vocabulary.is_empty());
    }

    #[test]
    fn resubstitution_with_distinct_vectors_is_perfect() {
        let ds = generate_synthetic(&spec(0.3, 6)).unwrap();
        let cfg = PipelineConfig {
            resubstitution: true,
            miner: MinerConfig::new(MinSupport::Count(1), 5).unwrap(),
            ..Default::default()
        };
        let out = evaluate_pipeline(&ds, &cfg).unwrap();
        assert_eq!(out.report.n_test, ds.len());
        assert_eq!(out.report.accuracy, 1.0);
    }

    #[test]
    fn single_class_is_degenerate() {
        let mut s = spec(0.0, 3);
        s.classes.truncate(1);
        let ds = generate_synthetic(&s).unwrap();
        assert!(matches!(
            evaluate_pipeline(&ds, &config()),
            Err(StemError::DegenerateTask(_))
        ));
    }

    #[test]
    fn baseline_shape() {
        let ds = generate_synthetic(&spec(0.0, 5)).unwrap();
        let r = baseline_histogram_eval(&ds, &config()).unwrap();
        assert_eq!(r.method, BASELINE_METHOD);
        assert_eq!(r.n_features, 27);
        assert_eq!(r.labels, vec!["a", "b", "c"]);
        assert_eq!(r.timings.mine, 0.0);
    }

    #[test]
    fn reports_are_deterministic_apart_from_timings() {
        let ds = generate_synthetic(&spec(0.3, 8)).unwrap();
        let mut a = evaluate_pipeline(&ds, &config()).unwrap().report;
        let mut b = evaluate_pipeline(&ds, &config()).unwrap().report;
        a.timings = Timings::default();
        b.timings = Timings::default();
        assert_eq!(a, b);
    }
}
