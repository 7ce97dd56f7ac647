//! Raw multidimensional samples, per-sample normalization and padding,
//! the long-form CSV interchange format and the seeded synthetic generator.

mod csv_io;
pub mod synth;

pub use csv_io::{load_csv, read_csv, write_csv, write_csv_to};
pub use synth::{generate_synthetic, Direction, Segment, SynthClass, SynthSpec};

use crate::error::{Result, StemError};

/// One labeled multidimensional time series, stored dimension-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MtsSample {
    id: String,
    label: Option<String>,
    values: Vec<Vec<f64>>,
}

impl MtsSample {
    /// Validates shape and finiteness. Every dimension must have the same
    /// length, at least two points.
    pub fn new(id: impl Into<String>, label: Option<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        let id = id.into();
        let invalid = |message: String| StemError::InvalidSample {
            sample: id.clone(),
            message,
        };
        if values.is_empty() {
            return Err(invalid("no dimensions".into()));
        }
        let len = values[0].len();
        if len < 2 {
            return Err(invalid(format!("length {len} < 2")));
        }
        for (d, dim) in values.iter().enumerate() {
            if dim.len() != len {
                return Err(invalid(format!(
                    "dimension {d} has {} values, expected {len}",
                    dim.len()
                )));
            }
            if let Some(t) = dim.iter().position(|v| !v.is_finite()) {
                return Err(invalid(format!("non-finite value at dim {d}, t {t}")));
            }
        }
        Ok(Self { id, label, values })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn dims(&self) -> usize {
        self.values.len()
    }

    pub fn len(&self) -> usize {
        self.values[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self, d: usize) -> &[f64] {
        &self.values[d]
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn with_values(&self, values: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(self.id.clone(), self.label.clone(), values)
    }
}

/// A collection of samples sharing one dimension count.
#[derive(Debug, Clone, PartialEq)]
pub struct MtsDataset {
    samples: Vec<MtsSample>,
    dims: usize,
}

impl MtsDataset {
    pub fn new(samples: Vec<MtsSample>) -> Result<Self> {
        let first = samples.first().ok_or(StemError::EmptyDataset)?;
        let dims = first.dims();
        let mut seen = std::collections::HashSet::new();
        for s in &samples {
            if s.dims() != dims {
                return Err(StemError::Schema(format!(
                    "sample `{}` has {} dimensions, expected {dims}",
                    s.id(),
                    s.dims()
                )));
            }
            if !seen.insert(s.id()) {
                return Err(StemError::MalformedDataset {
                    sample: s.id().to_string(),
                    message: "duplicate sample id".into(),
                });
            }
        }
        Ok(Self { samples, dims })
    }

    pub fn samples(&self) -> &[MtsSample] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<MtsSample> {
        self.samples
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn max_len(&self) -> usize {
        self.samples.iter().map(MtsSample::len).max().unwrap_or(0)
    }

    /// Sorted distinct labels.
    pub fn label_set(&self) -> Vec<String> {
        let set: std::collections::BTreeSet<&str> = self.samples.iter().filter_map(MtsSample::label).collect();
        set.into_iter().map(str::to_string).collect()
    }

    pub fn get(&self, id: &str) -> Option<&MtsSample> {
        self.samples.iter().find(|s| s.id() == id)
    }
}

/// Min-max scales every dimension of `s` independently into `[0, 1]`.
/// A constant dimension becomes all zeros.
pub fn normalize_sample(s: &MtsSample) -> MtsSample {
    let values = s
        .values()
        .iter()
        .map(|dim| {
            let (lo, hi) = dim.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
            let range = hi - lo;
            if range > 0.0 && range.is_finite() {
                dim.iter().map(|&v| ((v - lo) / range).clamp(0.0, 1.0)).collect()
            } else {
                vec![0.0; dim.len()]
            }
        })
        .collect();
    MtsSample {
        id: s.id.clone(),
        label: s.label.clone(),
        values,
    }
}

/// Extends every dimension to `target` points by repeating its last value.
pub fn pad_to_length(s: &MtsSample, target: usize) -> Result<MtsSample> {
    if target < s.len() {
        return Err(StemError::InvalidTarget {
            sample: s.id.clone(),
            target,
            len: s.len(),
        });
    }
    let values = s
        .values()
        .iter()
        .map(|dim| {
            let last = *dim.last().expect("validated length >= 2");
            let mut out = Vec::with_capacity(target);
            out.extend_from_slice(dim);
            out.resize(target, last);
            out
        })
        .collect();
    Ok(MtsSample {
        id: s.id.clone(),
        label: s.label.clone(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample(values: Vec<Vec<f64>>) -> MtsSample {
        MtsSample::new("s", Some("a".into()), values).unwrap()
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(
            normalize_sample(&sample(vec![vec![2.0, 4.0, 6.0]])).dim(0),
            &[0.0, 0.5, 1.0]
        );
        assert_eq!(
            normalize_sample(&sample(vec![vec![5.0, 5.0, 5.0]])).dim(0),
            &[0.0, 0.0, 0.0]
        );
        assert_eq!(normalize_sample(&sample(vec![vec![1.0, 0.0]])).dim(0), &[1.0, 0.0]);
    }

    #[test]
    fn pad_examples() {
        let s = sample(vec![vec![0.1, 0.7]]);
        assert_eq!(pad_to_length(&s, 4).unwrap().dim(0), &[0.1, 0.7, 0.7, 0.7]);
        assert_eq!(pad_to_length(&s, 2).unwrap(), s);

        let s = sample(vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
        let p = pad_to_length(&s, 3).unwrap();
        assert_eq!(p.dim(0), &[1.0, 2.0, 2.0]);
        assert_eq!(p.dim(1), &[3.0, 4.0, 4.0]);

        assert!(matches!(
            pad_to_length(&s, 1),
            Err(StemError::InvalidTarget { target: 1, len: 2, .. })
        ));
    }

    #[test]
    fn sample_validation() {
        assert!(MtsSample::new("x", None, vec![vec![1.0]]).is_err());
        assert!(MtsSample::new("x", None, vec![]).is_err());
        assert!(MtsSample::new("x", None, vec![vec![1.0, 2.0], vec![1.0]]).is_err());
        assert!(MtsSample::new("x", None, vec![vec![1.0, f64::NAN]]).is_err());
    }

    #[test]
    fn dataset_properties() {
        let a = MtsSample::new("a", Some("z".into()), vec![vec![1.0, 2.0, 3.0]]).unwrap();
        let b = MtsSample::new("b", Some("y".into()), vec![vec![1.0, 2.0]]).unwrap();
        let ds = MtsDataset::new(vec![a.clone(), b]).unwrap();
        assert_eq!(ds.max_len(), 3);
        assert_eq!(ds.label_set(), vec!["y".to_string(), "z".to_string()]);
        assert!(MtsDataset::new(vec![a.clone(), a.clone()]).is_err());
        let c = MtsSample::new("c", None, vec![vec![1.0, 2.0], vec![0.0, 0.0]]).unwrap();
        assert!(matches!(MtsDataset::new(vec![a, c]), Err(StemError::Schema(_))));
        assert!(matches!(MtsDataset::new(vec![]), Err(StemError::EmptyDataset)));
    }

    fn dim_strategy() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-1e3f64..1e3, 2..30)
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(dim in dim_strategy()) {
            let once = normalize_sample(&sample(vec![dim]));
            let twice = normalize_sample(&once);
            for (a, b) in once.dim(0).iter().zip(twice.dim(0)) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }

        #[test]
        fn normalize_ignores_positive_affine(dim in dim_strategy(), a in 1e-3f64..1e3, b in -10.0f64..10.0) {
            let base = normalize_sample(&sample(vec![dim.clone()]));
            let moved = normalize_sample(&sample(vec![dim.iter().map(|v| a * v + b).collect()]));
            for (x, y) in base.dim(0).iter().zip(moved.dim(0)) {
                prop_assert!((x - y).abs() <= 1e-12, "{} vs {}", x, y);
                prop_assert!((0.0..=1.0).contains(y));
            }
        }

        #[test]
        fn padding_keeps_prefix(dim in dim_strategy(), extra in 0usize..20) {
            let s = sample(vec![dim.clone()]);
            let p = pad_to_length(&s, dim.len() + extra).unwrap();
            prop_assert_eq!(&p.dim(0)[..dim.len()], &dim[..]);
            prop_assert!(p.dim(0)[dim.len()..].iter().all(|v| *v == dim[dim.len() - 1]));
        }
    }
}
