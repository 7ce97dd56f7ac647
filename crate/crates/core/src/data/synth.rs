//! Seeded generator of labeled piecewise-linear multidimensional series.
//!
//! Every class carries a motif: for each dimension, a list of trend
//! segments. The per-dimension segment lists are tiled cyclically over the
//! `length - 1` steps of a sample, each step moving the value by `+step`,
//! `0` or `-step`, and every point then receives independent uniform noise
//! in `[-noise_amplitude, +noise_amplitude]`.
//!
//! The spec file is TOML:
//!
//! ```toml
//! samples_per_class = 100
//! length = 100
//! noise_amplitude = 0.0
//! seed = 7
//! # optional
//! step = 1.0
//! separable = true
//! random_phase = false
//!
//! [[classes]]
//! label = "a"
//! motif = [
//!   [{ direction = "up", length = 4 }, { direction = "down", length = 4 }],
//!   [{ direction = "flat", length = 8 }],
//! ]
//! ```

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{MtsDataset, MtsSample};
use crate::error::{Result, StemError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Flat,
    Down,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Up => 1.0,
            Direction::Flat => 0.0,
            Direction::Down => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Segment {
    pub direction: Direction,
    pub length: usize,
}

impl Segment {
    pub fn new(direction: Direction, length: usize) -> Self {
        Self { direction, length }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthClass {
    pub label: String,
    /// One segment list per dimension.
    pub motif: Vec<Vec<Segment>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub classes: Vec<SynthClass>,
    pub samples_per_class: usize,
    pub length: usize,
    pub noise_amplitude: f64,
    pub seed: u64,
    /// Per-step trend magnitude.
    #[serde(default = "default_step")]
    pub step: f64,
    /// Requires `noise_amplitude < step / 2`.
    #[serde(default)]
    pub separable: bool,
    /// Starts every sample at a random offset into its class motif.
    #[serde(default)]
    pub random_phase: bool,
}

fn default_step() -> f64 {
    1.0
}

impl SynthSpec {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| StemError::SynthSpec(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| StemError::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| StemError::SynthSpec(format!("{}: {e}", path.display())))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| StemError::SynthSpec(e.to_string()))
    }

    pub fn dims(&self) -> usize {
        self.classes.first().map_or(0, |c| c.motif.len())
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(StemError::SynthSpec(m));
        if self.classes.is_empty() {
            return err("no classes".into());
        }
        if self.samples_per_class == 0 {
            return err("samples_per_class must be positive".into());
        }
        if self.length < 2 {
            return err(format!("length must be at least 2, got {}", self.length));
        }
        if !(self.noise_amplitude >= 0.0 && self.noise_amplitude.is_finite()) {
            return err(format!(
                "noise_amplitude must be a finite non-negative number, got {}",
                self.noise_amplitude
            ));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return err(format!("step must be positive, got {}", self.step));
        }
        if self.separable && self.noise_amplitude >= self.step / 2.0 {
            return err(format!(
                "separable mode needs noise_amplitude < step / 2 ({} >= {})",
                self.noise_amplitude,
                self.step / 2.0
            ));
        }
        let dims = self.dims();
        for (i, class) in self.classes.iter().enumerate() {
            if class.motif.is_empty() {
                return err(format!("class `{}` has an empty motif", class.label));
            }
            if class.motif.len() != dims {
                return err(format!(
                    "class `{}` has {} motif dimensions, expected {dims}",
                    class.label,
                    class.motif.len()
                ));
            }
            for (d, segs) in class.motif.iter().enumerate() {
                if segs.is_empty() || segs.iter().any(|s| s.length == 0) {
                    return err(format!(
                        "class `{}` dimension {d}: segments must be non-empty with positive length",
                        class.label
                    ));
                }
            }
            for other in &self.classes[..i] {
                if other.label == class.label {
                    return err(format!("duplicate class label `{}`", class.label));
                }
                if other.motif == class.motif {
                    return err(format!(
                        "classes `{}` and `{}` share the same motif",
                        other.label, class.label
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Expands a segment list into one direction per step.
fn unroll(segments: &[Segment]) -> Vec<Direction> {
    segments
        .iter()
        .flat_map(|s| std::iter::repeat_n(s.direction, s.length))
        .collect()
}

/// Generates the dataset described by `spec`. Identical specs give
/// identical datasets.
pub fn generate_synthetic(spec: &SynthSpec) -> Result<MtsDataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let width = spec.samples_per_class.to_string().len();
    let mut samples = Vec::with_capacity(spec.classes.len() * spec.samples_per_class);

    for class in &spec.classes {
        let patterns: Vec<Vec<Direction>> = class.motif.iter().map(|s| unroll(s)).collect();
        let period = patterns.iter().map(Vec::len).max().unwrap_or(1);
        for j in 0..spec.samples_per_class {
            let offset = if spec.random_phase { rng.gen_range(0..period) } else { 0 };
            let values = patterns
                .iter()
                .map(|pattern| {
                    let mut level = 0.0;
                    (0..spec.length)
                        .map(|t| {
                            if t > 0 {
                                let dir = pattern[(t - 1 + offset) % pattern.len()];
                                level += dir.sign() * spec.step;
                            }
                            if spec.noise_amplitude > 0.0 {
                                level + rng.gen_range(-spec.noise_amplitude..=spec.noise_amplitude)
                            } else {
                                level
                            }
                        })
                        .collect()
                })
                .collect();
            samples.push(MtsSample::new(
                format!("{}-{:0width$}", class.label, j, width = width),
                Some(class.label.clone()),
                values,
            )?);
        }
    }
    MtsDataset::new(samples)
}
