//! Variable-length tuple mining over event sequences.
//!
//! Every contiguous window of up to `max_len` codes is inserted into a
//! forest of tries keyed by its first code. Nodes carry document support
//! (distinct samples containing the root-to-node tuple) and occurrence
//! counts. Pruning removes unsupported nodes bottom-up; the surviving
//! root-to-leaf paths are the mined features.

mod forest;
mod oracle;

pub use forest::{build_forest, build_forest_parallel, extract_rts_features, prune_bottom_up, NodeRef, PrefixForest};
pub use oracle::brute_force_mine;

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, StemError};
use crate::symbolize::EventCode;

pub const DEFAULT_MAX_LEN: usize = 5;
pub const DEFAULT_SUPPORT_FRACTION: f64 = 0.05;

/// A contiguous run of event codes. Ordered by length, then lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Tuple(Vec<EventCode>);

impl Tuple {
    pub fn new(codes: Vec<EventCode>) -> Self {
        Self(codes)
    }

    pub fn from_codes<I: IntoIterator<Item = u32>>(codes: I) -> Self {
        Self(codes.into_iter().map(EventCode).collect())
    }

    pub fn codes(&self) -> &[EventCode] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_prefix_of(&self, other: &Tuple) -> bool {
        other.0.starts_with(&self.0)
    }
}

impl std::borrow::Borrow<[EventCode]> for Tuple {
    fn borrow(&self) -> &[EventCode] {
        &self.0
    }
}

impl Ord for Tuple {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Tuple {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Tuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

/// A mined feature together with its support statistics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinedTuple {
    pub tuple: Tuple,
    pub doc_support: u32,
    pub occ_count: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MinSupport {
    /// Absolute number of samples.
    Count(u32),
    /// Fraction of the mined samples, rounded up.
    Fraction(f64),
}

impl MinSupport {
    pub fn resolve(self, n_samples: usize) -> u32 {
        match self {
            MinSupport::Count(c) => c,
            // slack keeps products like 0.07 * 100 from rounding up past the integer
            MinSupport::Fraction(f) => (((f * n_samples as f64) - 1e-9).ceil() as u32).max(1),
        }
    }
}

impl fmt::Display for MinSupport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MinSupport::Count(c) => write!(f, "{c}"),
            MinSupport::Fraction(x) => write!(f, "{x:?}"),
        }
    }
}

impl std::str::FromStr for MinSupport {
    type Err = StemError;

    /// Integers are absolute counts; anything with a decimal point or
    /// exponent is a fraction of the sample count.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let support = if s.contains(['.', 'e', 'E']) {
            MinSupport::Fraction(
                s.parse()
                    .map_err(|_| StemError::Config(format!("bad min support `{s}`")))?,
            )
        } else {
            MinSupport::Count(
                s.parse()
                    .map_err(|_| StemError::Config(format!("bad min support `{s}`")))?,
            )
        };
        support.validate()?;
        Ok(support)
    }
}

impl MinSupport {
    fn validate(self) -> Result<()> {
        match self {
            MinSupport::Count(0) => Err(StemError::Config("min support must be at least 1".into())),
            MinSupport::Fraction(f) if !(f > 0.0 && f <= 1.0) => Err(StemError::Config(format!(
                "fractional min support must lie in (0, 1], got {f}"
            ))),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinerConfig {
    pub min_support: MinSupport,
    pub max_len: usize,
    /// Leaves whose support falls below `gain_gamma * parent support` are
    /// pruned as well. Zero disables the test.
    pub gain_gamma: f64,
}

impl Default for MinerConfig {
    fn default() -> Self {
        Self {
            min_support: MinSupport::Fraction(DEFAULT_SUPPORT_FRACTION),
            max_len: DEFAULT_MAX_LEN,
            gain_gamma: 0.0,
        }
    }
}

impl MinerConfig {
    pub fn new(min_support: MinSupport, max_len: usize) -> Result<Self> {
        let cfg = Self {
            min_support,
            max_len,
            gain_gamma: 0.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_gain_gamma(mut self, gamma: f64) -> Result<Self> {
        self.gain_gamma = gamma;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        self.min_support.validate()?;
        if self.max_len == 0 {
            return Err(StemError::Config("max tuple length must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.gain_gamma) {
            return Err(StemError::Config(format!(
                "gain_gamma must lie in [0, 1], got {}",
                self.gain_gamma
            )));
        }
        Ok(())
    }
}

/// Counts the distinct sequences that contain `tuple` as a contiguous window.
pub fn document_support(tuple: &[EventCode], seqs: &[crate::symbolize::EventSequence]) -> usize {
    seqs.iter()
        .filter(|s| !tuple.is_empty() && s.codes().windows(tuple.len()).any(|w| w == tuple))
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tuple_order_is_length_then_lex() {
        let mut v = vec![
            Tuple::from_codes([4, 8]),
            Tuple::from_codes([8]),
            Tuple::from_codes([0, 9]),
            Tuple::from_codes([1]),
        ];
        v.sort();
        assert_eq!(
            v,
            vec![
                Tuple::from_codes([1]),
                Tuple::from_codes([8]),
                Tuple::from_codes([0, 9]),
                Tuple::from_codes([4, 8]),
            ]
        );
        assert_eq!(Tuple::from_codes([4, 8]).to_string(), "(4,8)");
    }

    #[test]
    fn min_support_parsing() {
        assert_eq!("3".parse::<MinSupport>().unwrap(), MinSupport::Count(3));
        assert_eq!("0.25".parse::<MinSupport>().unwrap(), MinSupport::Fraction(0.25));
        assert!("0".parse::<MinSupport>().is_err());
        assert!("1.5".parse::<MinSupport>().is_err());
        assert!("x".parse::<MinSupport>().is_err());
        assert_eq!(MinSupport::Fraction(0.05).resolve(400), 20);
        assert_eq!(MinSupport::Fraction(0.05).resolve(10), 1);
        assert_eq!(MinSupport::Fraction(0.05).resolve(0), 1);
        assert_eq!(MinSupport::Count(7).resolve(3), 7);
    }

    #[test]
    fn config_validation() {
        assert!(MinerConfig::new(MinSupport::Count(1), 0).is_err());
        assert!(MinerConfig::new(MinSupport::Count(1), 1)
            .unwrap()
            .with_gain_gamma(1.5)
            .is_err());
        assert!(MinerConfig::default().validate().is_ok());
    }
}
