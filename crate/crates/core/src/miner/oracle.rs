use std::collections::{HashMap, HashSet};

use super::{MinerConfig, Tuple};
use crate::symbolize::{EventCode, EventSequence};

/// Exhaustive reference miner for small inputs. Enumerates every window,
/// keeps those with enough distinct-sample support, and retains the ones
/// that cannot be extended by one more supported code.
pub fn brute_force_mine(seqs: &[EventSequence], cfg: &MinerConfig) -> Vec<Tuple> {
    if seqs.is_empty() {
        return Vec::new();
    }
    let sigma = cfg.min_support.resolve(seqs.len()) as usize;

    let mut holders: HashMap<Vec<EventCode>, HashSet<usize>> = HashMap::new();
    for (i, seq) in seqs.iter().enumerate() {
        let codes = seq.codes();
        for len in 1..=cfg.max_len.min(codes.len()) {
            for window in codes.windows(len) {
                holders.entry(window.to_vec()).or_default().insert(i);
            }
        }
    }

    let frequent: HashSet<&Vec<EventCode>> = holders
        .iter()
        .filter(|(_, samples)| samples.len() >= sigma)
        .map(|(t, _)| t)
        .collect();

    let mut out: Vec<Tuple> = frequent
        .iter()
        .filter(|t| t.len() == cfg.max_len || !frequent.iter().any(|u| u.len() == t.len() + 1 && u.starts_with(t)))
        .map(|t| Tuple::new((*t).clone()))
        .collect();
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::miner::MinSupport;

    fn seq(id: &str, codes: &[u32]) -> EventSequence {
        EventSequence::new(id, None, 2, codes.iter().map(|&c| EventCode(c)).collect()).unwrap()
    }

    fn cfg(sigma: u32, max_len: usize) -> MinerConfig {
        MinerConfig::new(MinSupport::Count(sigma), max_len).unwrap()
    }

    #[test]
    fn toy_pair() {
        let seqs = vec![seq("A", &[4, 8, 4, 8]), seq("B", &[4, 8, 0])];
        assert_eq!(
            brute_force_mine(&seqs, &cfg(2, 2)),
            vec![Tuple::from_codes([8]), Tuple::from_codes([4, 8])]
        );
    }

    #[test]
    fn single_pair_sequence() {
        assert_eq!(
            brute_force_mine(&[seq("A", &[1, 2])], &cfg(1, 2)),
            vec![Tuple::from_codes([2]), Tuple::from_codes([1, 2])]
        );
    }

    #[test]
    fn nothing_survives() {
        assert!(brute_force_mine(&[seq("A", &[1, 2])], &cfg(2, 2)).is_empty());
        assert!(brute_force_mine(&[], &cfg(1, 2)).is_empty());
    }
}
