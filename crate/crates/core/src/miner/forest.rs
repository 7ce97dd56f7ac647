use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{MinedTuple, MinerConfig, Tuple};
use crate::error::{Result, StemError};
use crate::symbolize::{EventCode, EventSequence};

type NodeId = usize;

#[derive(Debug, Clone)]
struct Node {
    code: EventCode,
    doc_support: u32,
    occ_count: u64,
    children: BTreeMap<EventCode, NodeId>,
}

impl Node {
    fn new(code: EventCode) -> Self {
        Self {
            code,
            doc_support: 0,
            occ_count: 0,
            children: BTreeMap::new(),
        }
    }
}

/// A forest of tries, one per distinct first event, stored in an arena.
#[derive(Debug, Clone)]
pub struct PrefixForest {
    nodes: Vec<Node>,
    roots: BTreeMap<EventCode, NodeId>,
    max_len: usize,
    n_samples: usize,
    dims: usize,
}

/// Borrowed view of one node.
#[derive(Clone, Copy)]
pub struct NodeRef<'a> {
    forest: &'a PrefixForest,
    id: NodeId,
}

impl<'a> NodeRef<'a> {
    fn node(&self) -> &'a Node {
        &self.forest.nodes[self.id]
    }

    pub fn code(&self) -> EventCode {
        self.node().code
    }

    pub fn doc_support(&self) -> u32 {
        self.node().doc_support
    }

    pub fn occ_count(&self) -> u64 {
        self.node().occ_count
    }

    pub fn is_leaf(&self) -> bool {
        self.node().children.is_empty()
    }

    pub fn child(&self, code: EventCode) -> Option<NodeRef<'a>> {
        let forest = self.forest;
        self.node().children.get(&code).map(|&id| NodeRef { forest, id })
    }

    /// Children in ascending code order.
    pub fn children(&self) -> impl Iterator<Item = NodeRef<'a>> + 'a {
        let forest = self.forest;
        self.node().children.values().map(move |&id| NodeRef { forest, id })
    }
}

impl PrefixForest {
    fn empty(max_len: usize, dims: usize) -> Self {
        Self {
            nodes: Vec::new(),
            roots: BTreeMap::new(),
            max_len,
            n_samples: 0,
            dims,
        }
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn roots(&self) -> impl Iterator<Item = NodeRef<'_>> {
        self.roots.values().map(move |&id| NodeRef { forest: self, id })
    }

    pub fn root(&self, code: EventCode) -> Option<NodeRef<'_>> {
        self.roots.get(&code).map(|&id| NodeRef { forest: self, id })
    }

    /// Looks up the node at the end of `path`.
    pub fn find(&self, path: &[EventCode]) -> Option<NodeRef<'_>> {
        let (first, rest) = path.split_first()?;
        rest.iter().try_fold(self.root(*first)?, |node, c| node.child(*c))
    }

    /// Every root-to-node tuple with its statistics, in depth-first code order.
    pub fn paths(&self) -> Vec<MinedTuple> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut path = Vec::new();
        for &root in self.roots.values() {
            self.collect_paths(root, &mut path, &mut out, false);
        }
        out
    }

    fn collect_paths(&self, id: NodeId, path: &mut Vec<EventCode>, out: &mut Vec<MinedTuple>, leaves_only: bool) {
        let node = &self.nodes[id];
        path.push(node.code);
        if !leaves_only || node.children.is_empty() {
            out.push(MinedTuple {
                tuple: Tuple::new(path.clone()),
                doc_support: node.doc_support,
                occ_count: node.occ_count,
            });
        }
        for &child in node.children.values() {
            self.collect_paths(child, path, out, leaves_only);
        }
        path.pop();
    }

    fn insert_sequence(&mut self, codes: &[EventCode], last_seen: &mut Vec<usize>, stamp: usize) {
        for start in 0..codes.len() {
            let end = (start + self.max_len).min(codes.len());
            let mut parent: Option<NodeId> = None;
            for &code in &codes[start..end] {
                let id = self.child_or_insert(parent, code);
                if last_seen.len() < self.nodes.len() {
                    last_seen.resize(self.nodes.len(), 0);
                }
                let node = &mut self.nodes[id];
                node.occ_count += 1;
                if last_seen[id] != stamp {
                    last_seen[id] = stamp;
                    node.doc_support += 1;
                }
                parent = Some(id);
            }
        }
    }

    fn child_or_insert(&mut self, parent: Option<NodeId>, code: EventCode) -> NodeId {
        let next = self.nodes.len();
        let slot = match parent {
            None => self.roots.entry(code),
            Some(p) => self.nodes[p].children.entry(code),
        };
        let id = *slot.or_insert(next);
        if id == next {
            self.nodes.push(Node::new(code));
        }
        id
    }

    /// Merges a forest built over a disjoint set of samples into `self`.
    /// Supports and occurrence counts add.
    pub fn merge(mut self, other: PrefixForest) -> Result<PrefixForest> {
        if self.max_len != other.max_len || self.dims != other.dims {
            return Err(StemError::Config(format!(
                "cannot merge forests with (max_len, dims) = ({}, {}) and ({}, {})",
                self.max_len, self.dims, other.max_len, other.dims
            )));
        }
        for &root in other.roots.values() {
            self.merge_node(None, &other, root);
        }
        self.n_samples += other.n_samples;
        Ok(self)
    }

    fn merge_node(&mut self, parent: Option<NodeId>, other: &PrefixForest, other_id: NodeId) {
        let src = &other.nodes[other_id];
        let id = self.child_or_insert(parent, src.code);
        self.nodes[id].doc_support += src.doc_support;
        self.nodes[id].occ_count += src.occ_count;
        for &child in src.children.values() {
            self.merge_node(Some(id), other, child);
        }
    }

    fn copy_subtree_if(&self, id: NodeId, keep: &[bool], into: &mut PrefixForest, parent: Option<NodeId>) {
        let node = &self.nodes[id];
        let new_id = into.child_or_insert(parent, node.code);
        into.nodes[new_id].doc_support = node.doc_support;
        into.nodes[new_id].occ_count = node.occ_count;
        for &child in node.children.values() {
            if keep[child] {
                self.copy_subtree_if(child, keep, into, Some(new_id));
            }
        }
    }
}

fn check_input(seqs: &[EventSequence], cfg: &MinerConfig) -> Result<usize> {
    cfg.validate()?;
    let first = seqs
        .first()
        .ok_or_else(|| StemError::EmptyInput("no event sequences to mine".into()))?;
    let dims = first.dims();
    if let Some(bad) = seqs.iter().find(|s| s.dims() != dims) {
        return Err(StemError::Schema(format!(
            "sequence `{}` has {} dimensions, expected {dims}",
            bad.sample_id(),
            bad.dims()
        )));
    }
    Ok(dims)
}

fn build_unchecked(seqs: &[EventSequence], max_len: usize, dims: usize) -> PrefixForest {
    let mut forest = PrefixForest::empty(max_len, dims);
    let mut last_seen = Vec::new();
    for (i, seq) in seqs.iter().enumerate() {
        forest.insert_sequence(seq.codes(), &mut last_seen, i + 1);
    }
    forest.n_samples = seqs.len();
    forest
}

/// Inserts every window of length `1..=max_len` of every sequence. Each
/// sequence counts as one sample for document support.
pub fn build_forest(seqs: &[EventSequence], cfg: &MinerConfig) -> Result<PrefixForest> {
    let dims = check_input(seqs, cfg)?;
    Ok(build_unchecked(seqs, cfg.max_len, dims))
}

/// Builds per-chunk forests on the rayon pool and merges them. Produces the
/// same logical forest as [`build_forest`].
pub fn build_forest_parallel(seqs: &[EventSequence], cfg: &MinerConfig, chunks: usize) -> Result<PrefixForest> {
    let dims = check_input(seqs, cfg)?;
    let chunk_len = seqs.len().div_ceil(chunks.max(1)).max(1);
    let parts: Vec<PrefixForest> = seqs
        .par_chunks(chunk_len)
        .map(|chunk| build_unchecked(chunk, cfg.max_len, dims))
        .collect();
    let mut parts = parts.into_iter();
    let first = parts.next().expect("non-empty input yields a chunk");
    parts.try_fold(first, PrefixForest::merge)
}

/// Post-order pruning: drops every node below the resolved minimum support,
/// then (when `gain_gamma > 0`) every node left childless whose support is
/// below `gain_gamma` times its parent's.
pub fn prune_bottom_up(forest: &PrefixForest, cfg: &MinerConfig) -> PrefixForest {
    let sigma = cfg.min_support.resolve(forest.n_samples);
    let mut keep = vec![false; forest.nodes.len()];
    for &root in forest.roots.values() {
        mark(forest, root, None, sigma, cfg.gain_gamma, &mut keep);
    }
    let mut pruned = PrefixForest::empty(forest.max_len, forest.dims);
    pruned.n_samples = forest.n_samples;
    for &root in forest.roots.values() {
        if keep[root] {
            forest.copy_subtree_if(root, &keep, &mut pruned, None);
        }
    }
    pruned
}

fn mark(
    forest: &PrefixForest,
    id: NodeId,
    parent_support: Option<u32>,
    sigma: u32,
    gamma: f64,
    keep: &mut [bool],
) -> bool {
    let node = &forest.nodes[id];
    let mut has_child = false;
    for &child in node.children.values() {
        has_child |= mark(forest, child, Some(node.doc_support), sigma, gamma, keep);
    }
    let mut survives = node.doc_support >= sigma;
    if survives && !has_child && gamma > 0.0 {
        if let Some(p) = parent_support {
            survives = f64::from(node.doc_support) >= gamma * f64::from(p);
        }
    }
    keep[id] = survives;
    survives
}

/// Root-to-leaf paths of a pruned forest, sorted by length then codes.
pub fn extract_rts_features(forest: &PrefixForest) -> Vec<MinedTuple> {
    let mut out = Vec::new();
    let mut path = Vec::new();
    for &root in forest.roots.values() {
        forest.collect_paths(root, &mut path, &mut out, true);
    }
    out.sort_by(|a, b| a.tuple.cmp(&b.tuple));
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

    fn codes(c: &[u32]) -> Vec<EventCode> {
        c.iter().map(|&c| EventCode(c)).collect()
    }

    fn toy() -> Vec<EventSequence> {
        vec![seq("A", &[4, 8, 4, 8]), seq("B", &[4, 8, 0])]
    }

    #[test]
    fn toy_forest_supports() {
        let f = build_forest(&toy(), &cfg(1, 2)).unwrap();
        let doc = |p: &[u32]| f.find(&codes(p)).map(|n| n.doc_support());
        assert_eq!(doc(&[4]), Some(2));
        assert_eq!(doc(&[4, 8]), Some(2));
        assert_eq!(doc(&[8]), Some(2));
        assert_eq!(doc(&[8, 4]), Some(1));
        assert_eq!(doc(&[8, 0]), Some(1));
        assert_eq!(doc(&[0]), Some(1));
        assert_eq!(f.node_count(), 6);
        assert_eq!(f.find(&codes(&[4])).unwrap().occ_count(), 3);
        assert_eq!(f.find(&codes(&[4, 8])).unwrap().occ_count(), 3);
        let roots: Vec<_> = f.roots().map(|n| n.code().0).collect();
        assert_eq!(roots, vec![0, 4, 8]);
    }

    #[test]
    fn single_window() {
        let f = build_forest(&[seq("A", &[7])], &cfg(1, 3)).unwrap();
        let root = f.find(&codes(&[7])).unwrap();
        assert_eq!((root.doc_support(), root.occ_count(), root.is_leaf()), (1, 1, true));
        assert_eq!(f.node_count(), 1);
    }

    #[test]
    fn repeated_window_counts_once_per_sample() {
        let f = build_forest(&[seq("A", &[4, 4, 4])], &cfg(1, 1)).unwrap();
        let n = f.find(&codes(&[4])).unwrap();
        assert_eq!((n.occ_count(), n.doc_support()), (3, 1));
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(build_forest(&[], &cfg(1, 2)), Err(StemError::EmptyInput(_))));
    }

    #[test]
    fn mixed_dims_are_rejected() {
        let other = EventSequence::new("C", None, 1, codes(&[1])).unwrap();
        assert!(build_forest(&[seq("A", &[1]), other], &cfg(1, 2)).is_err());
    }

    #[test]
    fn prune_toy() {
        let f = build_forest(&toy(), &cfg(2, 2)).unwrap();
        let p = prune_bottom_up(&f, &cfg(2, 2));
        let mut survivors: Vec<_> = p.paths().into_iter().map(|m| m.tuple).collect();
        survivors.sort();
        assert_eq!(
            survivors,
            vec![
                Tuple::from_codes([4]),
                Tuple::from_codes([8]),
                Tuple::from_codes([4, 8])
            ]
        );
        let feats: Vec<_> = extract_rts_features(&p).into_iter().map(|m| m.tuple).collect();
        assert_eq!(feats, vec![Tuple::from_codes([8]), Tuple::from_codes([4, 8])]);
    }

    #[test]
    fn prune_identity_and_empty() {
        let f = build_forest(&toy(), &cfg(1, 2)).unwrap();
        assert_eq!(prune_bottom_up(&f, &cfg(1, 2)).paths(), f.paths());
        assert!(prune_bottom_up(&f, &cfg(3, 2)).is_empty());
        assert!(extract_rts_features(&prune_bottom_up(&f, &cfg(3, 2))).is_empty());
    }

    #[test]
    fn isolated_roots_and_chains() {
        let f = build_forest(&[seq("A", &[1]), seq("B", &[2])], &cfg(1, 3)).unwrap();
        let feats: Vec<_> = extract_rts_features(&f).into_iter().map(|m| m.tuple).collect();
        assert_eq!(feats, vec![Tuple::from_codes([1]), Tuple::from_codes([2])]);

        // root 3 -> 5 survives in both samples; (5) is its own root
        let f = build_forest(&[seq("A", &[3, 5]), seq("B", &[3, 5])], &cfg(2, 2)).unwrap();
        let p = prune_bottom_up(&f, &cfg(2, 2));
        let feats: Vec<_> = extract_rts_features(&p).into_iter().map(|m| m.tuple).collect();
        assert_eq!(feats, vec![Tuple::from_codes([5]), Tuple::from_codes([3, 5])]);
    }

    #[test]
    fn gain_test_trims_weak_leaves() {
        // (1) in 4 samples, (1,2) in 4, (1,2,3) in 1
        let seqs = vec![
            seq("a", &[1, 2, 3]),
            seq("b", &[1, 2]),
            seq("c", &[1, 2]),
            seq("d", &[1, 2]),
        ];
        let plain = cfg(1, 3);
        let f = build_forest(&seqs, &plain).unwrap();
        let feats = |c: &MinerConfig| -> Vec<Tuple> {
            extract_rts_features(&prune_bottom_up(&f, c))
                .into_iter()
                .map(|m| m.tuple)
                .collect()
        };
        assert!(feats(&plain).contains(&Tuple::from_codes([1, 2, 3])));
        let gated = plain.with_gain_gamma(0.5).unwrap();
        let got = feats(&gated);
        assert!(!got.contains(&Tuple::from_codes([1, 2, 3])));
        assert!(got.contains(&Tuple::from_codes([1, 2])));
        // roots have no parent, so (3) survives despite its low support
        assert!(got.contains(&Tuple::from_codes([3])));
    }

    #[test]
    fn parallel_build_matches_sequential() {
        let seqs: Vec<_> = (0..17)
            .map(|i| seq(&format!("s{i}"), &[(i % 3) as u32, 4, (i % 5) as u32, 4, 8]))
            .collect();
        let c = cfg(1, 3);
        let a = build_forest(&seqs, &c).unwrap();
        for chunks in [1, 2, 4, 17, 40] {
            let b = build_forest_parallel(&seqs, &c, chunks).unwrap();
            assert_eq!(a.paths(), b.paths());
            assert_eq!(b.n_samples(), 17);
        }
    }
}
