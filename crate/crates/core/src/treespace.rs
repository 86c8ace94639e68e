//! Split-based (edge-length) representation of rooted metric trees.
//!
//! An inner edge is identified by the set `A` of leaves below it. A tree is a
//! pairwise compatible family of such splits with positive lengths plus one
//! length per leaf edge. Splits that are absent have length zero, so the
//! exponentially large ambient coordinate vector is stored sparsely.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Deref;

use crate::linkage::Dendrogram;
use crate::model::{condensed_len, offset, CondensedMatrix};
use crate::{Error, Result};

/// Tolerance for the leaf-depth-one condition of dendrogram trees.
pub const DEPTH_TOLERANCE: f64 = 1e-9;

/// A subset of the leaves `0..p`, stored as a bitset.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LeafSet {
    p: usize,
    words: Vec<u64>,
}

/// The leaves below an inner edge.
pub type Split = LeafSet;

impl LeafSet {
    pub fn empty(p: usize) -> Self {
        LeafSet { p, words: vec![0; p.div_ceil(64)] }
    }

    pub fn from_leaves(p: usize, leaves: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(p);
        for i in leaves {
            s.insert(i);
        }
        s
    }

    pub fn universe(&self) -> usize {
        self.p
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i < self.p, "leaf {i} out of range for p = {}", self.p);
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.p && self.words[i / 64] & (1 << (i % 64)) != 0
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn is_subset(&self, other: &LeafSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &LeafSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.p).filter(move |&i| self.contains(i))
    }
}

impl fmt::Debug for LeafSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Two splits can coexist in a rooted tree iff they are nested or disjoint.
pub fn splits_compatible(a: &Split, b: &Split) -> bool {
    a.is_subset(b) || b.is_subset(a) || a.is_disjoint(b)
}

/// A rooted tree on `p` labeled leaves given by its edge lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitTree {
    p: usize,
    inner: BTreeMap<Split, f64>,
    leaf_lengths: Vec<f64>,
}

impl SplitTree {
    /// Validates and builds a tree. Zero-length splits are dropped.
    pub fn new(p: usize, inner: impl IntoIterator<Item = (Split, f64)>, leaf_lengths: Vec<f64>) -> Result<Self> {
        if p < 2 {
            return Err(Error::arg(format!("a tree needs at least 2 leaves, got {p}")));
        }
        if leaf_lengths.len() != p {
            return Err(Error::arg(format!("expected {p} leaf lengths, got {}", leaf_lengths.len())));
        }
        if let Some(i) = leaf_lengths.iter().position(|l| !(l.is_finite() && *l >= 0.0)) {
            return Err(Error::arg(format!("leaf {i} has invalid length {}", leaf_lengths[i])));
        }
        let mut map = BTreeMap::new();
        for (split, length) in inner {
            if split.universe() != p {
                return Err(Error::arg(format!("split {split:?} is over {} leaves, expected {p}", split.universe())));
            }
            let size = split.len();
            if size < 2 || size >= p {
                return Err(Error::arg(format!("split {split:?} is not a nontrivial inner split")));
            }
            if !(length.is_finite() && length >= 0.0) {
                return Err(Error::arg(format!("split {split:?} has invalid length {length}")));
            }
            if length == 0.0 {
                continue;
            }
            if map.insert(split.clone(), length).is_some() {
                return Err(Error::arg(format!("split {split:?} listed twice")));
            }
        }
        let tree = SplitTree { p, inner: map, leaf_lengths };
        if let Some((a, b)) = tree.incompatible_pair() {
            return Err(Error::arg(format!("splits {a:?} and {b:?} are incompatible")));
        }
        Ok(tree)
    }

    pub(crate) fn from_parts(p: usize, inner: BTreeMap<Split, f64>, leaf_lengths: Vec<f64>) -> Self {
        SplitTree { p, inner, leaf_lengths }
    }

    pub fn leaf_count(&self) -> usize {
        self.p
    }

    pub fn inner(&self) -> &BTreeMap<Split, f64> {
        &self.inner
    }

    pub fn leaf_lengths(&self) -> &[f64] {
        &self.leaf_lengths
    }

    /// Length of the edge above `split`, zero when absent.
    pub fn length(&self, split: &Split) -> f64 {
        self.inner.get(split).copied().unwrap_or(0.0)
    }

    /// Some pair of stored splits that violates compatibility.
    pub fn incompatible_pair(&self) -> Option<(&Split, &Split)> {
        let splits: Vec<&Split> = self.inner.keys().collect();
        for (i, a) in splits.iter().enumerate() {
            for b in &splits[i + 1..] {
                if !splits_compatible(a, b) {
                    return Some((a, b));
                }
            }
        }
        None
    }

    /// Distance from every leaf to the root.
    pub fn depths(&self) -> Vec<f64> {
        let mut depth = self.leaf_lengths.clone();
        for (split, length) in &self.inner {
            for i in split.iter() {
                depth[i] += length;
            }
        }
        depth
    }

    /// Largest deviation of a leaf depth from one.
    pub fn depth_one_violation(&self) -> f64 {
        self.depths().iter().map(|d| (d - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// A split tree in which every leaf has depth one.
#[derive(Debug, Clone, PartialEq)]
pub struct DendrogramTree(SplitTree);

impl DendrogramTree {
    pub fn new(tree: SplitTree) -> Result<Self> {
        let off = tree.depth_one_violation();
        if off > DEPTH_TOLERANCE {
            return Err(Error::arg(format!("leaf depths deviate from one by {off:e}, above {DEPTH_TOLERANCE:e}")));
        }
        Ok(DendrogramTree(tree))
    }

    pub fn as_tree(&self) -> &SplitTree {
        &self.0
    }

    pub fn into_tree(self) -> SplitTree {
        self.0
    }
}

impl Deref for DendrogramTree {
    type Target = SplitTree;

    fn deref(&self) -> &SplitTree {
        &self.0
    }
}

impl AsRef<SplitTree> for DendrogramTree {
    fn as_ref(&self) -> &SplitTree {
        &self.0
    }
}

/// Metric tree of a height-normalized dendrogram. Every non-root cluster gets
/// an edge of length `parent height - own height`; leaf edges reach up to the
/// leaf's first merge.
pub fn from_dendrogram(d: &Dendrogram) -> Result<DendrogramTree> {
    if !d.is_normalized() {
        return Err(Error::arg("the dendrogram must be normalized to height one"));
    }
    let p = d.leaf_count();
    let parents = d.parents();
    let clusters = d.clusters();
    let mut inner = BTreeMap::new();
    for (k, leaves) in clusters.iter().enumerate() {
        let id = p + k;
        if let Some(parent) = parents[id] {
            let length = d.node_height(parent) - d.node_height(id);
            if length > 0.0 {
                inner.insert(LeafSet::from_leaves(p, leaves.iter().copied()), length);
            }
        }
    }
    let leaf_lengths = (0..p).map(|i| d.node_height(parents[i].expect("every leaf is merged"))).collect();
    DendrogramTree::new(SplitTree::from_parts(p, inner, leaf_lengths))
}

/// Path lengths between all pairs of leaves.
pub fn to_cophenetic(t: &SplitTree) -> CondensedMatrix {
    let p = t.p;
    let depth = t.depths();
    // Length shared by the root paths of i and j.
    let mut shared = vec![0.0; condensed_len(p)];
    for (split, length) in &t.inner {
        let leaves: Vec<usize> = split.iter().collect();
        for (a, &i) in leaves.iter().enumerate() {
            for &j in &leaves[a + 1..] {
                shared[offset(i, j, p)] += length;
            }
        }
    }
    let mut values = Vec::with_capacity(condensed_len(p));
    for i in 0..p {
        for j in i + 1..p {
            let v = depth[i] + depth[j] - 2.0 * shared[offset(i, j, p)];
            values.push(v.max(0.0));
        }
    }
    CondensedMatrix::from_raw(p, values)
}

/// Euclidean distance between the edge-length vectors of two trees, absent
/// splits counting as zero.
pub fn euclidean_norm_diff(t1: &SplitTree, t2: &SplitTree) -> Result<f64> {
    if t1.p != t2.p {
        return Err(Error::arg(format!("leaf counts differ: {} vs {}", t1.p, t2.p)));
    }
    let mut sq: f64 = t1.leaf_lengths.iter().zip(&t2.leaf_lengths).map(|(a, b)| (a - b) * (a - b)).sum();
    for (split, a) in &t1.inner {
        let b = t2.length(split);
        sq += (a - b) * (a - b);
    }
    for (split, b) in &t2.inner {
        if !t1.inner.contains_key(split) {
            sq += b * b;
        }
    }
    Ok(libm::sqrt(sq))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linkage::{lance_williams, normalize, LinkageMethod, TiePolicy};

    fn set(p: usize, leaves: &[usize]) -> Split {
        LeafSet::from_leaves(p, leaves.iter().copied())
    }

    #[test]
    fn compatibility_examples() {
        let p = 5;
        assert!(splits_compatible(&set(p, &[1, 2]), &set(p, &[1, 2, 3])));
        assert!(!splits_compatible(&set(p, &[1, 2]), &set(p, &[2, 3])));
        assert!(splits_compatible(&set(p, &[1, 2]), &set(p, &[3, 4])));
    }

    #[test]
    fn leaf_set_ops_across_words() {
        let p = 130;
        let a = set(p, &[0, 64, 129]);
        let b = set(p, &[0, 1, 64, 128, 129]);
        assert_eq!(a.len(), 3);
        assert!(a.is_subset(&b));
        assert!(!b.is_subset(&a));
        assert!(!a.is_disjoint(&b));
        assert_eq!(a.iter().collect::<Vec<_>>(), vec![0, 64, 129]);
        assert!(!a.contains(130));
    }

    #[test]
    fn from_dendrogram_three_leaves() {
        let d = CondensedMatrix::new(3, vec![2.0, 3.0, 2.0]).unwrap();
        let (den, _) = lance_williams(&d, LinkageMethod::GroupAverage, &TiePolicy::Lexicographic).unwrap();
        let tree = from_dendrogram(&normalize(&den).unwrap()).unwrap();
        let l = tree.leaf_lengths();
        assert!((l[0] - 0.8).abs() < 1e-12 && (l[1] - 0.8).abs() < 1e-12);
        assert_eq!(l[2], 1.0);
        assert_eq!(tree.inner().len(), 1);
        assert!((tree.length(&set(3, &[0, 1])) - 0.2).abs() < 1e-12);

        let coph = to_cophenetic(&tree);
        let expected = [1.6, 2.0, 2.0];
        for (a, b) in coph.values().iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn from_dendrogram_hand_tree() {
        // Heights 0.4 and 1: leaves (0.4, 0.4, 1), inner {0,1} of length 0.6.
        let den = Dendrogram::from_merges(3, &[(0, 1, 0.4), (3, 2, 1.0)]).unwrap();
        let tree = from_dendrogram(&den).unwrap();
        assert_eq!(tree.leaf_lengths(), &[0.4, 0.4, 1.0]);
        assert!((tree.length(&set(3, &[0, 1])) - 0.6).abs() < 1e-15);
        let coph = to_cophenetic(&tree);
        assert!((coph.get(0, 1) - 0.8).abs() < 1e-15);
        assert!((coph.get(0, 2) - 2.0).abs() < 1e-15);
        assert!((coph.get(1, 2) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn star_and_two_leaf_trees() {
        let star = Dendrogram::from_merges(4, &[(0, 1, 1.0), (4, 2, 1.0), (5, 3, 1.0)]).unwrap();
        let tree = from_dendrogram(&star).unwrap();
        assert!(tree.inner().is_empty());
        assert_eq!(tree.leaf_lengths(), &[1.0; 4]);
        assert!(to_cophenetic(&tree).values().iter().all(|v| *v == 2.0));

        let two = Dendrogram::from_merges(2, &[(0, 1, 1.0)]).unwrap();
        let tree = from_dendrogram(&two).unwrap();
        assert!(tree.inner().is_empty());
        assert_eq!(tree.leaf_lengths(), &[1.0, 1.0]);
    }

    #[test]
    fn rejects_unnormalized_and_incompatible() {
        let den = Dendrogram::from_merges(3, &[(0, 1, 0.4), (3, 2, 0.9)]).unwrap();
        assert!(from_dendrogram(&den).is_err());
        let bad = SplitTree::new(4, [(set(4, &[0, 1]), 0.2), (set(4, &[1, 2]), 0.2)], vec![0.5; 4]);
        assert!(bad.is_err());
        assert!(SplitTree::new(3, [(set(3, &[0, 1, 2]), 0.2)], vec![0.5; 3]).is_err());
        assert!(SplitTree::new(3, [(set(3, &[0]), 0.2)], vec![0.5; 3]).is_err());
    }

    #[test]
    fn zero_length_splits_are_dropped() {
        let t = SplitTree::new(3, [(set(3, &[0, 1]), 0.0)], vec![1.0; 3]).unwrap();
        assert!(t.inner().is_empty());
    }

    #[test]
    fn euclidean_examples() {
        let a = SplitTree::new(4, [(set(4, &[0, 1]), 0.5)], vec![0.5, 0.5, 1.0, 1.0]).unwrap();
        assert_eq!(euclidean_norm_diff(&a, &a).unwrap(), 0.0);
        let b = SplitTree::new(4, [(set(4, &[0, 1]), 0.7)], vec![0.3, 0.3, 1.0, 1.0]).unwrap();
        assert!((euclidean_norm_diff(&a, &b).unwrap() - libm::sqrt(3.0 * 0.04)).abs() < 1e-12);
        let c = SplitTree::new(4, [(set(4, &[2, 3]), 0.25)], vec![0.5, 0.5, 1.0, 1.0]).unwrap();
        let expected = libm::sqrt(0.5 * 0.5 + 0.25 * 0.25);
        assert!((euclidean_norm_diff(&a, &c).unwrap() - expected).abs() < 1e-12);
    }
}
