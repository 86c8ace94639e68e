//! Geodesics between rooted metric trees in tree space.
//!
//! Inner splits that one tree has and that conflict with some split of the
//! other tree cannot be carried along the whole path; they have to shrink to
//! zero before the conflicting splits of the other tree can grow. The
//! geodesic is described by a *support sequence* `(A_1, B_1), ..., (A_k, B_k)`
//! of such conflicting splits: on leg `i` the splits of `A_i` vanish and those
//! of `B_i` appear. Everything else (leaf edges, shared or compatible splits)
//! moves along a straight line.
//!
//! The support is found by successive refinement: start with a single pair
//! holding every conflicting split, and split a pair in two whenever a
//! minimum-weight vertex cover of its conflict graph weighs less than one.

mod flow;
mod oracle;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::treespace::{splits_compatible, Split, SplitTree};
use crate::{Error, Result};

pub use oracle::{brute_force_geodesic, ORACLE_CAP};

/// A cover lighter than this splits its support pair.
const COVER_THRESHOLD: f64 = 1.0 - 1e-10;

/// One leg of a support sequence: the splits of the first tree that vanish
/// and the splits of the second tree that appear.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportPair {
    pub a: Vec<(Split, f64)>,
    pub b: Vec<(Split, f64)>,
}

impl SupportPair {
    pub fn a_norm(&self) -> f64 {
        norm(&self.a)
    }

    pub fn b_norm(&self) -> f64 {
        norm(&self.b)
    }

    /// `‖A‖ / ‖B‖`.
    pub fn ratio(&self) -> f64 {
        self.a_norm() / self.b_norm()
    }
}

fn norm(edges: &[(Split, f64)]) -> f64 {
    libm::sqrt(edges.iter().map(|(_, l)| l * l).sum())
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SupportSequence {
    pub pairs: Vec<SupportPair>,
}

impl SupportSequence {
    /// Every `B_i` is compatible with every later `A_j`.
    pub fn satisfies_compatibility(&self) -> bool {
        self.pairs.iter().enumerate().all(|(i, earlier)| {
            self.pairs[i + 1..]
                .iter()
                .all(|later| earlier.b.iter().all(|(f, _)| later.a.iter().all(|(e, _)| splits_compatible(e, f))))
        })
    }

    /// Ratios `‖A_i‖ / ‖B_i‖` are nondecreasing (with relative slack `tol`).
    pub fn satisfies_ratio_order(&self, tol: f64) -> bool {
        self.pairs.windows(2).all(|w| w[0].ratio() <= w[1].ratio() * (1.0 + tol))
    }

    /// `Σ (‖A_i‖ + ‖B_i‖)²`.
    pub fn squared_length(&self) -> f64 {
        self.pairs
            .iter()
            .map(|p| {
                let s = p.a_norm() + p.b_norm();
                s * s
            })
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicResult {
    pub distance: f64,
    pub support: SupportSequence,
    /// Norm of the differences of the splits carried along the whole path.
    pub common_contribution: f64,
    /// Norm of the differences of the leaf edges.
    pub leaf_contribution: f64,
}

/// Splits of two trees sorted by how the geodesic treats them.
pub(crate) struct Layout {
    /// Splits present along the whole path, with their lengths in each tree.
    pub common: Vec<(Split, f64, f64)>,
    /// Splits of the first tree that conflict with the second tree.
    pub only_first: Vec<(Split, f64)>,
    /// Splits of the second tree that conflict with the first tree.
    pub only_second: Vec<(Split, f64)>,
    pub leaf_sq: f64,
}

impl Layout {
    pub(crate) fn new(t1: &SplitTree, t2: &SplitTree) -> Result<Self> {
        if t1.leaf_count() != t2.leaf_count() {
            return Err(Error::arg(format!("leaf counts differ: {} vs {}", t1.leaf_count(), t2.leaf_count())));
        }
        let leaf_sq = t1.leaf_lengths().iter().zip(t2.leaf_lengths()).map(|(a, b)| (a - b) * (a - b)).sum();
        let mut common: BTreeMap<Split, (f64, f64)> = BTreeMap::new();
        let mut only_first = Vec::new();
        let mut only_second = Vec::new();
        for (split, &len) in t1.inner() {
            if t2.inner().keys().all(|other| splits_compatible(split, other)) {
                common.insert(split.clone(), (len, t2.length(split)));
            } else {
                only_first.push((split.clone(), len));
            }
        }
        for (split, &len) in t2.inner() {
            if t1.inner().keys().all(|other| splits_compatible(split, other)) {
                common.entry(split.clone()).or_insert((0.0, len));
            } else {
                only_second.push((split.clone(), len));
            }
        }
        Ok(Layout {
            common: common.into_iter().map(|(s, (a, b))| (s, a, b)).collect(),
            only_first,
            only_second,
            leaf_sq,
        })
    }

    fn common_sq(&self) -> f64 {
        self.common.iter().map(|(_, a, b)| (a - b) * (a - b)).sum()
    }
}

/// Total order on trees, used to evaluate both directions identically.
fn tree_order(t1: &SplitTree, t2: &SplitTree) -> Ordering {
    let leaves = t1.leaf_lengths().iter().zip(t2.leaf_lengths()).map(|(a, b)| a.total_cmp(b)).find(|o| o.is_ne());
    let inner = || {
        t1.inner()
            .iter()
            .zip(t2.inner())
            .map(|((s, a), (r, b))| s.cmp(r).then(a.total_cmp(b)))
            .find(|o| o.is_ne())
            .unwrap_or_else(|| t1.inner().len().cmp(&t2.inner().len()))
    };
    leaves.unwrap_or_else(inner)
}

/// Geodesic distance and support between two trees on the same leaves.
///
/// The result is exactly symmetric: the reversed pair yields the same
/// distance and the mirrored support.
pub fn geodesic_distance(t1: &SplitTree, t2: &SplitTree) -> Result<GeodesicResult> {
    if t1.leaf_count() == t2.leaf_count() && tree_order(t1, t2) == Ordering::Greater {
        let mut result = ordered_geodesic(t2, t1)?;
        result.support.pairs.reverse();
        for pair in &mut result.support.pairs {
            core::mem::swap(&mut pair.a, &mut pair.b);
        }
        return Ok(result);
    }
    ordered_geodesic(t1, t2)
}

fn ordered_geodesic(t1: &SplitTree, t2: &SplitTree) -> Result<GeodesicResult> {
    let layout = Layout::new(t1, t2)?;
    let mut pairs = Vec::new();
    if !layout.only_first.is_empty() || !layout.only_second.is_empty() {
        pairs.push(SupportPair { a: layout.only_first.clone(), b: layout.only_second.clone() });
    }
    let mut i = 0;
    while i < pairs.len() {
        match refine(&pairs[i]) {
            Some((first, second)) => {
                pairs.splice(i..=i, [first, second]);
            }
            None => i += 1,
        }
    }
    let support = SupportSequence { pairs };
    let common_sq = layout.common_sq();
    let distance = libm::sqrt(layout.leaf_sq + common_sq + support.squared_length());
    Ok(GeodesicResult {
        distance,
        support,
        common_contribution: libm::sqrt(common_sq),
        leaf_contribution: libm::sqrt(layout.leaf_sq),
    })
}

/// Splits `(A, B)` into `(C1, D1), (C2, D2)` when that shortens the path,
/// i.e. when the conflict graph has a vertex cover `C1 ∪ D2` of normalized
/// weight below one.
fn refine(pair: &SupportPair) -> Option<(SupportPair, SupportPair)> {
    let (a_norm, b_norm) = (pair.a_norm(), pair.b_norm());
    if a_norm == 0.0 || b_norm == 0.0 {
        return None;
    }
    let left: Vec<f64> = pair.a.iter().map(|(_, l)| (l / a_norm) * (l / a_norm)).collect();
    let right: Vec<f64> = pair.b.iter().map(|(_, l)| (l / b_norm) * (l / b_norm)).collect();
    let mut edges = Vec::new();
    for (i, (e, _)) in pair.a.iter().enumerate() {
        for (j, (f, _)) in pair.b.iter().enumerate() {
            if !splits_compatible(e, f) {
                edges.push((i, j));
            }
        }
    }
    let (cover_a, cover_b) = flow::min_weight_vertex_cover(&left, &right, &edges);
    let weight: f64 =
        left.iter().zip(&cover_a).chain(right.iter().zip(&cover_b)).filter(|(_, c)| **c).map(|(w, _)| w).sum();
    if weight >= COVER_THRESHOLD {
        return None;
    }
    let mut first = SupportPair { a: Vec::new(), b: Vec::new() };
    let mut second = SupportPair { a: Vec::new(), b: Vec::new() };
    for (edge, covered) in pair.a.iter().zip(&cover_a) {
        if *covered { &mut first.a } else { &mut second.a }.push(edge.clone());
    }
    for (edge, covered) in pair.b.iter().zip(&cover_b) {
        if *covered { &mut second.b } else { &mut first.b }.push(edge.clone());
    }
    if [&first.a, &first.b, &second.a, &second.b].iter().any(|s| s.is_empty()) {
        return None;
    }
    Some((first, second))
}

/// Length of the path that shrinks every conflicting split of `t1` at once
/// and then grows those of `t2`. An upper bound on the geodesic distance.
pub fn cone_distance(t1: &SplitTree, t2: &SplitTree) -> Result<f64> {
    let layout = Layout::new(t1, t2)?;
    let a = norm(&layout.only_first);
    let b = norm(&layout.only_second);
    Ok(libm::sqrt(layout.leaf_sq + layout.common_sq() + (a + b) * (a + b)))
}

/// The tree at arc-length fraction `s` along the geodesic from `t1` to `t2`.
pub fn geodesic_point(t1: &SplitTree, t2: &SplitTree, s: f64) -> Result<SplitTree> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::arg(format!("path fraction {s} is outside [0, 1]")));
    }
    let layout = Layout::new(t1, t2)?;
    if s == 0.0 {
        return Ok(t1.clone());
    }
    if s == 1.0 {
        return Ok(t2.clone());
    }
    let result = geodesic_distance(t1, t2)?;
    Ok(point_on(&layout, &result.support, t1, t2, s))
}

fn point_on(layout: &Layout, support: &SupportSequence, t1: &SplitTree, t2: &SplitTree, s: f64) -> SplitTree {
    let lerp = |a: f64, b: f64| (1.0 - s) * a + s * b;
    let leaf_lengths = t1.leaf_lengths().iter().zip(t2.leaf_lengths()).map(|(a, b)| lerp(*a, *b).max(0.0)).collect();
    let mut inner = BTreeMap::new();
    for (split, a, b) in &layout.common {
        let len = lerp(*a, *b);
        if len > 0.0 {
            inner.insert(split.clone(), len);
        }
    }
    for pair in &support.pairs {
        let (a_norm, b_norm) = (pair.a_norm(), pair.b_norm());
        // Signed position along the unfolded leg: positive while the A
        // splits are still present, negative once the B splits have appeared.
        let x = (1.0 - s) * a_norm - s * b_norm;
        if x > 0.0 {
            for (split, len) in &pair.a {
                inner.insert(split.clone(), len * x / a_norm);
            }
        } else if x < 0.0 {
            for (split, len) in &pair.b {
                inner.insert(split.clone(), len * -x / b_norm);
            }
        }
    }
    SplitTree::from_parts(t1.leaf_count(), inner, leaf_lengths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::treespace::{euclidean_norm_diff, LeafSet};
    use alloc::vec;

    fn set(p: usize, leaves: &[usize]) -> Split {
        LeafSet::from_leaves(p, leaves.iter().copied())
    }

    fn three_leaf_pair() -> (SplitTree, SplitTree) {
        let t1 = SplitTree::new(3, [(set(3, &[0, 1]), 0.5)], vec![0.5, 0.5, 1.0]).unwrap();
        let t2 = SplitTree::new(3, [(set(3, &[1, 2]), 0.5)], vec![1.0, 0.5, 0.5]).unwrap();
        (t1, t2)
    }

    #[test]
    fn identical_trees() {
        let (t1, _) = three_leaf_pair();
        let r = geodesic_distance(&t1, &t1).unwrap();
        assert_eq!(r.distance, 0.0);
        assert!(r.support.pairs.is_empty());
    }

    #[test]
    fn three_leaf_conflict() {
        let (t1, t2) = three_leaf_pair();
        let r = geodesic_distance(&t1, &t2).unwrap();
        assert!((r.distance - libm::sqrt(1.5)).abs() < 1e-12);
        assert_eq!(r.support.pairs.len(), 1);
        assert!((cone_distance(&t1, &t2).unwrap() - libm::sqrt(1.5)).abs() < 1e-12);
        let oracle = brute_force_geodesic(&t1, &t2).unwrap();
        assert!((oracle.distance - r.distance).abs() < 1e-12);
    }

    #[test]
    fn three_leaf_midpoint() {
        let (t1, t2) = three_leaf_pair();
        let mid = geodesic_point(&t1, &t2, 0.5).unwrap();
        assert!(mid.inner().is_empty());
        for (a, b) in mid.leaf_lengths().iter().zip([0.75, 0.5, 0.75]) {
            assert!((a - b).abs() < 1e-12);
        }
        let d = geodesic_distance(&t1, &t2).unwrap().distance;
        let d1 = geodesic_distance(&t1, &mid).unwrap().distance;
        let d2 = geodesic_distance(&mid, &t2).unwrap().distance;
        assert!((d1 + d2 - d).abs() < 1e-12);
    }

    #[test]
    fn endpoints_and_range() {
        let (t1, t2) = three_leaf_pair();
        assert_eq!(geodesic_point(&t1, &t2, 0.0).unwrap(), t1);
        assert_eq!(geodesic_point(&t1, &t2, 1.0).unwrap(), t2);
        assert!(geodesic_point(&t1, &t2, 1.5).is_err());
        assert!(geodesic_point(&t1, &t2, -0.1).is_err());
    }

    #[test]
    fn shared_topology_is_euclidean() {
        let t1 = SplitTree::new(4, [(set(4, &[0, 1]), 0.5)], vec![0.5, 0.5, 1.0, 1.0]).unwrap();
        let t2 = SplitTree::new(4, [(set(4, &[0, 1]), 0.3)], vec![0.7, 0.7, 1.0, 1.0]).unwrap();
        let e = euclidean_norm_diff(&t1, &t2).unwrap();
        assert!((geodesic_distance(&t1, &t2).unwrap().distance - e).abs() < 1e-12);
        assert!((cone_distance(&t1, &t2).unwrap() - e).abs() < 1e-12);
        let mid = geodesic_point(&t1, &t2, 0.5).unwrap();
        assert!((mid.length(&set(4, &[0, 1])) - 0.4).abs() < 1e-12);
        assert!((mid.leaf_lengths()[0] - 0.6).abs() < 1e-12);
    }

    #[test]
    fn star_target_reduces_to_euclidean() {
        let t1 = SplitTree::new(4, [(set(4, &[0, 1]), 0.5)], vec![0.5, 0.5, 1.0, 1.0]).unwrap();
        let star = SplitTree::new(4, [], vec![1.0; 4]).unwrap();
        let e = euclidean_norm_diff(&t1, &star).unwrap();
        assert!((cone_distance(&t1, &star).unwrap() - e).abs() < 1e-12);
        assert!((geodesic_distance(&t1, &star).unwrap().distance - e).abs() < 1e-12);
    }

    #[test]
    fn refinement_splits_independent_conflicts() {
        // Two independent conflicts under a shared root split: the cone path
        // is strictly longer than the geodesic.
        let p = 6;
        let t1 = SplitTree::new(p, [(set(p, &[0, 1]), 0.1), (set(p, &[3, 4]), 0.8)], vec![1.0; p]).unwrap();
        let t2 = SplitTree::new(p, [(set(p, &[1, 2]), 0.8), (set(p, &[4, 5]), 0.1)], vec![1.0; p]).unwrap();
        let r = geodesic_distance(&t1, &t2).unwrap();
        assert_eq!(r.support.pairs.len(), 2);
        assert!(r.support.satisfies_compatibility());
        assert!(r.support.satisfies_ratio_order(1e-12));
        // Legs are (0.1 vs 0.8) twice, so the distance is sqrt(2)·0.9.
        assert!((r.distance - libm::sqrt(2.0) * 0.9).abs() < 1e-12);
        assert!(r.distance < cone_distance(&t1, &t2).unwrap());
        let oracle = brute_force_geodesic(&t1, &t2).unwrap();
        assert!((oracle.distance - r.distance).abs() < 1e-12);
    }

    #[test]
    fn mismatched_leaf_counts() {
        let (t1, _) = three_leaf_pair();
        let t4 = SplitTree::new(4, [], vec![1.0; 4]).unwrap();
        assert!(geodesic_distance(&t1, &t4).is_err());
        assert!(cone_distance(&t1, &t4).is_err());
    }
}
