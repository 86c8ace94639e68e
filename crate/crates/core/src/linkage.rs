//! Agglomerative clustering by the Lance-Williams recursion.
//!
//! Starting from singleton clusters, the closest pair `I, J` is merged and
//! the distance from the union to every other cluster `K` is updated with
//!
//! ```text
//! d(I∪J, K) = α_I d(I,K) + α_J d(J,K) + β d(I,J) + γ |d(I,K) - d(J,K)|
//! ```
//!
//! The tree distance `d_T(i, j)` is the inter-cluster distance at the merge
//! that first puts `i` and `j` in the same cluster.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{condensed_len, offset, CondensedMatrix, Partition};
use crate::{Error, Result};

/// Relative tolerance under which two candidate merge distances tie.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Update coefficients for one merge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub alpha_i: f64,
    pub alpha_j: f64,
    pub beta: f64,
    pub gamma: f64,
}

/// Computes coefficients from the sizes `(n_I, n_J, n_K)`.
pub type CoefficientRule = fn(usize, usize, usize) -> Coefficients;

/// A user-supplied member of the Lance-Williams family.
#[derive(Clone, Copy)]
pub struct CustomLinkage {
    pub name: &'static str,
    pub rule: CoefficientRule,
}

impl fmt::Debug for CustomLinkage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomLinkage").field("name", &self.name).finish()
    }
}

#[derive(Debug, Clone, Copy)]
pub enum LinkageMethod {
    GroupAverage,
    Centroid,
    Ward,
    /// Single linkage.
    NearestNeighbor,
    /// Complete linkage.
    FurthestNeighbor,
    Custom(CustomLinkage),
}

impl PartialEq for LinkageMethod {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (LinkageMethod::Custom(a), LinkageMethod::Custom(b)) => a.name == b.name,
            _ => core::mem::discriminant(self) == core::mem::discriminant(other),
        }
    }
}

impl LinkageMethod {
    pub const NAMED: [LinkageMethod; 5] = [
        LinkageMethod::GroupAverage,
        LinkageMethod::Centroid,
        LinkageMethod::Ward,
        LinkageMethod::NearestNeighbor,
        LinkageMethod::FurthestNeighbor,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            LinkageMethod::GroupAverage => "group_average",
            LinkageMethod::Centroid => "centroid",
            LinkageMethod::Ward => "ward",
            LinkageMethod::NearestNeighbor => "nearest_neighbor",
            LinkageMethod::FurthestNeighbor => "furthest_neighbor",
            LinkageMethod::Custom(c) => c.name,
        }
    }

    pub fn coefficients(&self, n_i: usize, n_j: usize, n_k: usize) -> Coefficients {
        let (ni, nj, nk) = (n_i as f64, n_j as f64, n_k as f64);
        let nij = ni + nj;
        match self {
            LinkageMethod::GroupAverage => Coefficients { alpha_i: ni / nij, alpha_j: nj / nij, beta: 0.0, gamma: 0.0 },
            LinkageMethod::Centroid => {
                Coefficients { alpha_i: ni / nij, alpha_j: nj / nij, beta: -ni * nj / (nij * nij), gamma: 0.0 }
            }
            LinkageMethod::Ward => Coefficients {
                alpha_i: (ni + nk) / (nij + nk),
                alpha_j: (nj + nk) / (nij + nk),
                beta: -nk / (nij + nk),
                gamma: 0.0,
            },
            LinkageMethod::NearestNeighbor => Coefficients { alpha_i: 0.5, alpha_j: 0.5, beta: 0.0, gamma: -0.5 },
            LinkageMethod::FurthestNeighbor => Coefficients { alpha_i: 0.5, alpha_j: 0.5, beta: 0.0, gamma: 0.5 },
            LinkageMethod::Custom(c) => (c.rule)(n_i, n_j, n_k),
        }
    }

    /// Whether every merge is guaranteed not to decrease the merge distance.
    pub fn is_monotone(&self) -> bool {
        !matches!(self, LinkageMethod::Centroid | LinkageMethod::Custom(_))
    }
}

/// How to choose among pairs that attain the minimum distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TiePolicy {
    /// Take the pair `(I, J)` that is smallest when clusters are ordered by
    /// their smallest leaf.
    Lexicographic,
    /// Pick uniformly among tied pairs with a generator seeded from `seed`.
    Random { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergeStep {
    /// Cluster with the smaller minimum leaf.
    pub left: usize,
    pub right: usize,
    /// Inter-cluster distance `d(I, J)` at the merge.
    pub distance: f64,
    /// Leaves are `0..m`, internal nodes `m..2m-1` in merge order.
    pub new_id: usize,
}

/// A merge sequence with node heights.
///
/// Before normalization the height of a merge is half its distance, so the
/// cophenetic distance of two leaves is the Lance-Williams `d_T`. Heights are
/// clamped to the running maximum when the method produced an inversion.
#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    m: usize,
    merges: Vec<MergeStep>,
    heights: Vec<f64>,
    normalized: bool,
    monotone_violations: usize,
    gamma_nonzero: bool,
}

impl Dendrogram {
    /// Builds a dendrogram from `(left, right, height)` merges, ids as in
    /// [`MergeStep`]. Heights must not decrease from child to parent.
    pub fn from_merges(m: usize, merges: &[(usize, usize, f64)]) -> Result<Self> {
        if m < 2 {
            return Err(Error::arg(format!("a dendrogram needs at least 2 leaves, got {m}")));
        }
        if merges.len() != m - 1 {
            return Err(Error::arg(format!("{m} leaves need {} merges, got {}", m - 1, merges.len())));
        }
        let mut used = vec![false; 2 * m - 1];
        let mut node_height = vec![0.0; 2 * m - 1];
        let mut steps = Vec::with_capacity(m - 1);
        let mut heights = Vec::with_capacity(m - 1);
        for (k, &(a, b, h)) in merges.iter().enumerate() {
            let new_id = m + k;
            for child in [a, b] {
                if child >= new_id {
                    return Err(Error::arg(format!("merge {k} refers to node {child}, which does not exist yet")));
                }
                if core::mem::replace(&mut used[child], true) {
                    return Err(Error::arg(format!("node {child} is merged twice")));
                }
            }
            if !(h.is_finite() && h >= 0.0) {
                return Err(Error::arg(format!("merge {k} has invalid height {h}")));
            }
            if h < node_height[a] || h < node_height[b] {
                return Err(Error::arg(format!("merge {k} is lower than one of its children")));
            }
            node_height[new_id] = h;
            steps.push(MergeStep { left: a, right: b, distance: 2.0 * h, new_id });
            heights.push(h);
        }
        let root = heights[m - 2];
        Ok(Dendrogram {
            m,
            merges: steps,
            normalized: root == 1.0 && heights.iter().all(|h| *h <= 1.0),
            heights,
            monotone_violations: 0,
            gamma_nonzero: false,
        })
    }

    pub fn leaf_count(&self) -> usize {
        self.m
    }

    pub fn merges(&self) -> &[MergeStep] {
        &self.merges
    }

    /// Height of internal node `m + k`, indexed by `k`.
    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn root_height(&self) -> f64 {
        self.heights.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Number of merges whose height had to be raised to keep the tree
    /// monotone.
    pub fn monotone_violations(&self) -> usize {
        self.monotone_violations
    }

    /// Set when some update used a nonzero `γ`, which makes the map from
    /// input to tree distance only piecewise linear.
    pub fn gamma_nonzero(&self) -> bool {
        self.gamma_nonzero
    }

    /// Height of any node; leaves sit at zero.
    pub fn node_height(&self, id: usize) -> f64 {
        if id < self.m {
            0.0
        } else {
            self.heights[id - self.m]
        }
    }

    /// Leaves below every internal node, indexed by `k` for node `m + k`.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let m = self.m;
        let mut out: Vec<Vec<usize>> = Vec::with_capacity(m - 1);
        for step in &self.merges {
            let mut leaves = Vec::new();
            for child in [step.left, step.right] {
                if child < m {
                    leaves.push(child);
                } else {
                    leaves.extend_from_slice(&out[child - m]);
                }
            }
            leaves.sort_unstable();
            out.push(leaves);
        }
        out
    }

    /// Parent of every node (`None` for the root).
    pub fn parents(&self) -> Vec<Option<usize>> {
        let mut parent = vec![None; 2 * self.m - 1];
        for step in &self.merges {
            parent[step.left] = Some(step.new_id);
            parent[step.right] = Some(step.new_id);
        }
        parent
    }

    /// Flat clustering from cutting the tree at `height`: leaves joined by a
    /// merge at or below it share a block.
    pub fn cut(&self, height: f64) -> Partition {
        let m = self.m;
        let mut root: Vec<usize> = (0..2 * m - 1).collect();
        fn find(root: &mut [usize], mut x: usize) -> usize {
            while root[x] != x {
                root[x] = root[root[x]];
                x = root[x];
            }
            x
        }
        for (k, step) in self.merges.iter().enumerate() {
            if self.heights[k] <= height {
                let a = find(&mut root, step.left);
                let b = find(&mut root, step.right);
                root[a] = step.new_id;
                root[b] = step.new_id;
            }
        }
        let assignment: Vec<usize> = (0..m).map(|i| find(&mut root, i)).collect();
        Partition::from_assignment(&assignment).expect("union-find labels cover every leaf")
    }
}

/// Runs the Lance-Williams algorithm on `d0`. Returns the (unnormalized)
/// dendrogram and the tree distance `d_T`.
pub fn lance_williams(
    d0: &CondensedMatrix,
    method: LinkageMethod,
    ties: &TiePolicy,
) -> Result<(Dendrogram, CondensedMatrix)> {
    let m = d0.m();
    if m < 2 {
        return Err(Error::arg("clustering needs at least 2 labels"));
    }
    if let Some(v) = d0.values().iter().find(|v| **v < 0.0) {
        return Err(Error::arg(format!("negative input distance {v}")));
    }

    // Dense working matrix. A cluster lives in the slot of its smallest leaf,
    // so slot order is the lexicographic cluster order.
    let mut dist = vec![0.0; m * m];
    for (i, j, v) in d0.iter() {
        dist[i * m + j] = v;
        dist[j * m + i] = v;
    }
    let mut active = vec![true; m];
    let mut size = vec![1usize; m];
    let mut node = (0..m).collect::<Vec<_>>();
    let mut members: Vec<Vec<usize>> = (0..m).map(|i| vec![i]).collect();
    let mut d_t = vec![0.0; condensed_len(m)];
    let mut rng = match ties {
        TiePolicy::Random { seed } => Some(ChaCha8Rng::seed_from_u64(*seed)),
        TiePolicy::Lexicographic => None,
    };

    let mut merges = Vec::with_capacity(m - 1);
    let mut heights = Vec::with_capacity(m - 1);
    let mut running_max = 0.0_f64;
    let mut violations = 0;
    let mut gamma_nonzero = false;
    let mut tied: Vec<(usize, usize)> = Vec::new();

    for step in 0..m - 1 {
        let mut best = f64::INFINITY;
        for a in (0..m).filter(|&a| active[a]) {
            let row = &dist[a * m..(a + 1) * m];
            for b in a + 1..m {
                if active[b] && row[b] < best {
                    best = row[b];
                }
            }
        }
        let cutoff = best + TIE_TOLERANCE * best.max(1.0);

        let (a, b) = match rng.as_mut() {
            None => first_within(&dist, &active, m, cutoff),
            Some(rng) => {
                tied.clear();
                for a in (0..m).filter(|&a| active[a]) {
                    for b in a + 1..m {
                        if active[b] && dist[a * m + b] <= cutoff {
                            tied.push((a, b));
                        }
                    }
                }
                tied[rng.random_range(0..tied.len())]
            }
        };

        let d_ab = dist[a * m + b];
        for k in (0..m).filter(|&k| active[k] && k != a && k != b) {
            let c = method.coefficients(size[a], size[b], size[k]);
            if c.gamma != 0.0 {
                gamma_nonzero = true;
            }
            let (d_ak, d_bk) = (dist[a * m + k], dist[b * m + k]);
            let updated = c.alpha_i * d_ak + c.alpha_j * d_bk + c.beta * d_ab + c.gamma * (d_ak - d_bk).abs();
            if !(updated >= 0.0 && updated.is_finite()) {
                return Err(Error::arg(format!("{} produced the invalid distance {updated}", method.name())));
            }
            dist[a * m + k] = updated;
            dist[k * m + a] = updated;
        }

        for &i in &members[a] {
            for &j in &members[b] {
                d_t[offset(i, j, m)] = d_ab;
            }
        }
        let moved = core::mem::take(&mut members[b]);
        members[a].extend(moved);

        let mut height = d_ab / 2.0;
        if height < running_max {
            if height < running_max - TIE_TOLERANCE * running_max.max(1.0) {
                violations += 1;
            }
            height = running_max;
        }
        running_max = height;

        let new_id = m + step;
        merges.push(MergeStep { left: node[a], right: node[b], distance: d_ab, new_id });
        heights.push(height);
        active[b] = false;
        size[a] += size[b];
        node[a] = new_id;
    }

    let dendrogram =
        Dendrogram { m, merges, heights, normalized: false, monotone_violations: violations, gamma_nonzero };
    Ok((dendrogram, CondensedMatrix::from_raw(m, d_t)))
}

fn first_within(dist: &[f64], active: &[bool], m: usize, cutoff: f64) -> (usize, usize) {
    for a in (0..m).filter(|&a| active[a]) {
        for b in a + 1..m {
            if active[b] && dist[a * m + b] <= cutoff {
                return (a, b);
            }
        }
    }
    unreachable!("the minimum is always within its own cutoff")
}

/// Rescales heights so the root sits at 1.
pub fn normalize(d: &Dendrogram) -> Result<Dendrogram> {
    let top = d.root_height();
    if top <= 0.0 {
        return Err(Error::Degenerate("every merge has height zero (all leaves identical)".into()));
    }
    let mut out = d.clone();
    for h in &mut out.heights {
        *h = if *h == top { 1.0 } else { *h / top };
    }
    out.normalized = true;
    Ok(out)
}

/// Cophenetic distance: twice the height of the merge that first joins two
/// leaves.
pub fn cophenetic(d: &Dendrogram) -> CondensedMatrix {
    let m = d.m;
    let mut values = vec![0.0; condensed_len(m)];
    let clusters = d.clusters();
    let leaves_of = |id: usize| -> Vec<usize> {
        if id < m {
            vec![id]
        } else {
            clusters[id - m].clone()
        }
    };
    for (k, step) in d.merges.iter().enumerate() {
        let value = 2.0 * d.heights[k];
        let right = leaves_of(step.right);
        for i in leaves_of(step.left) {
            for &j in &right {
                values[offset(i, j, m)] = value;
            }
        }
    }
    CondensedMatrix::from_raw(m, values)
}

/// Whether re-running the algorithm on its own output `d_t` reproduces it
/// within `1e-12`.
pub fn projection_check(d_t: &CondensedMatrix, method: LinkageMethod, ties: &TiePolicy) -> bool {
    match lance_williams(d_t, method, ties) {
        Ok((_, again)) => {
            d_t.values().iter().zip(again.values()).all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs().max(1.0))
        }
        Err(_) => false,
    }
}
