//! Labels, condensed distance matrices, partitions and the co-classification
//! (Hamming) distance built from them.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// The ordered list of items being sorted. Index `i` of a label is stable for
/// the lifetime of the set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSet {
    labels: Vec<String>,
}

impl LabelSet {
    pub fn new(labels: Vec<String>) -> Result<Self> {
        if labels.len() < 2 {
            return Err(Error::arg(format!("a label set needs at least 2 labels, got {}", labels.len())));
        }
        for (i, a) in labels.iter().enumerate() {
            if labels[..i].contains(a) {
                return Err(Error::arg(format!("duplicate label {a:?}")));
            }
        }
        Ok(LabelSet { labels })
    }

    /// Labels `"0"`, `"1"`, ... for index-only data.
    pub fn numbered(m: usize) -> Result<Self> {
        Self::new((0..m).map(|i| format!("{i}")).collect())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == name)
    }
}

/// Number of stored entries of a condensed `m x m` matrix.
#[inline]
pub const fn condensed_len(m: usize) -> usize {
    m * m.saturating_sub(1) / 2
}

/// Offset of the unordered pair `{i, j}` in the condensed order
/// `(0,1), (0,2), ..., (0,m-1), (1,2), ...`.
pub fn condensed_index(i: usize, j: usize, m: usize) -> Result<usize> {
    if i == j {
        return Err(Error::arg(format!("diagonal pair ({i}, {j}) has no condensed slot")));
    }
    if i >= m || j >= m {
        return Err(Error::arg(format!("pair ({i}, {j}) out of range for m = {m}")));
    }
    Ok(offset(i, j, m))
}

#[inline]
pub(crate) fn offset(i: usize, j: usize, m: usize) -> usize {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    a * m - a * (a + 1) / 2 + (b - a - 1)
}

/// Inverse of [`condensed_index`]: the pair `(i, j)` with `i < j` stored at `k`.
pub fn condensed_pair(k: usize, m: usize) -> Result<(usize, usize)> {
    if k >= condensed_len(m) {
        return Err(Error::arg(format!("offset {k} out of range for m = {m}")));
    }
    let mut row_start = 0;
    for i in 0..m - 1 {
        let row_len = m - 1 - i;
        if k < row_start + row_len {
            return Ok((i, i + 1 + (k - row_start)));
        }
        row_start += row_len;
    }
    unreachable!("offset bounds were checked")
}

/// A symmetric, zero-diagonal, nonnegative matrix over `m` labels stored as
/// its strict upper triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct CondensedMatrix {
    m: usize,
    values: Vec<f64>,
}

impl CondensedMatrix {
    pub fn new(m: usize, values: Vec<f64>) -> Result<Self> {
        if m < 2 {
            return Err(Error::arg(format!("a distance matrix needs m >= 2, got {m}")));
        }
        if values.len() != condensed_len(m) {
            return Err(Error::arg(format!(
                "expected {} condensed entries for m = {m}, got {}",
                condensed_len(m),
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite() || *v < 0.0) {
            let (i, j) = condensed_pair(k, m)?;
            return Err(Error::arg(format!("entry ({i}, {j}) = {} is not a finite nonnegative distance", values[k])));
        }
        Ok(CondensedMatrix { m, values })
    }

    pub fn zeros(m: usize) -> Result<Self> {
        Self::new(m, vec![0.0; condensed_len(m)])
    }

    /// Builds a matrix from `f(i, j)` evaluated for every `i < j`.
    pub fn from_fn(m: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(condensed_len(m));
        for i in 0..m {
            for j in i + 1..m {
                values.push(f(i, j));
            }
        }
        Self::new(m, values)
    }

    /// Unchecked constructor for values produced internally.
    pub(crate) fn from_raw(m: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), condensed_len(m));
        CondensedMatrix { m, values }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Entry `(i, j)`; the diagonal is zero.
    ///
    /// Panics when `i` or `j` is out of range.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.m && j < self.m, "pair ({i}, {j}) out of range for m = {}", self.m);
        if i == j {
            0.0
        } else {
            self.values[offset(i, j, self.m)]
        }
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.m, self.values.iter().map(|v| v * factor).collect())
    }

    /// `(i, j, value)` for every stored pair, in condensed order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let m = self.m;
        (0..m)
            .flat_map(move |i| (i + 1..m).map(move |j| (i, j)))
            .zip(self.values.iter().copied())
            .map(|((i, j), v)| (i, j, v))
    }

    /// Largest amount by which `d(i,k) <= max(d(i,j), d(j,k))` fails over all
    /// triples; zero for an ultrametric.
    pub fn ultrametric_violation(&self) -> f64 {
        let m = self.m;
        let mut worst = 0.0_f64;
        for i in 0..m {
            for j in 0..m {
                if j == i {
                    continue;
                }
                for k in i + 1..m {
                    if k == j {
                        continue;
                    }
                    let excess = self.get(i, k) - self.get(i, j).max(self.get(j, k));
                    worst = worst.max(excess);
                }
            }
        }
        worst
    }

    /// Largest amount by which the triangle inequality fails.
    pub fn triangle_violation(&self) -> f64 {
        let m = self.m;
        let mut worst = 0.0_f64;
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    if i == j || j == k || i == k {
                        continue;
                    }
                    worst = worst.max(self.get(i, k) - self.get(i, j) - self.get(j, k));
                }
            }
        }
        worst
    }
}

/// One participant's grouping of the `m` labels into disjoint nonempty blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    m: usize,
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    /// Validates `blocks` and stores them canonically: members ascending,
    /// blocks ordered by their smallest member.
    pub fn new(m: usize, mut blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; m];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::arg(format!("block {b} is empty")));
            }
            for &i in block {
                if i >= m {
                    return Err(Error::arg(format!("label index {i} out of range for m = {m}")));
                }
                if core::mem::replace(&mut seen[i], true) {
                    return Err(Error::arg(format!("label index {i} appears in more than one block")));
                }
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::arg(format!("label index {i} is not in any block")));
        }
        for block in &mut blocks {
            block.sort_unstable();
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        Ok(Partition { m, blocks })
    }

    /// Builds a partition from a block id per label. Ids need not be contiguous.
    pub fn from_assignment(assignment: &[usize]) -> Result<Self> {
        let mut ids: Vec<usize> = assignment.to_vec();
        ids.sort_unstable();
        ids.dedup();
        let mut blocks = vec![Vec::new(); ids.len()];
        for (i, a) in assignment.iter().enumerate() {
            let b = ids.binary_search(a).expect("id collected above");
            blocks[b].push(i);
        }
        Self::new(assignment.len(), blocks)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Block number of every label.
    pub fn assignment(&self) -> Vec<usize> {
        let mut out = vec![0; self.m];
        for (b, block) in self.blocks.iter().enumerate() {
            for &i in block {
                out[i] = b;
            }
        }
        out
    }
}

/// The 0/1 matrix with a zero exactly where two labels share a block.
pub fn co_classification(partition: &Partition) -> CondensedMatrix {
    let block = partition.assignment();
    let m = partition.m();
    let mut values = Vec::with_capacity(condensed_len(m));
    for i in 0..m {
        for j in i + 1..m {
            values.push(if block[i] == block[j] { 0.0 } else { 1.0 });
        }
    }
    CondensedMatrix::from_raw(m, values)
}

/// Entrywise mean of the given matrices. Applied to co-classification
/// matrices of `N` participants this is `1 - n(i,j)/N`, where `n(i,j)` counts
/// the participants that put `i` and `j` together.
pub fn hamming_mean<'a, I>(xs: I) -> Result<CondensedMatrix>
where
    I: IntoIterator<Item = &'a CondensedMatrix>,
{
    let mut iter = xs.into_iter();
    let first = iter.next().ok_or_else(|| Error::arg("cannot average an empty list of matrices"))?;
    let m = first.m();
    let mut sum = first.values.clone();
    let mut count = 1usize;
    for x in iter {
        if x.m() != m {
            return Err(Error::arg(format!("matrix sizes differ: {} vs {m}", x.m())));
        }
        for (s, v) in sum.iter_mut().zip(&x.values) {
            *s += v;
        }
        count += 1;
    }
    let n = count as f64;
    for s in &mut sum {
        *s /= n;
    }
    Ok(CondensedMatrix::from_raw(m, sum))
}

/// Frobenius distance between the full symmetric matrices, i.e. every
/// off-diagonal difference counted twice.
pub fn frobenius(t1: &CondensedMatrix, t2: &CondensedMatrix) -> Result<f64> {
    if t1.m() != t2.m() {
        return Err(Error::arg(format!("matrix sizes differ: {} vs {}", t1.m(), t2.m())));
    }
    let sq: f64 = t1.values.iter().zip(&t2.values).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(libm::sqrt(2.0 * sq))
}

/// One response in a [`GroupedSample`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Participant {
    pub id: String,
    pub group: String,
    pub partition: Partition,
}

/// Card-sort responses over a common label set, each tagged with a group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupedSample {
    labels: LabelSet,
    participants: Vec<Participant>,
}

impl GroupedSample {
    pub fn new(labels: LabelSet, participants: Vec<Participant>) -> Result<Self> {
        for p in &participants {
            if p.partition.m() != labels.len() {
                return Err(Error::arg(format!(
                    "participant {:?} partitions {} labels, expected {}",
                    p.id,
                    p.partition.m(),
                    labels.len()
                )));
            }
        }
        Ok(GroupedSample { labels, participants })
    }

    pub fn labels(&self) -> &LabelSet {
        &self.labels
    }

    pub fn participants(&self) -> &[Participant] {
        &self.participants
    }

    /// Group names in order of first appearance.
    pub fn groups(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for p in &self.participants {
            if !out.contains(&p.group.as_str()) {
                out.push(&p.group);
            }
        }
        out
    }

    /// Indices of the participants of `group`, in input order.
    pub fn members(&self, group: &str) -> Vec<usize> {
        self.participants.iter().enumerate().filter(|(_, p)| p.group == group).map(|(i, _)| i).collect()
    }

    pub fn co_classifications(&self) -> Vec<CondensedMatrix> {
        self.participants.iter().map(|p| co_classification(&p.partition)).collect()
    }
}
