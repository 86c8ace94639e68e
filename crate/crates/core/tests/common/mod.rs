#![allow(dead_code)]

use dendrotest_core::linkage::{lance_williams, normalize, Dendrogram, LinkageMethod, TiePolicy};
use dendrotest_core::treespace::{from_dendrogram, DendrogramTree, SplitTree};
use dendrotest_core::CondensedMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix<R: Rng>(rng: &mut R, m: usize) -> CondensedMatrix {
    CondensedMatrix::from_fn(m, |_, _| rng.random_range(0.01..1.0)).unwrap()
}

/// Normalized dendrogram on `p` leaves. With `levels > 0` merge heights are
/// rounded up to that many levels, which produces multifurcations.
pub fn random_dendrogram<R: Rng>(rng: &mut R, p: usize, levels: usize) -> Dendrogram {
    let d = random_matrix(rng, p);
    let (den, _) = lance_williams(&d, LinkageMethod::GroupAverage, &TiePolicy::Lexicographic).unwrap();
    let den = normalize(&den).unwrap();
    if levels == 0 {
        return den;
    }
    let q = levels as f64;
    let merges: Vec<_> = den
        .merges()
        .iter()
        .zip(den.heights())
        .map(|(s, h)| (s.left, s.right, ((h * q).ceil() / q).max(1.0 / q)))
        .collect();
    normalize(&Dendrogram::from_merges(p, &merges).unwrap()).unwrap()
}

pub fn random_dendrogram_tree<R: Rng>(rng: &mut R, p: usize) -> DendrogramTree {
    let levels = if rng.random_bool(0.3) { rng.random_range(2..5) } else { 0 };
    from_dendrogram(&random_dendrogram(rng, p, levels)).unwrap()
}

/// A tree with the topology of a random dendrogram but arbitrary edge lengths.
pub fn random_split_tree<R: Rng>(rng: &mut R, p: usize) -> SplitTree {
    let shape = random_dendrogram_tree(rng, p);
    let mut inner = Vec::new();
    for split in shape.inner().keys() {
        if rng.random_bool(0.85) {
            inner.push((split.clone(), rng.random_range(0.05..1.0)));
        }
    }
    let leaves = (0..p).map(|_| rng.random_range(0.05..1.0)).collect();
    SplitTree::new(p, inner, leaves).unwrap()
}

pub fn matrix_strategy(min_m: usize, max_m: usize) -> impl Strategy<Value = CondensedMatrix> {
    (min_m..=max_m).prop_flat_map(|m| {
        prop::collection::vec(0.01f64..1.0, m * (m - 1) / 2).prop_map(move |v| CondensedMatrix::new(m, v).unwrap())
    })
}
