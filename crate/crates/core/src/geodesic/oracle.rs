//! Exhaustive geodesic search for small trees, used as an independent check
//! of the refinement algorithm.

use alloc::vec::Vec;

use super::{GeodesicResult, SupportPair, SupportSequence};
use crate::treespace::{splits_compatible, Split, SplitTree};
use crate::{Error, Result};

/// Largest number of conflicting splits per tree the oracle accepts.
pub const ORACLE_CAP: usize = 8;

struct Search<'a> {
    a: &'a [(Split, f64)],
    b: &'a [(Split, f64)],
    /// `compatible[j]` has bit `i` set when `b[j]` is compatible with `a[i]`.
    compatible: Vec<u32>,
    best: f64,
    best_pairs: Vec<(u32, u32)>,
    pairs: Vec<(u32, u32)>,
}

impl Search<'_> {
    fn norm(edges: &[(Split, f64)], mask: u32) -> f64 {
        let sq: f64 = edges.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, (_, l))| l * l).sum();
        libm::sqrt(sq)
    }

    fn run(&mut self, rem_a: u32, rem_b: u32, last_ratio: f64, acc: f64) {
        if rem_a == 0 && rem_b == 0 {
            if acc < self.best {
                self.best = acc;
                self.best_pairs = self.pairs.clone();
            }
            return;
        }
        if rem_a == 0 || rem_b == 0 {
            return;
        }
        let mut sub_a = rem_a;
        while sub_a != 0 {
            let later_a = rem_a & !sub_a;
            let a_norm = Self::norm(self.a, sub_a);
            let mut sub_b = rem_b;
            while sub_b != 0 {
                let ok =
                    (0..self.b.len()).filter(|j| sub_b & (1 << j) != 0).all(|j| later_a & !self.compatible[j] == 0);
                if ok {
                    let b_norm = Self::norm(self.b, sub_b);
                    let ratio = a_norm / b_norm;
                    let leg = (a_norm + b_norm) * (a_norm + b_norm);
                    if ratio >= last_ratio * (1.0 - 1e-12) && acc + leg < self.best {
                        self.pairs.push((sub_a, sub_b));
                        self.run(later_a, rem_b & !sub_b, ratio, acc + leg);
                        self.pairs.pop();
                    }
                }
                sub_b = (sub_b - 1) & rem_b;
            }
            sub_a = (sub_a - 1) & rem_a;
        }
    }
}

/// Minimizes the path length over every support sequence whose earlier `B`
/// sets are compatible with later `A` sets and whose ratios
/// `‖A_i‖/‖B_i‖` are nondecreasing. Refuses trees with more than
/// [`ORACLE_CAP`] conflicting splits on either side.
pub fn brute_force_geodesic(t1: &SplitTree, t2: &SplitTree) -> Result<GeodesicResult> {
    if t1.leaf_count() != t2.leaf_count() {
        return Err(Error::arg("leaf counts differ"));
    }
    let conflicts = |x: &Split, other: &SplitTree| other.inner().keys().any(|y| !splits_compatible(x, y));
    let mut carried_sq = 0.0;
    let mut a = Vec::new();
    for (split, &len) in t1.inner() {
        if conflicts(split, t2) {
            a.push((split.clone(), len));
        } else {
            let d = len - t2.length(split);
            carried_sq += d * d;
        }
    }
    let mut b = Vec::new();
    for (split, &len) in t2.inner() {
        if conflicts(split, t1) {
            b.push((split.clone(), len));
        } else if t1.length(split) == 0.0 {
            carried_sq += len * len;
        }
    }
    let leaf_sq: f64 = t1.leaf_lengths().iter().zip(t2.leaf_lengths()).map(|(x, y)| (x - y) * (x - y)).sum();
    for size in [a.len(), b.len()] {
        if size > ORACLE_CAP {
            return Err(Error::TooLarge { what: "conflicting split set", size, cap: ORACLE_CAP });
        }
    }

    let compatible = b
        .iter()
        .map(|(f, _)| {
            a.iter().enumerate().filter(|(_, (e, _))| splits_compatible(e, f)).fold(0u32, |acc, (i, _)| acc | (1 << i))
        })
        .collect();
    let mut search =
        Search { a: &a, b: &b, compatible, best: f64::INFINITY, best_pairs: Vec::new(), pairs: Vec::new() };
    search.run((1u32 << a.len()) - 1, (1u32 << b.len()) - 1, 0.0, 0.0);
    let legs_sq = if a.is_empty() { 0.0 } else { search.best };

    let pick = |edges: &[(Split, f64)], mask: u32| -> Vec<(Split, f64)> {
        edges.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, e)| e.clone()).collect()
    };
    let pairs = search.best_pairs.iter().map(|&(ma, mb)| SupportPair { a: pick(&a, ma), b: pick(&b, mb) }).collect();
    Ok(GeodesicResult {
        distance: libm::sqrt(leaf_sq + carried_sq + legs_sq),
        support: SupportSequence { pairs },
        common_contribution: libm::sqrt(carried_sq),
        leaf_contribution: libm::sqrt(leaf_sq),
    })
}
