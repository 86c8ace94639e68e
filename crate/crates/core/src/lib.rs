//! Dendrograms from card-sort data and two-sample permutation tests for
//! dendrogram equality.
//!
//! The pipeline is:
//!
//! 1. every participant's partition of the `M` labels becomes a 0/1
//!    co-classification matrix ([`model::co_classification`]);
//! 2. a group's matrices are averaged into a Hamming distance
//!    ([`model::hamming_mean`]);
//! 3. the Lance-Williams recursion turns the Hamming distance into a tree
//!    distance `d_T` and a [`Dendrogram`] ([`linkage::lance_williams`]);
//! 4. two groups are compared either by the Frobenius norm of their `d_T`
//!    matrices or by the geodesic distance between their height-normalized
//!    dendrograms in tree space ([`geodesic::geodesic_distance`]);
//! 5. the comparison is calibrated by balanced group permutations
//!    ([`permtest::perm_test`]).
//!
//! The crate is `no_std` and only needs `alloc`. Enable the `std` feature to
//! link against the standard library (nothing else changes).

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

mod error;
pub mod geodesic;
pub mod linkage;
pub mod model;
pub mod permtest;
pub mod stats;
pub mod treespace;

pub use error::{Error, Result};
pub use geodesic::{geodesic_distance, GeodesicResult, SupportSequence};
pub use linkage::{lance_williams, Dendrogram, LinkageMethod, MergeStep, TiePolicy};
pub use model::{CondensedMatrix, GroupedSample, LabelSet, Participant, Partition};
pub use permtest::{perm_test, Metric, TestConfig, TestResult};
pub use treespace::{DendrogramTree, LeafSet, SplitTree};
