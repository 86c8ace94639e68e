//! Synthetic card-sort data.
//!
//! Each participant's partition is a cut of their group's ground-truth
//! dendrogram at a jittered height, followed by random reassignment of
//! individual labels. This noise model exists to exercise the test; it is
//! not a model of how people sort cards.

use dendrotest_core::linkage::{lance_williams, normalize};
use dendrotest_core::{
    CondensedMatrix, Dendrogram, GroupedSample, LabelSet, LinkageMethod, Participant, Partition, TiePolicy,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{DataError, Result};
use crate::formats::DendrogramFile;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub name: String,
    /// Ground truth; normalized before cutting.
    pub truth: DendrogramFile,
    pub participants: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub groups: Vec<GroupSpec>,
    /// Cut height on the normalized scale, before jitter.
    pub cut_height: f64,
    /// Half-width of the uniform jitter added to the cut height.
    pub jitter: f64,
    /// Probability that a label is moved to a random block.
    pub flip: f64,
    pub seed: u64,
}

impl SynthSpec {
    fn validate(&self) -> Result<Vec<Dendrogram>> {
        if !(0.0..=1.0).contains(&self.flip) {
            return Err(DataError::invalid(format!("flip probability {} is outside [0, 1]", self.flip)));
        }
        if !(self.jitter >= 0.0 && self.jitter.is_finite()) {
            return Err(DataError::invalid(format!("jitter {} must be finite and nonnegative", self.jitter)));
        }
        if !self.cut_height.is_finite() {
            return Err(DataError::invalid("cut height must be finite"));
        }
        if self.groups.is_empty() {
            return Err(DataError::invalid("at least one group is required"));
        }
        let mut truths = Vec::with_capacity(self.groups.len());
        for (k, g) in self.groups.iter().enumerate() {
            if self.groups[..k].iter().any(|h| h.name == g.name) {
                return Err(DataError::invalid(format!("group {:?} appears twice", g.name)));
            }
            let d = g.truth.to_dendrogram()?;
            if d.leaf_count() != self.groups[0].truth.leaves {
                return Err(DataError::invalid("all ground-truth dendrograms need the same leaves"));
            }
            truths.push(if d.root_height() > 0.0 { normalize(&d)? } else { d });
        }
        Ok(truths)
    }
}

/// Moves each label with probability `flip` to a uniformly chosen block
/// among the existing ones and one new block.
fn perturb<R: Rng>(rng: &mut R, assignment: &mut [usize], flip: f64) {
    let mut blocks = assignment.iter().max().map_or(0, |b| b + 1);
    for slot in assignment.iter_mut() {
        if rng.random_bool(flip) {
            let target = rng.random_range(0..=blocks);
            if target == blocks {
                blocks += 1;
            }
            *slot = target;
        }
    }
}

pub fn synth_generate(spec: &SynthSpec) -> Result<GroupedSample> {
    let truths = spec.validate()?;
    let m = truths[0].leaf_count();
    let labels = match &spec.groups[0].truth.labels {
        Some(names) => LabelSet::new(names.clone())?,
        None => LabelSet::numbered(m)?,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut participants = Vec::new();
    for (group, truth) in spec.groups.iter().zip(&truths) {
        for i in 0..group.participants {
            let h = spec.cut_height + spec.jitter * rng.random_range(-1.0..=1.0);
            let mut assignment = truth.cut(h).assignment();
            perturb(&mut rng, &mut assignment, spec.flip);
            participants.push(Participant {
                id: format!("{}-{i}", group.name),
                group: group.name.clone(),
                partition: Partition::from_assignment(&assignment)?,
            });
        }
    }
    Ok(GroupedSample::new(labels, participants)?)
}

/// Normalized group-average dendrogram of uniform random dissimilarities.
pub fn random_dendrogram<R: Rng>(rng: &mut R, p: usize) -> Result<Dendrogram> {
    let d = CondensedMatrix::from_fn(p, |_, _| rng.random_range(0.0..1.0))?;
    let (den, _) = lance_williams(&d, LinkageMethod::GroupAverage, &TiePolicy::Lexicographic)?;
    Ok(normalize(&den)?)
}
