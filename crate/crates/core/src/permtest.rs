//! Two-sample permutation test for dendrogram equality.
//!
//! Each replicate swaps `⌊min(n1, n2)/2⌋` randomly chosen participants of the
//! first group with as many of the second, rebuilds both dendrograms and
//! measures their distance. `Ŝ` is the fraction of replicates whose distance
//! strictly exceeds the observed one.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geodesic::geodesic_distance;
use crate::linkage::{lance_williams, normalize, Dendrogram, LinkageMethod, TiePolicy};
use crate::model::{co_classification, frobenius, hamming_mean, CondensedMatrix, GroupedSample, Participant};
use crate::stats::{normal_interval, wilson_interval};
use crate::treespace::{from_dendrogram, to_cophenetic, DendrogramTree, SplitTree};
use crate::{Error, Result};

/// Largest plan count [`exact_perm_test`] will enumerate.
pub const EXACT_PLAN_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Frobenius,
    Geodesic,
    Both,
}

impl Metric {
    pub fn uses_frobenius(self) -> bool {
        matches!(self, Metric::Frobenius | Metric::Both)
    }

    pub fn uses_geodesic(self) -> bool {
        matches!(self, Metric::Geodesic | Metric::Both)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestConfig {
    pub method: LinkageMethod,
    pub ties: TiePolicy,
    pub metric: Metric,
    /// Number of random plans `K`.
    pub permutations: usize,
    pub seed: u64,
    /// Error level of the reported intervals.
    pub alpha: f64,
    /// Compare height-normalized instead of raw `d_T` under the Frobenius norm.
    pub normalize_for_frobenius: bool,
}

impl Default for TestConfig {
    fn default() -> Self {
        TestConfig {
            method: LinkageMethod::GroupAverage,
            ties: TiePolicy::Lexicographic,
            metric: Metric::Both,
            permutations: 5000,
            seed: 0,
            alpha: 0.05,
            normalize_for_frobenius: false,
        }
    }
}

impl TestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.permutations == 0 {
            return Err(Error::arg("the number of permutations must be at least 1"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::arg(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        Ok(())
    }
}

/// Distances between two groups under the configured metrics.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Distances {
    pub frobenius: Option<f64>,
    pub geodesic: Option<f64>,
}

/// Which pooled participants form the first permuted group `GP_σ`. The
/// pooled order is the first group followed by the second.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutationPlan {
    n1: usize,
    n2: usize,
    in_sigma: Vec<bool>,
}

impl PermutationPlan {
    /// Plan that swaps the given members of each group.
    pub fn from_swaps(n1: usize, n2: usize, swap1: &[usize], swap2: &[usize]) -> Result<Self> {
        if swap1.len() != swap2.len() {
            return Err(Error::arg("both groups must give up the same number of members"));
        }
        let mut in_sigma = vec![true; n1];
        in_sigma.resize(n1 + n2, false);
        for &i in swap1 {
            if i >= n1 || !in_sigma[i] {
                return Err(Error::arg(format!("invalid swap index {i} in the first group")));
            }
            in_sigma[i] = false;
        }
        for &j in swap2 {
            if j >= n2 || in_sigma[n1 + j] {
                return Err(Error::arg(format!("invalid swap index {j} in the second group")));
            }
            in_sigma[n1 + j] = true;
        }
        Ok(PermutationPlan { n1, n2, in_sigma })
    }

    pub fn swap_count(&self) -> usize {
        self.in_sigma[..self.n1].iter().filter(|s| !**s).count()
    }

    /// Pooled indices of `GP_σ`.
    pub fn sigma(&self) -> impl Iterator<Item = usize> + '_ {
        self.in_sigma.iter().enumerate().filter(|(_, s)| **s).map(|(i, _)| i)
    }

    /// Pooled indices of the complement `GP_σ̄`.
    pub fn sigma_bar(&self) -> impl Iterator<Item = usize> + '_ {
        self.in_sigma.iter().enumerate().filter(|(_, s)| !**s).map(|(i, _)| i)
    }

    pub fn membership(&self) -> &[bool] {
        &self.in_sigma
    }
}

/// Draws a uniformly random balanced plan: `⌊min(n1, n2)/2⌋` members of each
/// group change sides.
pub fn draw_plan<R: Rng + ?Sized>(rng: &mut R, n1: usize, n2: usize) -> Result<PermutationPlan> {
    if n1 < 2 || n2 < 2 {
        return Err(Error::arg(format!("both groups need at least 2 members, got {n1} and {n2}")));
    }
    let k = n1.min(n2) / 2;
    let swap1 = index::sample(rng, n1, k).into_vec();
    let swap2 = index::sample(rng, n2, k).into_vec();
    PermutationPlan::from_swaps(n1, n2, &swap1, &swap2)
}

/// Generator for replicate `index`; independent of evaluation order.
pub fn replicate_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// One group's clustering.
#[derive(Debug, Clone)]
pub struct GroupFit {
    pub d_t: CondensedMatrix,
    pub dendrogram: Dendrogram,
    pub tree: Option<DendrogramTree>,
}

/// Tree of a zero-height dendrogram, which has no normalized form: every
/// leaf hangs from the root with unit length.
fn unresolved_tree(p: usize) -> Result<DendrogramTree> {
    DendrogramTree::new(SplitTree::new(p, Vec::new(), vec![1.0; p])?)
}

/// Hamming mean, Lance-Williams, and (for the geodesic) the normalized tree.
pub fn fit_group<'a, I>(xs: I, config: &TestConfig) -> Result<GroupFit>
where
    I: IntoIterator<Item = &'a CondensedMatrix>,
{
    let d = hamming_mean(xs)?;
    let (dendrogram, d_t) = lance_williams(&d, config.method, &config.ties)?;
    let tree = if !config.metric.uses_geodesic() {
        None
    } else if dendrogram.root_height() > 0.0 {
        Some(from_dendrogram(&normalize(&dendrogram)?)?)
    } else {
        Some(unresolved_tree(d.m())?)
    };
    Ok(GroupFit { d_t, dendrogram, tree })
}

fn frobenius_input(fit: &GroupFit, config: &TestConfig) -> Result<CondensedMatrix> {
    if !config.normalize_for_frobenius {
        return Ok(fit.d_t.clone());
    }
    let top = fit.dendrogram.root_height();
    if top <= 0.0 {
        return Ok(to_cophenetic(unresolved_tree(fit.d_t.m())?.as_tree()));
    }
    fit.d_t.scaled(1.0 / top)
}

/// Distances between two fitted groups.
pub fn compare(a: &GroupFit, b: &GroupFit, config: &TestConfig) -> Result<Distances> {
    let mut out = Distances::default();
    if config.metric.uses_frobenius() {
        let x = frobenius_input(a, config)?;
        let y = frobenius_input(b, config)?;
        out.frobenius = Some(frobenius(&x, &y)?);
    }
    if let (true, Some(ta), Some(tb)) = (config.metric.uses_geodesic(), &a.tree, &b.tree) {
        out.geodesic = Some(geodesic_distance(ta, tb)?.distance);
    }
    Ok(out)
}

/// Distance between the dendrograms of two lists of participants.
pub fn statistic(gp1: &[Participant], gp2: &[Participant], config: &TestConfig) -> Result<Distances> {
    if gp1.is_empty() || gp2.is_empty() {
        return Err(Error::arg("both groups must be nonempty"));
    }
    let x1: Vec<CondensedMatrix> = gp1.iter().map(|p| co_classification(&p.partition)).collect();
    let x2: Vec<CondensedMatrix> = gp2.iter().map(|p| co_classification(&p.partition)).collect();
    compare(&fit_group(&x1, config)?, &fit_group(&x2, config)?, config)
}

/// Summary of the test under one metric.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSummary {
    pub observed: f64,
    /// Replicate distances in replicate order.
    pub replicates: Vec<f64>,
    /// `Ŝ`: fraction of replicates strictly above `observed`.
    pub s_hat: f64,
    pub interval_normal: (f64, f64),
    pub interval_wilson: (f64, f64),
    /// Replicates exactly equal to `observed`.
    pub tie_count: usize,
    /// Observed distance and every replicate are zero.
    pub degenerate: bool,
}

impl MetricSummary {
    fn new(observed: f64, replicates: Vec<f64>, alpha: f64) -> Result<Self> {
        let k = replicates.len();
        let above = replicates.iter().filter(|r| **r > observed).count();
        let tie_count = replicates.iter().filter(|r| **r == observed).count();
        let s_hat = above as f64 / k as f64;
        Ok(MetricSummary {
            observed,
            degenerate: observed == 0.0 && replicates.iter().all(|r| *r == 0.0),
            interval_normal: normal_interval(s_hat, k, alpha)?,
            interval_wilson: wilson_interval(s_hat, k, alpha)?,
            replicates,
            s_hat,
            tie_count,
        })
    }
}

#[derive(Debug, Clone)]
pub struct TestResult {
    pub config: TestConfig,
    pub group1: String,
    pub group2: String,
    pub n1: usize,
    pub n2: usize,
    pub frobenius: Option<MetricSummary>,
    pub geodesic: Option<MetricSummary>,
    pub dendrogram1: Dendrogram,
    pub dendrogram2: Dendrogram,
}

impl TestResult {
    pub fn summary(&self, metric: Metric) -> Option<&MetricSummary> {
        match metric {
            Metric::Frobenius => self.frobenius.as_ref(),
            Metric::Geodesic => self.geodesic.as_ref(),
            Metric::Both => None,
        }
    }
}

/// A test prepared for replicate evaluation. Replicates are pure functions
/// of their index, so they may be evaluated in any order or in parallel.
pub struct PermutationTest {
    config: TestConfig,
    group1: String,
    group2: String,
    pooled: Vec<CondensedMatrix>,
    n1: usize,
    n2: usize,
    fit1: GroupFit,
    fit2: GroupFit,
    observed: Distances,
}

impl PermutationTest {
    pub fn new(sample: &GroupedSample, g1: &str, g2: &str, config: &TestConfig) -> Result<Self> {
        config.validate()?;
        if g1 == g2 {
            return Err(Error::arg("the two groups must differ"));
        }
        let m1 = sample.members(g1);
        let m2 = sample.members(g2);
        for (name, members) in [(g1, &m1), (g2, &m2)] {
            if members.is_empty() {
                return Err(Error::arg(format!("group {name:?} has no participants")));
            }
        }
        let (n1, n2) = (m1.len(), m2.len());
        if n1 < 2 || n2 < 2 {
            return Err(Error::arg(format!("both groups need at least 2 members, got {n1} and {n2}")));
        }
        let pooled: Vec<CondensedMatrix> =
            m1.iter().chain(&m2).map(|&i| co_classification(&sample.participants()[i].partition)).collect();
        let fit1 = fit_group(&pooled[..n1], config)?;
        let fit2 = fit_group(&pooled[n1..], config)?;
        let observed = compare(&fit1, &fit2, config)?;
        Ok(PermutationTest {
            config: config.clone(),
            group1: g1.into(),
            group2: g2.into(),
            pooled,
            n1,
            n2,
            fit1,
            fit2,
            observed,
        })
    }

    pub fn config(&self) -> &TestConfig {
        &self.config
    }

    pub fn observed(&self) -> Distances {
        self.observed
    }

    pub fn group_sizes(&self) -> (usize, usize) {
        (self.n1, self.n2)
    }

    pub fn plan(&self, index: usize) -> Result<PermutationPlan> {
        draw_plan(&mut replicate_rng(self.config.seed, index), self.n1, self.n2)
    }

    /// Fits of `GP_σ` and `GP_σ̄` under `plan`.
    pub fn fits(&self, plan: &PermutationPlan) -> Result<(GroupFit, GroupFit)> {
        let a = fit_group(plan.sigma().map(|i| &self.pooled[i]), &self.config)?;
        let b = fit_group(plan.sigma_bar().map(|i| &self.pooled[i]), &self.config)?;
        Ok((a, b))
    }

    pub fn evaluate(&self, plan: &PermutationPlan) -> Result<Distances> {
        let (a, b) = self.fits(plan)?;
        compare(&a, &b, &self.config)
    }

    pub fn replicate(&self, index: usize) -> Result<Distances> {
        self.evaluate(&self.plan(index)?)
    }

    pub fn observed_fits(&self) -> (&GroupFit, &GroupFit) {
        (&self.fit1, &self.fit2)
    }

    /// Assembles the result from replicate distances in replicate order.
    pub fn finish(self, replicates: &[Distances]) -> Result<TestResult> {
        let summarize = |observed: Option<f64>, pick: fn(&Distances) -> Option<f64>| {
            observed
                .map(|obs| {
                    let reps = replicates
                        .iter()
                        .map(|r| pick(r).ok_or_else(|| Error::arg("replicate lacks a metric")))
                        .collect::<Result<Vec<f64>>>()?;
                    MetricSummary::new(obs, reps, self.config.alpha)
                })
                .transpose()
        };
        let frobenius = summarize(self.observed.frobenius, |d| d.frobenius)?;
        let geodesic = summarize(self.observed.geodesic, |d| d.geodesic)?;
        Ok(TestResult {
            config: self.config,
            group1: self.group1,
            group2: self.group2,
            n1: self.n1,
            n2: self.n2,
            frobenius,
            geodesic,
            dendrogram1: self.fit1.dendrogram,
            dendrogram2: self.fit2.dendrogram,
        })
    }
}

/// Runs `K` replicates sequentially.
pub fn perm_test(sample: &GroupedSample, g1: &str, g2: &str, config: &TestConfig) -> Result<TestResult> {
    let test = PermutationTest::new(sample, g1, g2, config)?;
    let replicates = (0..config.permutations).map(|i| test.replicate(i)).collect::<Result<Vec<_>>>()?;
    test.finish(&replicates)
}

fn binomial(n: usize, k: usize) -> u64 {
    (0..k).fold(1u64, |acc, i| acc.saturating_mul((n - i) as u64) / (i as u64 + 1))
}

/// Advances `c` to the next `k`-combination of `0..n` in lexicographic order.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    for i in (0..k).rev() {
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// The exact permutation probability, averaging over every balanced plan.
pub fn exact_perm_test(sample: &GroupedSample, g1: &str, g2: &str, config: &TestConfig) -> Result<Distances> {
    let test = PermutationTest::new(sample, g1, g2, config)?;
    let (n1, n2) = test.group_sizes();
    let k = n1.min(n2) / 2;
    let plans = binomial(n1, k).saturating_mul(binomial(n2, k));
    if plans > EXACT_PLAN_CAP {
        return Err(Error::TooLarge {
            what: "balanced plan enumeration",
            size: plans as usize,
            cap: EXACT_PLAN_CAP as usize,
        });
    }
    let observed = test.observed();
    let (mut above_f, mut above_g, mut total) = (0u64, 0u64, 0u64);
    let mut c1: Vec<usize> = (0..k).collect();
    loop {
        let mut c2: Vec<usize> = (0..k).collect();
        loop {
            let d = test.evaluate(&PermutationPlan::from_swaps(n1, n2, &c1, &c2)?)?;
            if let (Some(r), Some(o)) = (d.frobenius, observed.frobenius) {
                above_f += u64::from(r > o);
            }
            if let (Some(r), Some(o)) = (d.geodesic, observed.geodesic) {
                above_g += u64::from(r > o);
            }
            total += 1;
            if !next_combination(&mut c2, n2) {
                break;
            }
        }
        if !next_combination(&mut c1, n1) {
            break;
        }
    }
    let frac = |n: u64| n as f64 / total as f64;
    Ok(Distances {
        frobenius: observed.frobenius.map(|_| frac(above_f)),
        geodesic: observed.geodesic.map(|_| frac(above_g)),
    })
}
