//! The self-contained JSON report of a permutation test.

use std::fmt::Write as _;

use dendrotest_core::permtest::MetricSummary;
use dendrotest_core::{LinkageMethod, Metric, TestConfig, TestResult, TiePolicy};
use serde::{Deserialize, Serialize};

use crate::error::{DataError, Result};
use crate::formats::{CardSortFile, DendrogramFile, FORMAT_VERSION};
use crate::run::par_perm_test;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MethodName {
    Average,
    Centroid,
    Ward,
    Single,
    Complete,
}

impl MethodName {
    pub fn method(self) -> LinkageMethod {
        match self {
            MethodName::Average => LinkageMethod::GroupAverage,
            MethodName::Centroid => LinkageMethod::Centroid,
            MethodName::Ward => LinkageMethod::Ward,
            MethodName::Single => LinkageMethod::NearestNeighbor,
            MethodName::Complete => LinkageMethod::FurthestNeighbor,
        }
    }

    pub fn of(method: LinkageMethod) -> Option<Self> {
        Some(match method {
            LinkageMethod::GroupAverage => MethodName::Average,
            LinkageMethod::Centroid => MethodName::Centroid,
            LinkageMethod::Ward => MethodName::Ward,
            LinkageMethod::NearestNeighbor => MethodName::Single,
            LinkageMethod::FurthestNeighbor => MethodName::Complete,
            LinkageMethod::Custom(_) => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TieName {
    Lex,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MetricName {
    Frobenius,
    Geodesic,
    Both,
}

impl MetricName {
    pub fn metric(self) -> Metric {
        match self {
            MetricName::Frobenius => Metric::Frobenius,
            MetricName::Geodesic => Metric::Geodesic,
            MetricName::Both => Metric::Both,
        }
    }

    pub fn of(metric: Metric) -> Self {
        match metric {
            Metric::Frobenius => MetricName::Frobenius,
            Metric::Geodesic => MetricName::Geodesic,
            Metric::Both => MetricName::Both,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigRecord {
    pub group1: String,
    pub group2: String,
    pub method: MethodName,
    pub ties: TieName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tie_seed: Option<u64>,
    pub metric: MetricName,
    pub permutations: usize,
    pub seed: u64,
    pub alpha: f64,
    pub normalize: bool,
}

impl ConfigRecord {
    pub fn from_config(config: &TestConfig, group1: &str, group2: &str) -> Result<Self> {
        let method = MethodName::of(config.method)
            .ok_or_else(|| DataError::invalid("custom linkage methods cannot be recorded in a report"))?;
        let (ties, tie_seed) = match config.ties {
            TiePolicy::Lexicographic => (TieName::Lex, None),
            TiePolicy::Random { seed } => (TieName::Random, Some(seed)),
        };
        Ok(ConfigRecord {
            group1: group1.into(),
            group2: group2.into(),
            method,
            ties,
            tie_seed,
            metric: MetricName::of(config.metric),
            permutations: config.permutations,
            seed: config.seed,
            alpha: config.alpha,
            normalize: config.normalize_for_frobenius,
        })
    }

    pub fn to_config(&self) -> TestConfig {
        TestConfig {
            method: self.method.method(),
            ties: match self.ties {
                TieName::Lex => TiePolicy::Lexicographic,
                TieName::Random => TiePolicy::Random { seed: self.tie_seed.unwrap_or(self.seed) },
            },
            metric: self.metric.metric(),
            permutations: self.permutations,
            seed: self.seed,
            alpha: self.alpha,
            normalize_for_frobenius: self.normalize,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub observed: f64,
    pub s_hat: f64,
    pub interval_normal: [f64; 2],
    pub interval_wilson: [f64; 2],
    pub tie_count: usize,
    pub degenerate: bool,
    pub replicates: Vec<f64>,
}

impl From<&MetricSummary> for MetricReport {
    fn from(s: &MetricSummary) -> Self {
        MetricReport {
            observed: s.observed,
            s_hat: s.s_hat,
            interval_normal: [s.interval_normal.0, s.interval_normal.1],
            interval_wilson: [s.interval_wilson.0, s.interval_wilson.1],
            tie_count: s.tie_count,
            degenerate: s.degenerate,
            replicates: s.replicates.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupDendrogram {
    pub group: String,
    pub participants: usize,
    pub dendrogram: DendrogramFile,
}

/// Run metadata that legitimately differs between identical runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_seconds: f64,
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub version: u32,
    pub config: ConfigRecord,
    pub input: CardSortFile,
    pub dendrograms: Vec<GroupDendrogram>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frobenius: Option<MetricReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geodesic: Option<MetricReport>,
    pub timing: Timing,
}

impl ReportFile {
    pub fn new(input: CardSortFile, result: &TestResult, timing: Timing) -> Result<Self> {
        let labels = input.to_sample()?.labels().clone();
        let group = |name: &str, n, d| GroupDendrogram {
            group: name.into(),
            participants: n,
            dendrogram: DendrogramFile::from_dendrogram(d, Some(&labels)),
        };
        Ok(ReportFile {
            version: FORMAT_VERSION,
            config: ConfigRecord::from_config(&result.config, &result.group1, &result.group2)?,
            dendrograms: vec![
                group(&result.group1, result.n1, &result.dendrogram1),
                group(&result.group2, result.n2, &result.dendrogram2),
            ],
            frobenius: result.frobenius.as_ref().map(MetricReport::from),
            geodesic: result.geodesic.as_ref().map(MetricReport::from),
            input,
            timing,
        })
    }

    /// Runs the test again from the embedded input and configuration.
    pub fn rerun(&self) -> Result<ReportFile> {
        let sample = self.input.to_sample()?;
        let config = self.config.to_config();
        let start = std::time::Instant::now();
        let result = par_perm_test(&sample, &self.config.group1, &self.config.group2, &config)?;
        let timing = Timing { elapsed_seconds: start.elapsed().as_secs_f64(), threads: crate::run::worker_count() };
        ReportFile::new(self.input.clone(), &result, timing)
    }

    /// Whether two reports agree on everything but timing.
    pub fn same_outcome(&self, other: &ReportFile) -> bool {
        ReportFile { timing: other.timing.clone(), ..self.clone() } == *other
    }

    /// Human-readable summary.
    pub fn render(&self) -> String {
        let c = &self.config;
        let mut out = String::new();
        let _ = writeln!(out, "groups        {} vs {}", c.group1, c.group2);
        for g in &self.dendrograms {
            let _ = writeln!(out, "  {:<12}{} participants", g.group, g.participants);
        }
        let _ = writeln!(
            out,
            "method        {:?}, ties {:?}, K = {}, seed = {}, alpha = {}{}",
            c.method,
            c.ties,
            c.permutations,
            c.seed,
            c.alpha,
            if c.normalize { ", normalized Frobenius" } else { "" }
        );
        let _ = writeln!(
            out,
            "{:<10} {:>10} {:>8} {:>21} {:>21} {:>6}",
            "metric", "observed", "S_hat", "normal interval", "Wilson interval", "ties"
        );
        for (name, m) in [("frobenius", &self.frobenius), ("geodesic", &self.geodesic)] {
            if let Some(m) = m {
                let _ = writeln!(
                    out,
                    "{:<10} {:>10.6} {:>8.4} [{:>8.5}, {:>8.5}] [{:>8.5}, {:>8.5}] {:>6}{}",
                    name,
                    m.observed,
                    m.s_hat,
                    m.interval_normal[0],
                    m.interval_normal[1],
                    m.interval_wilson[0],
                    m.interval_wilson[1],
                    m.tie_count,
                    if m.degenerate { "  degenerate" } else { "" }
                );
            }
        }
        let _ = writeln!(out, "elapsed       {:.3} s on {} threads", self.timing.elapsed_seconds, self.timing.threads);
        out
    }
}
