use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use dendrotest::emit_scatter;
use dendrotest::error::{DataError, Result};
use dendrotest::formats::{read_json, read_text, to_json, write_text, CardSortFile, DendrogramFile, MatrixFile};
use dendrotest::report::{MethodName, MetricName, ReportFile, TieName, Timing};
use dendrotest::run::{par_perm_test, with_pool, worker_count};
use dendrotest::synth::{random_dendrogram, synth_generate, GroupSpec, SynthSpec};
use dendrotest_core::geodesic::geodesic_distance;
use dendrotest_core::linkage::{lance_williams, normalize};
use dendrotest_core::model::hamming_mean;
use dendrotest_core::treespace::{from_dendrogram, LeafSet};
use dendrotest_core::{CondensedMatrix, TestConfig, TiePolicy};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Permutation tests for differences between card-sort dendrograms.
#[derive(Parser)]
#[command(name = "dendrotest", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster a distance matrix or card-sort data and print the dendrogram.
    Cluster(ClusterArgs),
    /// Run the permutation test between two groups of a card-sort file.
    Test(TestArgs),
    /// Geodesic distance between two dendrogram files.
    Geodesic(GeodesicArgs),
    /// Run the test on synthetic data over a range of group sizes.
    Simulate(SimulateArgs),
    /// Print a report file, optionally re-running it.
    Report(ReportArgs),
}

#[derive(Args, Clone)]
struct Linkage {
    #[arg(long, value_enum, default_value = "average")]
    method: MethodName,
    #[arg(long, value_enum, default_value = "lex")]
    ties: TieName,
    /// Seed for random tie breaking (defaults to --seed).
    #[arg(long)]
    tie_seed: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl Linkage {
    fn ties(&self) -> TiePolicy {
        match self.ties {
            TieName::Lex => TiePolicy::Lexicographic,
            TieName::Random => TiePolicy::Random { seed: self.tie_seed.unwrap_or(self.seed) },
        }
    }
}

#[derive(Args, Clone)]
struct TestOptions {
    #[command(flatten)]
    linkage: Linkage,
    #[arg(long, value_enum, default_value = "both")]
    metric: MetricName,
    /// Number of random permutations K.
    #[arg(long, default_value_t = 5000, value_parser = clap::value_parser!(u64).range(1..))]
    permutations: u64,
    /// Error level of the reported intervals.
    #[arg(long, default_value_t = 0.05, value_parser = parse_alpha)]
    alpha: f64,
    /// Compare height-normalized tree distances under the Frobenius norm.
    #[arg(long)]
    normalize: bool,
}

impl TestOptions {
    fn config(&self) -> TestConfig {
        TestConfig {
            method: self.linkage.method.method(),
            ties: self.linkage.ties(),
            metric: self.metric.metric(),
            permutations: self.permutations as usize,
            seed: self.linkage.seed,
            alpha: self.alpha,
            normalize_for_frobenius: self.normalize,
        }
    }
}

fn parse_alpha(s: &str) -> std::result::Result<f64, String> {
    let a: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if a > 0.0 && a < 1.0 {
        Ok(a)
    } else {
        Err("alpha must lie strictly between 0 and 1".into())
    }
}

#[derive(Args)]
struct ClusterArgs {
    /// Matrix file (`condensed` field) or card-sort file; `-` reads stdin.
    input: PathBuf,
    #[command(flatten)]
    linkage: Linkage,
    /// Only cluster participants of this group (card-sort input).
    #[arg(long)]
    group: Option<String>,
    /// Write the dendrogram as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TestArgs {
    input: PathBuf,
    /// First group (defaults to the first group in the file).
    #[arg(long)]
    group1: Option<String>,
    /// Second group (defaults to the second group in the file).
    #[arg(long)]
    group2: Option<String>,
    #[command(flatten)]
    options: TestOptions,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write replicate (Frobenius, geodesic) pairs as TSV.
    #[arg(long)]
    scatter: Option<PathBuf>,
}

#[derive(Args)]
struct GeodesicArgs {
    first: PathBuf,
    second: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    /// SynthSpec JSON with two groups; participant counts are overridden.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Leaves of the random ground truths when no spec is given.
    #[arg(long, default_value_t = 8)]
    leaves: usize,
    /// Use the same ground truth for both groups.
    #[arg(long)]
    null: bool,
    /// Participants per group, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [8usize, 32, 128])]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    runs: u64,
    #[arg(long, default_value_t = 0.5)]
    cut: f64,
    #[arg(long, default_value_t = 0.25)]
    jitter: f64,
    #[arg(long, default_value_t = 0.2)]
    flip: f64,
    #[command(flatten)]
    options: TestOptions,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    report: PathBuf,
    /// Re-run the test from the embedded input and compare.
    #[arg(long)]
    verify: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = with_pool(|| match cli.command {
        Command::Cluster(a) => cluster(a),
        Command::Test(a) => test(a),
        Command::Geodesic(a) => geodesic(a),
        Command::Simulate(a) => simulate(a),
        Command::Report(a) => report(a),
    });
    match outcome.and_then(|r| r) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_text(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cluster(a: ClusterArgs) -> Result<()> {
    let text = read_text(&a.input)?;
    let value: serde_json::Value = dendrotest::formats::parse_json(&text, &a.input.display().to_string())?;
    let (labels, d) = if value.get("condensed").is_some() {
        dendrotest::formats::parse_json::<MatrixFile>(&text, "matrix file")?.to_matrix()?
    } else {
        let sample = dendrotest::formats::parse_json::<CardSortFile>(&text, "card-sort file")?.to_sample()?;
        let xs = sample.co_classifications();
        let chosen: Vec<&CondensedMatrix> = match &a.group {
            Some(g) => {
                let members = sample.members(g);
                if members.is_empty() {
                    return Err(DataError::invalid(format!("group {g:?} has no participants")));
                }
                members.into_iter().map(|i| &xs[i]).collect()
            }
            None => xs.iter().collect(),
        };
        (sample.labels().clone(), hamming_mean(chosen)?)
    };
    let (den, d_t) = lance_williams(&d, a.linkage.method.method(), &a.linkage.ties())?;
    let names = labels.names();
    let node = |id: usize| if id < names.len() { names[id].clone() } else { format!("#{id}") };
    println!("{:>5} {:>12} {:>12} {:>12}", "node", "left", "right", "height");
    for (step, h) in den.merges().iter().zip(den.heights()) {
        println!("{:>5} {:>12} {:>12} {:>12}", format!("#{}", step.new_id), node(step.left), node(step.right), h);
    }
    if den.monotone_violations() > 0 {
        println!("inversions clamped: {}", den.monotone_violations());
    }
    let values: Vec<String> = d_t.values().iter().map(|v| v.to_string()).collect();
    println!("cophenetic (condensed): {}", values.join(" "));
    for (i, name) in names.iter().enumerate() {
        let row: Vec<String> = (0..d_t.m()).map(|j| format!("{:>8.4}", d_t.get(i, j))).collect();
        println!("{name:>12} {}", row.join(" "));
    }
    if let Some(out) = &a.out {
        write_text(out, &to_json(&DendrogramFile::from_dendrogram(&den, Some(&labels))))?;
    }
    Ok(())
}

fn test(a: TestArgs) -> Result<()> {
    let input: CardSortFile = read_json(&a.input)?;
    let sample = input.to_sample()?;
    let groups = sample.groups();
    let pick = |given: &Option<String>, k: usize| -> Result<String> {
        given
            .clone()
            .or_else(|| groups.get(k).map(|g| g.to_string()))
            .ok_or_else(|| DataError::invalid(format!("the input has {} group(s); two are needed", groups.len())))
    };
    let (g1, g2) = (pick(&a.group1, 0)?, pick(&a.group2, 1)?);
    let config = a.options.config();
    let start = Instant::now();
    let result = par_perm_test(&sample, &g1, &g2, &config)?;
    let timing = Timing { elapsed_seconds: start.elapsed().as_secs_f64(), threads: worker_count() };
    if let Some(path) = &a.scatter {
        let mut buf = Vec::new();
        emit_scatter(&result, &mut buf)?;
        write_text(path, &String::from_utf8_lossy(&buf))?;
    }
    let report = ReportFile::new(input, &result, timing)?;
    match &a.out {
        Some(path) => {
            write_text(path, &to_json(&report))?;
            print!("{}", report.render());
        }
        None => print!("{}", to_json(&report)),
    }
    Ok(())
}

fn split_names(split: &LeafSet, labels: Option<&[String]>) -> String {
    let names: Vec<String> = split.iter().map(|i| labels.map_or_else(|| i.to_string(), |l| l[i].clone())).collect();
    format!("{{{}}}", names.join(", "))
}

fn geodesic(a: GeodesicArgs) -> Result<()> {
    let f1: DendrogramFile = read_json(&a.first)?;
    let f2: DendrogramFile = read_json(&a.second)?;
    let t1 = from_dendrogram(&normalize(&f1.to_dendrogram()?)?)?;
    let t2 = from_dendrogram(&normalize(&f2.to_dendrogram()?)?)?;
    let r = geodesic_distance(&t1, &t2)?;
    let labels = f1.labels.as_deref();
    println!("distance {}", r.distance);
    println!("leaf contribution {}", r.leaf_contribution);
    println!("common contribution {}", r.common_contribution);
    for (i, pair) in r.support.pairs.iter().enumerate() {
        let side = |edges: &[(LeafSet, f64)]| {
            edges.iter().map(|(s, l)| format!("{}:{l}", split_names(s, labels))).collect::<Vec<_>>().join(" ")
        };
        println!("leg {}: drop {} | add {}", i + 1, side(&pair.a), side(&pair.b));
    }
    Ok(())
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let base = match &a.spec {
        Some(path) => {
            let spec: SynthSpec = read_json(path)?;
            if spec.groups.len() != 2 {
                return Err(DataError::invalid("a simulation spec needs exactly two groups"));
            }
            spec
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(a.options.linkage.seed);
            let first = random_dendrogram(&mut rng, a.leaves)?;
            let second = if a.null { first.clone() } else { random_dendrogram(&mut rng, a.leaves)? };
            let group = |name: &str, d| GroupSpec {
                name: name.into(),
                truth: DendrogramFile::from_dendrogram(d, None),
                participants: 0,
            };
            SynthSpec {
                groups: vec![group("g1", &first), group("g2", &second)],
                cut_height: a.cut,
                jitter: a.jitter,
                flip: a.flip,
                seed: 0,
            }
        }
    };
    let config = a.options.config();
    let mut out = String::from("n\tmetric\tmedian_s_hat\tmean_s_hat\n");
    for &n in &a.sizes {
        let mut s_f = Vec::new();
        let mut s_g = Vec::new();
        for run in 0..a.runs {
            let mut spec = base.clone();
            spec.seed = config.seed.wrapping_add(run).wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ n as u64;
            spec.groups.iter_mut().for_each(|g| g.participants = n);
            let sample = synth_generate(&spec)?;
            let run_config = TestConfig { seed: spec.seed, ..config.clone() };
            let r = par_perm_test(&sample, &spec.groups[0].name, &spec.groups[1].name, &run_config)?;
            s_f.extend(r.frobenius.map(|s| s.s_hat));
            s_g.extend(r.geodesic.map(|s| s.s_hat));
        }
        for (name, xs) in [("frobenius", &mut s_f), ("geodesic", &mut s_g)] {
            if !xs.is_empty() {
                let mean = xs.iter().sum::<f64>() / xs.len() as f64;
                out.push_str(&format!("{n}\t{name}\t{}\t{mean}\n", median(xs)));
            }
        }
    }
    emit(a.out.as_deref(), &out)
}

fn report(a: ReportArgs) -> Result<()> {
    let report: ReportFile = read_json(&a.report)?;
    print!("{}", report.render());
    if a.verify {
        let again = report.rerun()?;
        if !report.same_outcome(&again) {
            return Err(DataError::invalid("re-running the embedded test gave a different result"));
        }
        println!("verified: re-run reproduces the report");
    }
    Ok(())
}
