//! The `coax` command line: `detect`, `build`, `query`, `bench` and `theory`.
//!
//! Exit status is 0 on success, 1 on usage or input errors and 2 when an
//! index disagrees with the full-scan oracle.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::bench::{gen_workload, run_bench, sweep_specs, BenchConfig, QueryKind};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::grid::QueryStats;
use crate::index::{CoaxConfig, CoaxIndex, CoaxQueryStats};
use crate::model_file::ModelFile;
use crate::softfd::{learn_groups, DetectConfig};
use crate::theory::{theory_report, TheoryConfig};
use crate::translate::QueryRect;

#[derive(Debug, Parser)]
#[command(name = "coax", version, about = "Correlation-aware multidimensional index")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Learn soft functional dependencies and write them as JSON.
    Detect(DetectArgs),
    /// Build an index and write a binary snapshot.
    Build(BuildArgs),
    /// Run one range query against a snapshot.
    Query(QueryArgs),
    /// Benchmark indexes on generated workloads against a full scan.
    Bench(BenchArgs),
    /// Check the segment-capacity closed forms by simulation.
    Theory(TheoryArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Headered CSV file.
    pub csv: PathBuf,
    /// Columns to load, by name or zero-based index (default: all).
    #[arg(long, value_delimiter = ',')]
    pub dims: Vec<String>,
}

impl InputArgs {
    fn load(&self) -> Result<Dataset> {
        if self.dims.is_empty() {
            Dataset::load_csv_all(&self.csv)
        } else {
            Dataset::load_csv(&self.csv, &self.dims)
        }
    }

    fn label(&self) -> String {
        self.csv
            .file_name()
            .map_or_else(|| self.csv.display().to_string(), |n| n.to_string_lossy().into_owned())
    }
}

#[derive(Debug, Args)]
pub struct DetectOpts {
    /// Rows sampled for learning.
    #[arg(long = "sample", default_value_t = 100_000)]
    pub sample_count: usize,
    /// Buckets per axis.
    #[arg(long, default_value_t = 100)]
    pub chunks: usize,
    /// Bucket density threshold (default: twice the uniform expectation).
    #[arg(long)]
    pub threshold: Option<u64>,
    /// Fraction of records the margins must cover.
    #[arg(long, default_value_t = 0.9)]
    pub target_ratio: f64,
    #[arg(long, default_value_t = 0.75)]
    pub min_quality: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl DetectOpts {
    fn config(&self) -> DetectConfig {
        DetectConfig {
            sample_count: self.sample_count,
            chunks: self.chunks,
            threshold: self.threshold,
            target_ratio: self.target_ratio,
            min_quality: self.min_quality,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub detect: DetectOpts,
    /// Output file (default: stdout).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Use these groups instead of learning them.
    #[arg(long)]
    pub models: Option<PathBuf>,
    /// Cells per grid dimension of the primary index.
    #[arg(long, default_value_t = 16)]
    pub cells: usize,
    /// In-cell sort dimension (default: predictor of the largest group).
    #[arg(long)]
    pub sort_dim: Option<usize>,
    #[command(flatten)]
    pub detect: DetectOpts,
    /// Snapshot file.
    #[arg(short, long)]
    pub output: PathBuf,
    /// Also write index statistics as JSON here (default: stdout).
    #[arg(long)]
    pub stats: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    /// Snapshot written by `coax build`.
    pub index: PathBuf,
    /// Rectangle as `[[lo, hi], ...]`, one pair per dimension; `null` is
    /// unbounded.
    #[arg(long)]
    pub rect: String,
    /// Print only the result count and statistics.
    #[arg(long)]
    pub count: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Neighbours per generated range query.
    #[arg(long = "workload-k", default_value_t = 100)]
    pub k: usize,
    /// Queries per workload.
    #[arg(long, default_value_t = 1000)]
    pub queries: usize,
    #[arg(long, value_delimiter = ',', default_value = "range")]
    pub kinds: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "coax,columnfiles,uniformgrid,fullscan")]
    pub indexes: Vec<String>,
    /// Cells-per-dimension sweep for grid indexes.
    #[arg(long, value_delimiter = ',', default_value = "4,8,16,32,64")]
    pub cells: Vec<usize>,
    /// Sort dimension of the column-files baseline.
    #[arg(long, default_value_t = 0)]
    pub sort_dim: usize,
    /// Replay queries from several threads.
    #[arg(long)]
    pub parallel: bool,
    /// Keep configurations whose directory outgrows the data.
    #[arg(long)]
    pub keep_oversized: bool,
    #[arg(long, default_value_t = 0.9)]
    pub target_ratio: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TheoryArgs {
    #[arg(long = "eps-over-sigma", value_delimiter = ',', default_value = "5,10,20")]
    pub eps_over_sigma: Vec<f64>,
    /// Slope offsets in units of sigma.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0,0.25,-0.25,0.5,-0.5,1,-1")]
    pub drifts: Vec<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    /// Stream length for segment counts, and walk cap for exit times.
    #[arg(long, default_value_t = 1_000_000)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    #[arg(long, default_value_t = 0.5)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(p) => fs::write(p, text).map_err(|e| Error::io(p, e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn detect(a: &DetectArgs) -> Result<()> {
    let data = a.input.load()?;
    let groups = learn_groups(&data, &a.detect.config())?;
    let file = ModelFile::from_groups(data.names(), &groups);
    emit(a.output.as_deref(), &file.to_json()?)
}

fn build(a: &BuildArgs) -> Result<()> {
    let data = a.input.load()?;
    let cfg = CoaxConfig {
        detect: a.detect.config(),
        cells_per_dim: a.cells,
        sort_dim: a.sort_dim,
        outlier_cells_per_dim: None,
    };
    let ix = match &a.models {
        Some(p) => {
            let groups = ModelFile::read(p)?.to_groups(data.n_dims())?;
            CoaxIndex::build_with_groups(&data, groups, &cfg)?
        }
        None => CoaxIndex::build(&data, &cfg)?,
    };
    ix.save(&a.output)?;
    emit(a.stats.as_deref(), &to_json(&ix.stats())?)
}

#[derive(Serialize)]
struct QueryOutput {
    count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    rows: Option<Vec<usize>>,
    stats: QueryStats,
    detail: CoaxQueryStats,
}

fn query(a: &QueryArgs) -> Result<()> {
    let ix = CoaxIndex::load(&a.index)?;
    let q: QueryRect = serde_json::from_str(&a.rect)
        .map_err(|e| Error::invalid(format!("malformed --rect: {e}")))?;
    if q.n_dims() != ix.n_dims() {
        return Err(Error::DimMismatch {
            expected: ix.n_dims(),
            got: q.n_dims(),
        });
    }
    let (rows, detail) = ix.query(&q);
    let out = QueryOutput {
        count: rows.len(),
        rows: (!a.count).then_some(rows),
        stats: detail.total(),
        detail,
    };
    emit(None, &to_json(&out)?)
}

fn bench(a: &BenchArgs) -> Result<()> {
    let data = a.input.load()?;
    if a.sort_dim >= data.n_dims() {
        return Err(Error::DimOutOfRange {
            dim: a.sort_dim,
            n_dims: data.n_dims(),
        });
    }
    let kinds = a
        .kinds
        .iter()
        .map(|k| k.parse::<QueryKind>())
        .collect::<Result<Vec<_>>>()?;
    let specs = sweep_specs(&a.indexes, &a.cells, a.sort_dim)?;
    let workloads = kinds
        .iter()
        .enumerate()
        .map(|(i, &kind)| gen_workload(&data, a.k, a.queries, kind, a.seed.wrapping_add(i as u64)))
        .collect::<Result<Vec<_>>>()?;
    let cfg = BenchConfig {
        coax: CoaxConfig {
            detect: DetectConfig {
                target_ratio: a.target_ratio,
                seed: a.seed,
                ..DetectConfig::default()
            },
            ..CoaxConfig::default()
        },
        groups: None,
        skip_oversized: !a.keep_oversized,
        parallel: a.parallel,
        dataset: a.input.label(),
    };
    let report = run_bench(&data, &workloads, &specs, &cfg)?;
    emit(a.output.as_deref(), &report.to_json()?)
}

fn theory(a: &TheoryArgs) -> Result<()> {
    let cfg = TheoryConfig {
        eps_over_sigma: a.eps_over_sigma.clone(),
        drifts: a.drifts.clone(),
        trials: a.trials,
        n: a.n,
        mu: a.mu,
        sigma: a.sigma,
        seed: a.seed,
    };
    emit(a.output.as_deref(), &theory_report(&cfg)?.to_json()?)
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Detect(a) => detect(a),
        Command::Build(a) => build(a),
        Command::Query(a) => query(a),
        Command::Bench(a) => bench(a),
        Command::Theory(a) => theory(a),
    }
}

/// Exit status for an error: 2 for oracle disagreements, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Correctness { .. } => 2,
        _ => 1,
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit status. Diagnostics go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::Correctness { samples, .. } = &e {
                for m in samples {
                    eprintln!(
                        "  {:?} query {}: expected {} rows, got {} (missing {:?}, extra {:?})",
                        m.kind, m.query, m.expected, m.got, m.missing, m.extra
                    );
                }
            }
            exit_code(&e)
        }
    }
}
