//! Workload generation and the benchmark harness.
//!
//! Range queries are the bounding boxes of a random record's `k` nearest
//! neighbours (Euclidean distance on min-max normalised dimensions); point
//! queries are the random record itself. Every benchmarked index is checked
//! against a full scan on every query before any timing is reported.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::grid::{directory_bytes_for, GridIndex, QueryStats};
use crate::index::{refine_margins, CoaxConfig, CoaxIndex};
use crate::softfd::{learn_groups, CorrelationGroup};
use crate::translate::QueryRect;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryKind {
    Point,
    Range,
}

impl std::str::FromStr for QueryKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "point" => Ok(QueryKind::Point),
            "range" => Ok(QueryKind::Range),
            other => Err(Error::invalid(format!("unknown query kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Workload {
    pub kind: QueryKind,
    pub k: usize,
    pub seed: u64,
    /// Record each query was grown around.
    pub seed_rows: Vec<usize>,
    pub queries: Vec<QueryRect>,
}

/// Brute-force nearest neighbours over min-max normalised columns.
#[derive(Debug, Clone)]
pub struct KnnBoxes<'a> {
    data: &'a Dataset,
    normalized: Vec<Vec<f64>>,
}

impl<'a> KnnBoxes<'a> {
    pub fn new(data: &'a Dataset) -> Self {
        let normalized = data
            .columns()
            .iter()
            .map(|col| {
                let (lo, hi) = crate::dataset::min_max(col);
                let w = hi - lo;
                col.iter()
                    .map(|&v| if w > 0.0 { (v - lo) / w } else { 0.0 })
                    .collect()
            })
            .collect();
        Self { data, normalized }
    }

    /// Ids of the `k` rows nearest to `row` (itself included), ties broken by
    /// row id.
    pub fn neighbours(&self, row: usize, k: usize) -> Vec<usize> {
        let n = self.data.n_rows();
        let k = k.clamp(1, n);
        let centre: Vec<f64> = self.normalized.iter().map(|c| c[row]).collect();
        let mut dist: Vec<(f64, usize)> = (0..n)
            .into_par_iter()
            .map(|r| {
                let d2 = self
                    .normalized
                    .iter()
                    .zip(&centre)
                    .map(|(c, &x)| (c[r] - x) * (c[r] - x))
                    .sum::<f64>();
                (d2, r)
            })
            .collect();
        let by = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < n {
            dist.select_nth_unstable_by(k - 1, by);
        }
        dist.truncate(k);
        dist.into_iter().map(|(_, r)| r).collect()
    }

    /// Per-dimension `[min, max]` of the `k` nearest neighbours of `row`.
    pub fn rect_around(&self, row: usize, k: usize) -> QueryRect {
        let nn = self.neighbours(row, k);
        let (lo, hi): (Vec<f64>, Vec<f64>) = (0..self.data.n_dims())
            .map(|d| {
                nn.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| {
                    let v = self.data.value(r, d);
                    (lo.min(v), hi.max(v))
                })
            })
            .unzip();
        QueryRect::new(&lo, &hi).expect("neighbour box is ordered")
    }
}

/// `n_queries` queries grown around uniformly drawn records.
pub fn gen_workload(data: &Dataset, k: usize, n_queries: usize, kind: QueryKind, seed: u64) -> Result<Workload> {
    if data.n_rows() == 0 {
        return Err(Error::Empty("dataset"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<usize> = (0..n_queries)
        .map(|_| rng.random_range(0..data.n_rows()))
        .collect();
    let mut w = gen_workload_at(data, k, &rows, kind)?;
    w.seed = seed;
    Ok(w)
}

/// Queries grown around the given records, one per entry of `seed_rows`.
pub fn gen_workload_at(data: &Dataset, k: usize, seed_rows: &[usize], kind: QueryKind) -> Result<Workload> {
    if k == 0 || k > data.n_rows() {
        return Err(Error::invalid(format!(
            "k must lie in [1, {}], got {k}",
            data.n_rows()
        )));
    }
    if let Some(&r) = seed_rows.iter().find(|&&r| r >= data.n_rows()) {
        return Err(Error::invalid(format!("seed row {r} out of range")));
    }
    let queries = match kind {
        QueryKind::Point => seed_rows.iter().map(|&r| QueryRect::point(&data.row(r))).collect(),
        QueryKind::Range => {
            let knn = KnnBoxes::new(data);
            seed_rows.iter().map(|&r| knn.rect_around(r, k)).collect()
        }
    };
    Ok(Workload {
        kind,
        k,
        seed: 0,
        seed_rows: seed_rows.to_vec(),
        queries,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "index", rename_all = "snake_case")]
pub enum IndexSpec {
    Coax { cells_per_dim: usize },
    ColumnFiles { cells_per_dim: usize, sort_dim: usize },
    UniformGrid { cells_per_dim: usize },
    FullScan,
}

impl IndexSpec {
    pub fn name(&self) -> String {
        match self {
            IndexSpec::Coax { cells_per_dim } => format!("coax[c={cells_per_dim}]"),
            IndexSpec::ColumnFiles { cells_per_dim, .. } => format!("columnfiles[c={cells_per_dim}]"),
            IndexSpec::UniformGrid { cells_per_dim } => format!("uniformgrid[c={cells_per_dim}]"),
            IndexSpec::FullScan => "fullscan".to_string(),
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            IndexSpec::Coax { .. } => "coax",
            IndexSpec::ColumnFiles { .. } => "columnfiles",
            IndexSpec::UniformGrid { .. } => "uniformgrid",
            IndexSpec::FullScan => "fullscan",
        }
    }

    pub fn cells_per_dim(&self) -> Option<usize> {
        match *self {
            IndexSpec::Coax { cells_per_dim }
            | IndexSpec::ColumnFiles { cells_per_dim, .. }
            | IndexSpec::UniformGrid { cells_per_dim } => Some(cells_per_dim),
            IndexSpec::FullScan => None,
        }
    }
}

/// Expands `family` names over a cells sweep. Known families are `coax`,
/// `columnfiles`, `uniformgrid` and `fullscan`.
pub fn sweep_specs(families: &[impl AsRef<str>], cells: &[usize], sort_dim: usize) -> Result<Vec<IndexSpec>> {
    let mut specs = Vec::new();
    for f in families {
        match f.as_ref() {
            "fullscan" => specs.push(IndexSpec::FullScan),
            fam @ ("coax" | "columnfiles" | "uniformgrid") => {
                for &c in cells {
                    specs.push(match fam {
                        "coax" => IndexSpec::Coax { cells_per_dim: c },
                        "columnfiles" => IndexSpec::ColumnFiles {
                            cells_per_dim: c,
                            sort_dim,
                        },
                        _ => IndexSpec::UniformGrid { cells_per_dim: c },
                    });
                }
            }
            other => return Err(Error::invalid(format!("unknown index `{other}`"))),
        }
    }
    Ok(specs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    /// Detection and outlier-grid settings for `coax` entries; its
    /// `cells_per_dim` is overridden per spec.
    pub coax: CoaxConfig,
    /// Groups to use instead of learning them. Learned groups are computed
    /// once and shared by every `coax` entry.
    pub groups: Option<Vec<CorrelationGroup>>,
    /// Skip configurations whose directory would outgrow the raw data.
    pub skip_oversized: bool,
    /// Replay queries from multiple threads.
    pub parallel: bool,
    /// Dataset label for the report.
    pub dataset: String,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            coax: CoaxConfig::default(),
            groups: None,
            skip_oversized: true,
            parallel: false,
            dataset: String::new(),
        }
    }
}

/// One query on which an index disagreed with the full-scan oracle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    pub kind: QueryKind,
    pub query: usize,
    pub expected: usize,
    pub got: usize,
    /// Up to five rows present on only one side.
    pub missing: Vec<usize>,
    pub extra: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadResult {
    pub kind: QueryKind,
    pub k: usize,
    pub n_queries: usize,
    pub median_query_us: f64,
    pub p99_query_us: f64,
    pub cells_visited_total: u64,
    pub rows_scanned_total: u64,
    pub rows_returned_total: u64,
    pub median_rows_scanned: f64,
    pub correct: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexReport {
    pub name: String,
    pub spec: IndexSpec,
    pub build_ms: f64,
    pub directory_bytes: u64,
    pub results: Vec<WorkloadResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedIndex {
    pub name: String,
    pub predicted_directory_bytes: u64,
    pub data_bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadInfo {
    pub kind: QueryKind,
    pub k: usize,
    pub n_queries: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub dataset: String,
    pub n_rows: usize,
    pub n_dims: usize,
    pub workloads: Vec<WorkloadInfo>,
    /// Groups every `coax` entry was built with.
    pub groups: Vec<CorrelationGroup>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub environment: Environment,
    pub indexes: Vec<IndexReport>,
    pub skipped: Vec<SkippedIndex>,
    /// Every index agreed with the full scan on every query.
    pub valid: bool,
}

/// Field names that carry wall-clock measurements; everything else in a
/// serialized report is a deterministic function of the inputs.
pub const TIMING_FIELDS: [&str; 3] = ["build_ms", "median_query_us", "p99_query_us"];

impl BenchReport {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// The report as JSON with all [`TIMING_FIELDS`] removed.
    pub fn without_timings(&self) -> Result<serde_json::Value> {
        let mut v = serde_json::to_value(self)?;
        strip_keys(&mut v, &TIMING_FIELDS);
        Ok(v)
    }

    pub fn index(&self, name: &str) -> Option<&IndexReport> {
        self.indexes.iter().find(|i| i.name == name)
    }
}

pub(crate) fn strip_keys(v: &mut serde_json::Value, keys: &[&str]) {
    match v {
        serde_json::Value::Object(map) => {
            for k in keys {
                map.remove(*k);
            }
            map.values_mut().for_each(|c| strip_keys(c, keys));
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(|c| strip_keys(c, keys)),
        _ => {}
    }
}

/// An index under test.
#[derive(Debug)]
pub enum BuiltIndex<'a> {
    Coax(Box<CoaxIndex>),
    Grid(GridIndex),
    FullScan(&'a Dataset),
}

impl BuiltIndex<'_> {
    pub fn query_into(&self, q: &QueryRect, out: &mut Vec<usize>) -> QueryStats {
        match self {
            BuiltIndex::Coax(ix) => ix.query_into(q, out).total(),
            BuiltIndex::Grid(g) => g.query_into(q, out),
            BuiltIndex::FullScan(d) => {
                let before = out.len();
                out.extend((0..d.n_rows()).filter(|&r| {
                    q.bounds()
                        .iter()
                        .enumerate()
                        .all(|(dim, b)| b.contains(d.value(r, dim)))
                }));
                QueryStats {
                    cells_visited: 0,
                    rows_scanned: d.n_rows() as u64,
                    rows_returned: (out.len() - before) as u64,
                }
            }
        }
    }

    pub fn directory_bytes(&self) -> u64 {
        match self {
            BuiltIndex::Coax(ix) => ix.directory_bytes(),
            BuiltIndex::Grid(g) => g.directory_bytes(),
            BuiltIndex::FullScan(_) => 0,
        }
    }
}

/// Builds the index described by `spec`.
pub fn build_index<'a>(
    data: &'a Dataset,
    spec: &IndexSpec,
    coax: &CoaxConfig,
    groups: &[CorrelationGroup],
) -> Result<BuiltIndex<'a>> {
    let all: Vec<usize> = (0..data.n_rows()).collect();
    Ok(match *spec {
        IndexSpec::Coax { cells_per_dim } => {
            let cfg = CoaxConfig {
                cells_per_dim,
                ..coax.clone()
            };
            BuiltIndex::Coax(Box::new(CoaxIndex::build_with_groups(data, groups.to_vec(), &cfg)?))
        }
        IndexSpec::ColumnFiles {
            cells_per_dim,
            sort_dim,
        } => BuiltIndex::Grid(GridIndex::column_files(data, &all, sort_dim, cells_per_dim)?),
        IndexSpec::UniformGrid { cells_per_dim } => {
            BuiltIndex::Grid(GridIndex::uniform_grid(data, &all, cells_per_dim)?)
        }
        IndexSpec::FullScan => BuiltIndex::FullScan(data),
    })
}

/// Upper bound on the directory an index would allocate.
fn predicted_directory_bytes(spec: &IndexSpec, n_dims: usize, groups: &[CorrelationGroup]) -> u64 {
    match *spec {
        IndexSpec::Coax { cells_per_dim } => {
            let m: usize = groups.iter().map(|g| g.models.len()).sum();
            directory_bytes_for(&vec![cells_per_dim; n_dims - m - 1])
        }
        IndexSpec::ColumnFiles { cells_per_dim, .. } => directory_bytes_for(&vec![cells_per_dim; n_dims - 1]),
        IndexSpec::UniformGrid { cells_per_dim } => directory_bytes_for(&vec![cells_per_dim; n_dims]),
        IndexSpec::FullScan => 0,
    }
}

struct Replay {
    results: Vec<Vec<usize>>,
    stats: Vec<QueryStats>,
    micros: Vec<f64>,
}

fn replay(ix: &BuiltIndex, queries: &[QueryRect], parallel: bool) -> Replay {
    let run = |q: &QueryRect| {
        let mut out = Vec::new();
        let t = Instant::now();
        let s = ix.query_into(q, &mut out);
        let us = t.elapsed().as_secs_f64() * 1e6;
        out.sort_unstable();
        (out, s, us)
    };
    let rows: Vec<(Vec<usize>, QueryStats, f64)> = if parallel {
        queries.par_iter().map(run).collect()
    } else {
        queries.iter().map(run).collect()
    };
    let mut r = Replay {
        results: Vec::with_capacity(rows.len()),
        stats: Vec::with_capacity(rows.len()),
        micros: Vec::with_capacity(rows.len()),
    };
    for (out, s, us) in rows {
        r.results.push(out);
        r.stats.push(s);
        r.micros.push(us);
    }
    r
}

/// Value at quantile `p` of `v` (nearest rank); 0 for an empty slice.
pub fn percentile(v: &[f64], p: f64) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let rank = ((p * s.len() as f64).ceil() as usize).clamp(1, s.len());
    s[rank - 1]
}

fn median(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

fn diff_sample(expected: &[usize], got: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let missing = expected.iter().filter(|r| got.binary_search(r).is_err()).take(5).copied().collect();
    let extra = got.iter().filter(|r| expected.binary_search(r).is_err()).take(5).copied().collect();
    (missing, extra)
}

/// Builds every index once, replays each workload (one untimed warm-up pass,
/// then a timed pass) and checks every answer against a full scan.
///
/// Fails with [`Error::Correctness`] on the first index that disagrees with
/// the oracle, carrying up to ten mismatching queries.
pub fn run_bench(data: &Dataset, workloads: &[Workload], specs: &[IndexSpec], cfg: &BenchConfig) -> Result<BenchReport> {
    if !specs.contains(&IndexSpec::FullScan) {
        return Err(Error::invalid("benchmarks need the fullscan oracle among the indexes"));
    }
    for w in workloads {
        if let Some(q) = w.queries.iter().find(|q| q.n_dims() != data.n_dims()) {
            return Err(Error::DimMismatch {
                expected: data.n_dims(),
                got: q.n_dims(),
            });
        }
    }
    let needs_groups = specs.iter().any(|s| matches!(s, IndexSpec::Coax { .. }));
    let groups = match (&cfg.groups, needs_groups) {
        (Some(g), _) => g.clone(),
        (None, true) => {
            let mut g = learn_groups(data, &cfg.coax.detect)?;
            refine_margins(data, &mut g, cfg.coax.detect.target_ratio)?;
            g
        }
        (None, false) => Vec::new(),
    };

    let oracle = BuiltIndex::FullScan(data);
    let truth: Vec<Vec<Vec<usize>>> = workloads
        .iter()
        .map(|w| replay(&oracle, &w.queries, true).results)
        .collect();

    let data_bytes = (data.n_rows() * data.n_dims() * 8) as u64;
    let mut indexes = Vec::new();
    let mut skipped = Vec::new();
    for spec in specs {
        let predicted = predicted_directory_bytes(spec, data.n_dims(), &groups);
        if cfg.skip_oversized && predicted > data_bytes {
            skipped.push(SkippedIndex {
                name: spec.name(),
                predicted_directory_bytes: predicted,
                data_bytes,
            });
            continue;
        }
        let t = Instant::now();
        let ix = build_index(data, spec, &cfg.coax, &groups)?;
        let build_ms = t.elapsed().as_secs_f64() * 1e3;

        let mut results = Vec::new();
        for (w, expected) in workloads.iter().zip(&truth) {
            let _warm = replay(&ix, &w.queries, cfg.parallel);
            let r = replay(&ix, &w.queries, cfg.parallel);
            let mismatches: Vec<Mismatch> = r
                .results
                .iter()
                .zip(expected)
                .enumerate()
                .filter(|(_, (got, exp))| got != exp)
                .map(|(i, (got, exp))| {
                    let (missing, extra) = diff_sample(exp, got);
                    Mismatch {
                        kind: w.kind,
                        query: i,
                        expected: exp.len(),
                        got: got.len(),
                        missing,
                        extra,
                    }
                })
                .collect();
            if !mismatches.is_empty() {
                return Err(Error::Correctness {
                    index: spec.name(),
                    mismatched: mismatches.len(),
                    total: w.queries.len(),
                    samples: mismatches.into_iter().take(10).collect(),
                });
            }
            let sum = |f: fn(&QueryStats) -> u64| r.stats.iter().map(f).sum::<u64>();
            let scanned: Vec<f64> = r.stats.iter().map(|s| s.rows_scanned as f64).collect();
            results.push(WorkloadResult {
                kind: w.kind,
                k: w.k,
                n_queries: w.queries.len(),
                median_query_us: median(&r.micros),
                p99_query_us: percentile(&r.micros, 0.99),
                cells_visited_total: sum(|s| s.cells_visited),
                rows_scanned_total: sum(|s| s.rows_scanned),
                rows_returned_total: sum(|s| s.rows_returned),
                median_rows_scanned: median(&scanned),
                correct: true,
            });
        }
        indexes.push(IndexReport {
            name: spec.name(),
            spec: *spec,
            build_ms,
            directory_bytes: ix.directory_bytes(),
            results,
        });
    }

    Ok(BenchReport {
        environment: Environment {
            dataset: cfg.dataset.clone(),
            n_rows: data.n_rows(),
            n_dims: data.n_dims(),
            workloads: workloads
                .iter()
                .map(|w| WorkloadInfo {
                    kind: w.kind,
                    k: w.k,
                    n_queries: w.queries.len(),
                    seed: w.seed,
                })
                .collect(),
            groups,
        },
        indexes,
        skipped,
        valid: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::full_scan;
    use crate::synth::{generate, SynthConfig};

    fn small() -> Dataset {
        generate(
            &SynthConfig::independent(3000, 4, 1)
                .with_fd(0, 1, 2.0, 0.0)
                .with_outliers(0.1),
        )
        .unwrap()
        .data
    }

    #[test]
    fn knn_boxes_hold_at_least_k_rows() {
        let d = small();
        for k in [1, 10, 100] {
            let w = gen_workload(&d, k, 20, QueryKind::Range, 3).unwrap();
            for (q, &seed_row) in w.queries.iter().zip(&w.seed_rows) {
                let rows = full_scan(&d, q);
                assert!(rows.len() >= k);
                assert!(rows.contains(&seed_row));
                assert!(q.bounds().iter().all(|b| b.lo() <= b.hi()));
            }
        }
    }

    #[test]
    fn k_one_is_the_seed_record_and_k_all_is_the_bbox() {
        let d = small();
        let w = gen_workload(&d, 1, 5, QueryKind::Range, 0).unwrap();
        for (q, &r) in w.queries.iter().zip(&w.seed_rows) {
            assert_eq!(q, &QueryRect::point(&d.row(r)));
        }
        let w = gen_workload(&d, d.n_rows(), 2, QueryKind::Range, 0).unwrap();
        let bbox = d.bounds().unwrap();
        for q in &w.queries {
            for (b, &(lo, hi)) in q.bounds().iter().zip(&bbox) {
                assert_eq!((b.lo(), b.hi()), (lo, hi));
            }
        }
    }

    #[test]
    fn neighbours_by_brute_force() {
        let d = small();
        let knn = KnnBoxes::new(&d);
        let (lo, hi): (Vec<f64>, Vec<f64>) = d.bounds().unwrap().into_iter().unzip();
        let norm = |r: usize, dim: usize| {
            let w = hi[dim] - lo[dim];
            (d.value(r, dim) - lo[dim]) / w
        };
        let dist = |a: usize, b: usize| (0..4).map(|k| (norm(a, k) - norm(b, k)).powi(2)).sum::<f64>();
        let mut all: Vec<usize> = (0..d.n_rows()).collect();
        all.sort_by(|&a, &b| dist(17, a).total_cmp(&dist(17, b)).then(a.cmp(&b)));
        let mut got = knn.neighbours(17, 25);
        got.sort_by(|&a, &b| dist(17, a).total_cmp(&dist(17, b)).then(a.cmp(&b)));
        assert_eq!(got, all[..25]);
    }

    #[test]
    fn point_workloads_are_degenerate() {
        let d = small();
        let w = gen_workload(&d, 5, 10, QueryKind::Point, 9).unwrap();
        assert!(w.queries.iter().all(QueryRect::is_point));
        assert!(gen_workload(&d, 0, 1, QueryKind::Range, 0).is_err());
        assert!(gen_workload(&d, d.n_rows() + 1, 1, QueryKind::Range, 0).is_err());
    }

    #[test]
    fn bench_all_indexes() {
        let d = small();
        let ws = vec![
            gen_workload(&d, 20, 50, QueryKind::Range, 1).unwrap(),
            gen_workload(&d, 1, 50, QueryKind::Point, 2).unwrap(),
        ];
        let specs = sweep_specs(&["coax", "columnfiles", "uniformgrid", "fullscan"], &[4, 8], 0).unwrap();
        let r = run_bench(&d, &ws, &specs, &BenchConfig::default()).unwrap();
        assert!(r.valid);
        assert_eq!(r.indexes.len() + r.skipped.len(), 7);
        assert_eq!(r.environment.groups.len(), 1);
        let coax = r.index("coax[c=8]").unwrap();
        let cf = r.index("columnfiles[c=8]").unwrap();
        assert!(coax.directory_bytes < cf.directory_bytes);
        let fs = r.index("fullscan").unwrap();
        assert_eq!(fs.results[0].rows_scanned_total, 50 * 3000);
        for ix in &r.indexes {
            assert_eq!(ix.results[0].rows_returned_total, fs.results[0].rows_returned_total);
        }
    }

    #[test]
    fn fullscan_only_and_missing_oracle() {
        let d = small();
        let ws = vec![gen_workload(&d, 5, 10, QueryKind::Range, 1).unwrap()];
        let r = run_bench(&d, &ws, &[IndexSpec::FullScan], &BenchConfig::default()).unwrap();
        assert_eq!(r.indexes.len(), 1);
        assert!(r.environment.groups.is_empty());
        let no_oracle = [IndexSpec::Coax { cells_per_dim: 4 }];
        assert!(run_bench(&d, &ws, &no_oracle, &BenchConfig::default()).is_err());
    }

    #[test]
    fn oracle_check_detects_tampered_margins() {
        let d = small();
        let mut groups = learn_groups(&d, &Default::default()).unwrap();
        refine_margins(&d, &mut groups, 0.9).unwrap();
        // shrink the bands after the split: translation now prunes primary
        // rows that do match
        let mut ix = CoaxIndex::build_with_groups(&d, groups, &CoaxConfig::default()).unwrap();
        for m in ix.groups.iter_mut().flat_map(|g| g.models.iter_mut()) {
            m.eps_lb *= 0.01;
            m.eps_ub *= 0.01;
        }
        let w = gen_workload(&d, 50, 200, QueryKind::Range, 4).unwrap();
        let bad = w
            .queries
            .iter()
            .filter(|q| {
                let mut out = Vec::new();
                ix.query_into(q, &mut out);
                out.sort_unstable();
                out != full_scan(&d, q)
            })
            .count();
        assert!(bad > 0, "shrunken margins should lose rows");
    }

    #[test]
    fn oversized_configs_are_skipped() {
        let d = small();
        let ws = vec![gen_workload(&d, 5, 5, QueryKind::Range, 1).unwrap()];
        let specs = [IndexSpec::FullScan, IndexSpec::UniformGrid { cells_per_dim: 64 }];
        let r = run_bench(&d, &ws, &specs, &BenchConfig::default()).unwrap();
        assert_eq!(r.skipped.len(), 1);
        assert_eq!(r.skipped[0].name, "uniformgrid[c=64]");
    }

    #[test]
    fn timing_fields_strip() {
        let d = small();
        let ws = vec![gen_workload(&d, 5, 5, QueryKind::Range, 1).unwrap()];
        let specs = sweep_specs(&["coax", "fullscan"], &[4], 0).unwrap();
        let a = run_bench(&d, &ws, &specs, &BenchConfig::default()).unwrap();
        let b = run_bench(&d, &ws, &specs, &BenchConfig::default()).unwrap();
        assert_eq!(a.without_timings().unwrap(), b.without_timings().unwrap());
        let text = a.without_timings().unwrap().to_string();
        assert!(TIMING_FIELDS.iter().all(|f| !text.contains(f)));
    }

    #[test]
    fn percentiles() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(percentile(&v, 0.99), 99.0);
        assert_eq!(percentile(&v, 1.0), 100.0);
        assert_eq!(median(&v), 50.5);
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
    }
}
