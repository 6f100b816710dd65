use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::{bucketize, central_interval, dense_centers, fit_linear, select_margins};
use super::{CorrelationGroup, SoftFdModel};
use crate::dataset::{sample_indices, Dataset};
use crate::error::{Error, Result};

/// Knobs of the sampling-and-bucketing dependency detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectConfig {
    /// Rows drawn for learning; capped at the dataset size.
    pub sample_count: usize,
    /// Buckets per axis.
    pub chunks: usize,
    /// Bucket density threshold. `None` means twice the count a uniform
    /// distribution would put in each bucket.
    pub threshold: Option<u64>,
    /// Fraction of records the margins must cover.
    pub target_ratio: f64,
    /// Minimum fraction of sampled records inside the margins.
    pub min_quality: f64,
    pub seed: u64,
}

impl Default for DetectConfig {
    fn default() -> Self {
        Self {
            sample_count: 100_000,
            chunks: 100,
            threshold: None,
            target_ratio: 0.9,
            min_quality: 0.75,
            seed: 0,
        }
    }
}

impl DetectConfig {
    pub fn effective_threshold(&self, n_sampled: usize) -> u64 {
        self.threshold.unwrap_or_else(|| {
            let per_cell = n_sampled as f64 / (self.chunks * self.chunks) as f64;
            ((per_cell * 2.0) as u64).max(1)
        })
    }

    fn validate(&self) -> Result<()> {
        if self.sample_count == 0 {
            return Err(Error::invalid("sample count must be positive"));
        }
        if self.chunks < 2 {
            return Err(Error::invalid("bucket chunks must be at least 2"));
        }
        if !(self.target_ratio > 0.0 && self.target_ratio <= 1.0) {
            return Err(Error::invalid("target ratio must lie in (0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.min_quality) {
            return Err(Error::invalid("min quality must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Why a candidate pair was not accepted as a soft dependency.
#[derive(Debug, Clone, PartialEq)]
pub enum Rejection {
    /// Bucketing, density filtering or the regression itself failed.
    Degenerate(String),
    ZeroSlope,
    LowQuality { quality: f64 },
    /// The margin band is wider than half the central interval holding the
    /// same fraction of the dependent's values.
    Uninformative { band: f64, range: f64 },
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rejection::Degenerate(e) => write!(f, "degenerate: {e}"),
            Rejection::ZeroSlope => f.write_str("zero slope"),
            Rejection::LowQuality { quality } => write!(f, "fit quality {quality:.3} too low"),
            Rejection::Uninformative { band, range } => {
                write!(f, "margin band {band:.3} wider than half the central range {range:.3}")
            }
        }
    }
}

/// Fits candidate dependencies between dimensions of one dataset, always on
/// the same seeded row sample.
#[derive(Debug)]
pub struct PairFitter<'a> {
    data: &'a Dataset,
    sample: Vec<usize>,
    cfg: DetectConfig,
    threshold: u64,
}

impl<'a> PairFitter<'a> {
    pub fn new(data: &'a Dataset, cfg: DetectConfig) -> Result<Self> {
        cfg.validate()?;
        let sample = sample_indices(data.n_rows(), cfg.sample_count, cfg.seed);
        let threshold = cfg.effective_threshold(sample.len());
        Ok(Self {
            data,
            sample,
            cfg,
            threshold,
        })
    }

    pub fn threshold(&self) -> u64 {
        self.threshold
    }

    pub fn sample_len(&self) -> usize {
        self.sample.len()
    }

    /// Learns `dependent ≈ m · indexed + b` with margins on the sample.
    pub fn fit(&self, indexed: usize, dependent: usize) -> Result<SoftFdModel, Rejection> {
        let xs: Vec<f64> = self.sample.iter().map(|&r| self.data.value(r, indexed)).collect();
        let ds: Vec<f64> = self.sample.iter().map(|&r| self.data.value(r, dependent)).collect();
        let (x_min, _) = crate::dataset::min_max(&xs);
        let (d_min, _) = crate::dataset::min_max(&ds);
        let xs_shift: Vec<f64> = xs.iter().map(|&x| x - x_min).collect();
        let ds_shift: Vec<f64> = ds.iter().map(|&d| d - d_min).collect();

        let degenerate = |e: Error| Rejection::Degenerate(e.to_string());
        let grid = bucketize(&xs_shift, &ds_shift, self.cfg.chunks).map_err(degenerate)?;
        let train = dense_centers(&grid, self.threshold).map_err(degenerate)?;
        let line = fit_linear(&train).map_err(degenerate)?;
        if line.slope == 0.0 || !line.slope.is_finite() {
            return Err(Rejection::ZeroSlope);
        }
        // back to unshifted coordinates
        let slope = line.slope;
        let intercept = line.intercept + d_min - slope * x_min;

        let disp: Vec<f64> = xs
            .iter()
            .zip(&ds)
            .map(|(&x, &d)| d - (slope * x + intercept))
            .collect();
        let margins = select_margins(&disp, self.cfg.target_ratio).map_err(degenerate)?;
        let inside = disp
            .iter()
            .filter(|&&v| -margins.lb <= v && v <= margins.ub)
            .count();
        let quality = inside as f64 / disp.len() as f64;

        let band = margins.lb + margins.ub;
        // spread of the dependent alone at the same coverage, so that outliers
        // cannot make a useless band look narrow
        let (q_lo, q_hi) = central_interval(&ds, self.cfg.target_ratio).map_err(degenerate)?;
        let range = q_hi - q_lo;
        if band > 0.5 * range {
            return Err(Rejection::Uninformative { band, range });
        }
        if quality < self.cfg.min_quality {
            return Err(Rejection::LowQuality { quality });
        }
        Ok(SoftFdModel {
            indexed_dim: indexed,
            dependent_dim: dependent,
            slope,
            intercept,
            eps_lb: margins.lb,
            eps_ub: margins.ub,
            fit_quality: quality,
        })
    }

    /// Tests every unordered pair in both orientations and keeps the better
    /// orientation of each accepted pair. Output is sorted by
    /// `(indexed_dim, dependent_dim)`.
    pub fn detect_pairs(&self) -> Vec<SoftFdModel> {
        let n = self.data.n_dims();
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .collect();
        let mut models: Vec<SoftFdModel> = pairs
            .par_iter()
            .filter_map(|&(i, j)| {
                let forward = self.fit(i, j).ok();
                let backward = self.fit(j, i).ok();
                match (forward, backward) {
                    (Some(f), Some(b)) => Some(if b.fit_quality > f.fit_quality { b } else { f }),
                    (f, b) => f.or(b),
                }
            })
            .collect();
        models.sort_by_key(|m| (m.indexed_dim, m.dependent_dim));
        models
    }

    /// [`merge_groups`] with on-demand refits against this fitter's sample.
    pub fn merge_groups(&self, models: &[SoftFdModel]) -> Vec<CorrelationGroup> {
        merge_groups(models, |p, d| self.fit(p, d).ok())
    }
}

/// Detects pairwise soft dependencies; an empty list means none were found.
pub fn detect_pairs(data: &Dataset, cfg: &DetectConfig) -> Result<Vec<SoftFdModel>> {
    if data.n_dims() < 2 {
        return Err(Error::invalid("dependency detection needs at least two dimensions"));
    }
    Ok(PairFitter::new(data, *cfg)?.detect_pairs())
}

/// Full learning step: pair detection followed by group merging.
pub fn learn_groups(data: &Dataset, cfg: &DetectConfig) -> Result<Vec<CorrelationGroup>> {
    if data.n_dims() < 2 {
        return Ok(Vec::new());
    }
    let fitter = PairFitter::new(data, *cfg)?;
    let models = fitter.detect_pairs();
    Ok(fitter.merge_groups(&models))
}

/// Merges models sharing a dimension into groups.
///
/// Within each connected component, the predictor is the dimension with the
/// largest summed `fit_quality` over the models where it is the indexed side
/// (ties go to the lower index). Dimensions without a direct model from the
/// predictor are refitted through `refit(predictor, dependent)`; those whose
/// refit fails are left out of the group.
pub fn merge_groups<F>(models: &[SoftFdModel], mut refit: F) -> Vec<CorrelationGroup>
where
    F: FnMut(usize, usize) -> Option<SoftFdModel>,
{
    let Some(max_dim) = models
        .iter()
        .map(|m| m.indexed_dim.max(m.dependent_dim))
        .max()
    else {
        return Vec::new();
    };
    let mut uf = UnionFind::new(max_dim + 1);
    let mut involved = vec![false; max_dim + 1];
    for m in models {
        uf.union(m.indexed_dim, m.dependent_dim);
        involved[m.indexed_dim] = true;
        involved[m.dependent_dim] = true;
    }

    let mut components: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; max_dim + 1];
    for dim in (0..=max_dim).filter(|&d| involved[d]) {
        let root = uf.find(dim);
        if slot[root] == usize::MAX {
            slot[root] = components.len();
            components.push(Vec::new());
        }
        components[slot[root]].push(dim);
    }

    let mut groups = Vec::new();
    for dims in components {
        let score = |p: usize| -> f64 {
            models
                .iter()
                .filter(|m| m.indexed_dim == p)
                .map(|m| m.fit_quality)
                .sum()
        };
        // `dims` is ascending, so strict `>` keeps the lower index on ties.
        let mut predictor = dims[0];
        let mut best = score(predictor);
        for &d in &dims[1..] {
            let s = score(d);
            if s > best {
                best = s;
                predictor = d;
            }
        }
        let group_models: Vec<SoftFdModel> = dims
            .iter()
            .filter(|&&d| d != predictor)
            .filter_map(|&d| {
                models
                    .iter()
                    .find(|m| m.indexed_dim == predictor && m.dependent_dim == d)
                    .copied()
                    .or_else(|| refit(predictor, d))
            })
            .collect();
        if !group_models.is_empty() {
            groups.push(CorrelationGroup {
                predictor,
                models: group_models,
            });
        }
    }
    groups
}

/// Row partition produced by [`split_data`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SplitResult {
    pub primary_rows: Vec<usize>,
    pub outlier_rows: Vec<usize>,
}

impl SplitResult {
    pub fn primary_ratio(&self) -> f64 {
        let total = self.primary_rows.len() + self.outlier_rows.len();
        if total == 0 {
            return 1.0;
        }
        self.primary_rows.len() as f64 / total as f64
    }
}

/// A row is primary iff it lies inside the closed margins of every model.
pub fn split_data(data: &Dataset, groups: &[CorrelationGroup]) -> SplitResult {
    let models: Vec<&SoftFdModel> = groups.iter().flat_map(|g| &g.models).collect();
    let mut split = SplitResult::default();
    for row in 0..data.n_rows() {
        let conforming = models
            .iter()
            .all(|m| m.contains(data.value(row, m.indexed_dim), data.value(row, m.dependent_dim)));
        if conforming {
            split.primary_rows.push(row);
        } else {
            split.outlier_rows.push(row);
        }
    }
    split
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}
