//! The correlation-aware index: a dimension-reduced primary grid over the
//! records that respect every learned dependency, plus a full-dimensional
//! outlier grid for the rest.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::grid::{GridConfig, GridIndex, GridMode, QueryStats};
use crate::softfd::{
    learn_groups, select_margins, split_data, validate_groups, CorrelationGroup, DetectConfig,
    SplitResult,
};
use crate::translate::{dependent_range_to_indexed, QueryRect};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoaxConfig {
    pub detect: DetectConfig,
    /// Cells per grid dimension of the primary index.
    pub cells_per_dim: usize,
    /// In-cell sort dimension of both grids. Defaults to the predictor of the
    /// largest group, or dimension 0 when nothing was learned.
    pub sort_dim: Option<usize>,
    /// Cells per grid dimension of the outlier index. Defaults to the largest
    /// count (at most `cells_per_dim`) whose directory has no more cells than
    /// there are outliers.
    pub outlier_cells_per_dim: Option<usize>,
}

impl Default for CoaxConfig {
    fn default() -> Self {
        Self {
            detect: DetectConfig::default(),
            cells_per_dim: 16,
            sort_dim: None,
            outlier_cells_per_dim: None,
        }
    }
}

/// Shape and memory summary of a built index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexStats {
    pub n_rows: usize,
    pub n_dims: usize,
    pub primary_rows: usize,
    pub outlier_rows: usize,
    pub primary_ratio: f64,
    pub indexed_dims: usize,
    pub dependent_dims: usize,
    pub primary_grid_dims: usize,
    pub sort_dim: usize,
    pub primary_cells: usize,
    pub outlier_cells: usize,
    pub primary_directory_bytes: u64,
    pub outlier_directory_bytes: u64,
}

/// Work split by side for one [`CoaxIndex::query`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoaxQueryStats {
    pub primary: QueryStats,
    pub outlier: QueryStats,
    /// Whether translation proved the primary side cannot match.
    pub primary_skipped: bool,
}

impl CoaxQueryStats {
    pub fn total(&self) -> QueryStats {
        let mut t = self.primary;
        t += self.outlier;
        t
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoaxIndex {
    pub(crate) names: Vec<String>,
    pub(crate) n_rows: usize,
    pub(crate) groups: Vec<CorrelationGroup>,
    pub(crate) sort_dim: usize,
    pub(crate) primary: Option<GridIndex>,
    pub(crate) outliers: Option<GridIndex>,
}

impl CoaxIndex {
    /// Learns dependency groups from `data`, re-selects each model's margins
    /// over the full dataset, splits the rows and builds both grids.
    pub fn build(data: &Dataset, cfg: &CoaxConfig) -> Result<Self> {
        let mut groups = learn_groups(data, &cfg.detect)?;
        refine_margins(data, &mut groups, cfg.detect.target_ratio)?;
        Self::build_with_groups(data, groups, cfg)
    }

    /// Builds with the given groups, taking their margins literally.
    pub fn build_with_groups(data: &Dataset, groups: Vec<CorrelationGroup>, cfg: &CoaxConfig) -> Result<Self> {
        if data.n_rows() == 0 {
            return Err(Error::Empty("dataset"));
        }
        let n_dims = data.n_dims();
        validate_groups(&groups, n_dims)?;
        let dependent = dependent_mask(&groups, n_dims);

        let sort_dim = match cfg.sort_dim {
            Some(s) => {
                data.check_dim(s)?;
                if dependent[s] {
                    return Err(Error::invalid(format!(
                        "sort dimension {s} is a dependent attribute"
                    )));
                }
                s
            }
            None => groups
                .iter()
                .enumerate()
                .max_by_key(|(i, g)| (g.models.len(), std::cmp::Reverse(*i)))
                .map(|(_, g)| g.predictor)
                .unwrap_or(0),
        };

        let SplitResult {
            primary_rows,
            outlier_rows,
        } = split_data(data, &groups);

        let primary_cfg = GridConfig {
            grid_dims: (0..n_dims)
                .filter(|&d| !dependent[d] && d != sort_dim)
                .collect(),
            sort_dim: Some(sort_dim),
            cells_per_dim: cfg.cells_per_dim,
            mode: GridMode::Quantile,
        };
        let primary = if primary_rows.is_empty() {
            None
        } else {
            Some(GridIndex::build(data, &primary_rows, &primary_cfg)?)
        };

        let outliers = if outlier_rows.is_empty() {
            None
        } else {
            let cells = cfg.outlier_cells_per_dim.unwrap_or_else(|| {
                auto_cells(outlier_rows.len(), n_dims.saturating_sub(1), cfg.cells_per_dim)
            });
            Some(GridIndex::build(
                data,
                &outlier_rows,
                &GridConfig::column_files(n_dims, sort_dim, cells),
            )?)
        };

        Ok(Self {
            names: data.names().to_vec(),
            n_rows: data.n_rows(),
            groups,
            sort_dim,
            primary,
            outliers,
        })
    }

    pub fn groups(&self) -> &[CorrelationGroup] {
        &self.groups
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn n_dims(&self) -> usize {
        self.names.len()
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn sort_dim(&self) -> usize {
        self.sort_dim
    }

    pub fn primary(&self) -> Option<&GridIndex> {
        self.primary.as_ref()
    }

    pub fn outliers(&self) -> Option<&GridIndex> {
        self.outliers.as_ref()
    }

    /// Dimensions the primary index does not store as grid or sort axes.
    pub fn dependent_dims(&self) -> Vec<usize> {
        let mut deps: Vec<usize> = self.groups.iter().flat_map(|g| g.dependents()).collect();
        deps.sort_unstable();
        deps
    }

    /// Narrows `q` on every predictor by the translated constraints of its
    /// dependents. `None` when some translated interval misses the predictor's
    /// own constraint, i.e. no primary record can match.
    pub fn translate(&self, q: &QueryRect) -> Option<QueryRect> {
        let mut narrowed = q.clone();
        for g in &self.groups {
            let mut x = q.dim(g.predictor);
            for m in &g.models {
                let y = q.dim(m.dependent_dim);
                if y.is_full() {
                    continue;
                }
                // group models are validated to have nonzero slopes
                let t = dependent_range_to_indexed(m, y.lo(), y.hi()).ok()?;
                x = x.intersect(&t);
                if x.is_empty() {
                    return None;
                }
            }
            narrowed = narrowed.with_dim(g.predictor, x).ok()?;
        }
        Some(narrowed)
    }

    /// Appends the ids of all rows inside `q` to `out`, unordered. Exact: the primary
    /// side filters on the full original rectangle after translation.
    pub fn query_into(&self, q: &QueryRect, out: &mut Vec<usize>) -> CoaxQueryStats {
        assert_eq!(q.n_dims(), self.n_dims(), "query dimensionality");
        let mut stats = CoaxQueryStats::default();
        if let Some(primary) = &self.primary {
            match self.translate(q) {
                Some(narrowed) => stats.primary = primary.query_into(&narrowed, out),
                None => stats.primary_skipped = true,
            }
        }
        if let Some(outliers) = &self.outliers {
            stats.outlier = outliers.query_into(q, out);
        }
        stats
    }

    /// Sorted ids of all rows inside `q`.
    pub fn query(&self, q: &QueryRect) -> (Vec<usize>, CoaxQueryStats) {
        let mut out = Vec::new();
        let stats = self.query_into(q, &mut out);
        out.sort_unstable();
        (out, stats)
    }

    pub fn point_query(&self, point: &[f64]) -> Vec<usize> {
        self.query(&QueryRect::point(point)).0
    }

    pub fn directory_bytes(&self) -> u64 {
        self.primary.as_ref().map_or(0, GridIndex::directory_bytes)
            + self.outliers.as_ref().map_or(0, GridIndex::directory_bytes)
    }

    pub fn stats(&self) -> IndexStats {
        let primary_rows = self.primary.as_ref().map_or(0, GridIndex::len);
        let outlier_rows = self.outliers.as_ref().map_or(0, GridIndex::len);
        let dependent_dims = self.groups.iter().map(|g| g.models.len()).sum::<usize>();
        let indexed_dims = self.n_dims() - dependent_dims;
        IndexStats {
            n_rows: self.n_rows,
            n_dims: self.n_dims(),
            primary_rows,
            outlier_rows,
            primary_ratio: primary_rows as f64 / self.n_rows as f64,
            indexed_dims,
            dependent_dims,
            primary_grid_dims: indexed_dims - 1,
            sort_dim: self.sort_dim,
            primary_cells: self.primary.as_ref().map_or(0, GridIndex::n_cells),
            outlier_cells: self.outliers.as_ref().map_or(0, GridIndex::n_cells),
            primary_directory_bytes: self.primary.as_ref().map_or(0, GridIndex::directory_bytes),
            outlier_directory_bytes: self.outliers.as_ref().map_or(0, GridIndex::directory_bytes),
        }
    }
}

/// Re-selects every model's margins from its displacements over all rows of
/// `data`, and records the achieved in-margin fraction as its fit quality.
pub fn refine_margins(data: &Dataset, groups: &mut [CorrelationGroup], target_ratio: f64) -> Result<()> {
    if data.n_rows() == 0 {
        return Ok(());
    }
    for m in groups.iter_mut().flat_map(|g| g.models.iter_mut()) {
        let disp: Vec<f64> = (0..data.n_rows())
            .map(|r| m.displacement(data.value(r, m.indexed_dim), data.value(r, m.dependent_dim)))
            .collect();
        let margins = select_margins(&disp, target_ratio)?;
        m.eps_lb = margins.lb;
        m.eps_ub = margins.ub;
        let inside = disp
            .iter()
            .filter(|&&v| -margins.lb <= v && v <= margins.ub)
            .count();
        m.fit_quality = inside as f64 / disp.len() as f64;
    }
    Ok(())
}

fn dependent_mask(groups: &[CorrelationGroup], n_dims: usize) -> Vec<bool> {
    let mut mask = vec![false; n_dims];
    for d in groups.iter().flat_map(|g| g.dependents()) {
        mask[d] = true;
    }
    mask
}

/// Largest `c <= max_cells` with `c^grid_dims <= rows` (at least 1).
fn auto_cells(rows: usize, grid_dims: usize, max_cells: usize) -> usize {
    let fits = |c: usize| {
        (0..grid_dims)
            .try_fold(1usize, |acc, _| acc.checked_mul(c))
            .is_some_and(|cells| cells <= rows.max(1))
    };
    (1..=max_cells.max(1)).take_while(|&c| fits(c)).last().unwrap_or(1)
}
