//! Grid files with per-cell contiguous row storage.
//!
//! A [`GridIndex`] partitions a chosen set of dimensions into cells, either at
//! data quantiles or at equal widths, and stores every record of a cell in one
//! contiguous block of a row store. An optional sort dimension orders records
//! inside each cell, so range constraints on that dimension become two binary
//! searches instead of one more grid axis.
//!
//! The same structure backs the primary and outlier sides of a
//! [`CoaxIndex`](crate::CoaxIndex) as well as the column-files and
//! uniform-grid baselines.

use serde::{Deserialize, Serialize};

use crate::dataset::{min_max, quantile_sorted, Dataset};
use crate::error::{Error, Result};
use crate::translate::QueryRect;

/// Bytes charged per cell: a `u64` start offset and a `u64` length.
pub const CELL_DESCRIPTOR_BYTES: u64 = 16;
/// Bytes charged per stored cell boundary.
pub const BOUNDARY_BYTES: u64 = 8;
/// Upper bound on directory entries a single grid may allocate.
pub const MAX_CELLS: usize = 1 << 28;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridMode {
    /// Boundaries at empirical quantiles of the indexed rows.
    Quantile,
    /// Equal-width boundaries between each dimension's min and max.
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub grid_dims: Vec<usize>,
    pub sort_dim: Option<usize>,
    pub cells_per_dim: usize,
    pub mode: GridMode,
}

impl GridConfig {
    /// Quantile grid over every dimension but `sort_dim`, sorted on `sort_dim`.
    pub fn column_files(n_dims: usize, sort_dim: usize, cells_per_dim: usize) -> Self {
        Self {
            grid_dims: (0..n_dims).filter(|&d| d != sort_dim).collect(),
            sort_dim: Some(sort_dim),
            cells_per_dim,
            mode: GridMode::Quantile,
        }
    }

    /// Equal-width grid over every dimension with no in-cell order.
    pub fn uniform_grid(n_dims: usize, cells_per_dim: usize) -> Self {
        Self {
            grid_dims: (0..n_dims).collect(),
            sort_dim: None,
            cells_per_dim,
            mode: GridMode::Uniform,
        }
    }
}

/// Work done by one query.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryStats {
    pub cells_visited: u64,
    pub rows_scanned: u64,
    pub rows_returned: u64,
}

impl std::ops::AddAssign for QueryStats {
    fn add_assign(&mut self, rhs: Self) {
        self.cells_visited += rhs.cells_visited;
        self.rows_scanned += rhs.rows_scanned;
        self.rows_returned += rhs.rows_returned;
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub(crate) struct Cell {
    pub(crate) start: u64,
    pub(crate) len: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridIndex {
    pub(crate) n_dims: usize,
    pub(crate) grid_dims: Vec<usize>,
    pub(crate) sort_dim: Option<usize>,
    pub(crate) mode: GridMode,
    pub(crate) boundaries: Vec<Vec<f64>>,
    pub(crate) cells: Vec<Cell>,
    /// Row-major record store, `n_dims` values per record, grouped by cell.
    pub(crate) records: Vec<f64>,
    pub(crate) row_ids: Vec<usize>,
    pub(crate) bbox: Vec<(f64, f64)>,
}

/// Directory size of a dense grid with the given number of cells per grid
/// dimension, using the same accounting as [`GridIndex::directory_bytes`].
pub fn directory_bytes_for(cells_per_grid_dim: &[usize]) -> u64 {
    let cells = cells_per_grid_dim
        .iter()
        .fold(1u64, |acc, &c| acc.saturating_mul(c as u64));
    let boundaries: u64 = cells_per_grid_dim
        .iter()
        .map(|&c| c.saturating_sub(1) as u64)
        .sum();
    cells
        .saturating_mul(CELL_DESCRIPTOR_BYTES)
        .saturating_add(boundaries * BOUNDARY_BYTES)
}

impl GridIndex {
    /// Indexes `rows` of `data` (full records are copied into the row store).
    pub fn build(data: &Dataset, rows: &[usize], cfg: &GridConfig) -> Result<Self> {
        let n_dims = data.n_dims();
        if rows.is_empty() {
            return Err(Error::Empty("grid rows"));
        }
        if cfg.cells_per_dim == 0 {
            return Err(Error::invalid("cells per dimension must be at least 1"));
        }
        for &d in cfg.grid_dims.iter().chain(cfg.sort_dim.as_ref()) {
            data.check_dim(d)?;
        }
        if let Some(s) = cfg.sort_dim {
            if cfg.grid_dims.contains(&s) {
                return Err(Error::invalid("sort dimension must not be a grid dimension"));
            }
        }
        let mut unique = cfg.grid_dims.clone();
        unique.sort_unstable();
        unique.dedup();
        if unique.len() != cfg.grid_dims.len() {
            return Err(Error::invalid("grid dimensions must be distinct"));
        }

        let boundaries: Vec<Vec<f64>> = cfg
            .grid_dims
            .iter()
            .map(|&d| {
                let values: Vec<f64> = rows.iter().map(|&r| data.value(r, d)).collect();
                match cfg.mode {
                    GridMode::Quantile => quantile_boundaries(values, cfg.cells_per_dim),
                    GridMode::Uniform => uniform_boundaries(&values, cfg.cells_per_dim),
                }
            })
            .collect();
        let n_cells = boundaries.iter().try_fold(1usize, |acc, b| {
            acc.checked_mul(b.len() + 1).filter(|&c| c <= MAX_CELLS)
        });
        let Some(n_cells) = n_cells else {
            return Err(Error::invalid(format!(
                "grid directory exceeds {MAX_CELLS} cells"
            )));
        };

        let mut grid = GridIndex {
            n_dims,
            grid_dims: cfg.grid_dims.clone(),
            sort_dim: cfg.sort_dim,
            mode: cfg.mode,
            boundaries,
            cells: vec![Cell::default(); n_cells],
            records: Vec::with_capacity(rows.len() * n_dims),
            row_ids: Vec::with_capacity(rows.len()),
            bbox: Vec::new(),
        };

        // counting sort of rows into cells
        let cell_of: Vec<usize> = rows
            .iter()
            .map(|&r| grid.cell_id(|d| data.value(r, d)))
            .collect();
        for &c in &cell_of {
            grid.cells[c].len += 1;
        }
        let mut next = 0u64;
        for cell in &mut grid.cells {
            cell.start = next;
            next += cell.len;
        }
        let mut cursor: Vec<u64> = grid.cells.iter().map(|c| c.start).collect();
        let mut order = vec![0usize; rows.len()];
        for (&r, &c) in rows.iter().zip(&cell_of) {
            order[cursor[c] as usize] = r;
            cursor[c] += 1;
        }
        if let Some(s) = cfg.sort_dim {
            for cell in &grid.cells {
                let block = &mut order[cell.start as usize..(cell.start + cell.len) as usize];
                block.sort_by(|&a, &b| {
                    data.value(a, s)
                        .total_cmp(&data.value(b, s))
                        .then(a.cmp(&b))
                });
            }
        }
        for &r in &order {
            grid.records.extend((0..n_dims).map(|d| data.value(r, d)));
        }
        grid.row_ids = order;
        grid.bbox = (0..n_dims)
            .map(|d| min_max(&rows.iter().map(|&r| data.value(r, d)).collect::<Vec<_>>()))
            .collect();
        Ok(grid)
    }

    /// Quantile grid over every dimension but `sort_dim`.
    pub fn column_files(data: &Dataset, rows: &[usize], sort_dim: usize, cells_per_dim: usize) -> Result<Self> {
        Self::build(data, rows, &GridConfig::column_files(data.n_dims(), sort_dim, cells_per_dim))
    }

    /// Equal-width grid over all dimensions, scanned cell by cell.
    pub fn uniform_grid(data: &Dataset, rows: &[usize], cells_per_dim: usize) -> Result<Self> {
        Self::build(data, rows, &GridConfig::uniform_grid(data.n_dims(), cells_per_dim))
    }

    #[inline]
    fn cell_coord(&self, k: usize, v: f64) -> usize {
        self.boundaries[k].partition_point(|&b| b <= v)
    }

    fn cell_id(&self, value: impl Fn(usize) -> f64) -> usize {
        self.grid_dims
            .iter()
            .enumerate()
            .fold(0usize, |id, (k, &d)| {
                id * (self.boundaries[k].len() + 1) + self.cell_coord(k, value(d))
            })
    }

    pub fn n_dims(&self) -> usize {
        self.n_dims
    }

    pub fn grid_dims(&self) -> &[usize] {
        &self.grid_dims
    }

    pub fn sort_dim(&self) -> Option<usize> {
        self.sort_dim
    }

    pub fn mode(&self) -> GridMode {
        self.mode
    }

    /// Cell edges per grid dimension; cell `k` spans `[b[k-1], b[k])` with
    /// open ends at `±∞`.
    pub fn boundaries(&self) -> &[Vec<f64>] {
        &self.boundaries
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    /// Number of stored records.
    pub fn len(&self) -> usize {
        self.row_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.row_ids.is_empty()
    }

    /// Per-dimension `(min, max)` of the stored records.
    pub fn bbox(&self) -> &[(f64, f64)] {
        &self.bbox
    }

    pub fn row_ids(&self) -> &[usize] {
        &self.row_ids
    }

    pub fn record(&self, pos: usize) -> &[f64] {
        &self.records[pos * self.n_dims..(pos + 1) * self.n_dims]
    }

    /// Stored positions `[start, end)` of one cell.
    pub fn cell_span(&self, cell: usize) -> std::ops::Range<usize> {
        let c = self.cells[cell];
        c.start as usize..(c.start + c.len) as usize
    }

    pub fn cell_sizes(&self) -> Vec<u64> {
        self.cells.iter().map(|c| c.len).collect()
    }

    /// Value range of a cell along each grid dimension.
    pub fn cell_ranges(&self, cell: usize) -> Vec<(f64, f64)> {
        let mut coords = vec![0usize; self.grid_dims.len()];
        let mut rest = cell;
        for k in (0..self.grid_dims.len()).rev() {
            let n = self.boundaries[k].len() + 1;
            coords[k] = rest % n;
            rest /= n;
        }
        coords
            .iter()
            .enumerate()
            .map(|(k, &c)| {
                let b = &self.boundaries[k];
                let lo = if c == 0 { f64::NEG_INFINITY } else { b[c - 1] };
                let hi = if c == b.len() { f64::INFINITY } else { b[c] };
                (lo, hi)
            })
            .collect()
    }

    /// Directory accounting: cell descriptors plus boundary arrays. The row
    /// store itself is not counted.
    pub fn directory_bytes(&self) -> u64 {
        let boundaries: u64 = self.boundaries.iter().map(|b| b.len() as u64).sum();
        self.cells.len() as u64 * CELL_DESCRIPTOR_BYTES + boundaries * BOUNDARY_BYTES
    }

    /// Calls `f` with every cell a query must look up, in directory order.
    pub fn for_each_candidate_cell(&self, q: &QueryRect, mut f: impl FnMut(usize)) {
        if self.is_empty() || !q.intersects_box(&self.bbox) {
            return;
        }
        let ranges: Vec<(usize, usize)> = self
            .grid_dims
            .iter()
            .enumerate()
            .map(|(k, &d)| {
                let b = q.dim(d);
                (self.cell_coord(k, b.lo()), self.cell_coord(k, b.hi()))
            })
            .collect();
        let mut coords: Vec<usize> = ranges.iter().map(|r| r.0).collect();
        loop {
            let id = coords
                .iter()
                .enumerate()
                .fold(0usize, |id, (k, &c)| id * (self.boundaries[k].len() + 1) + c);
            f(id);
            // odometer, last grid dimension fastest
            let mut k = coords.len();
            loop {
                if k == 0 {
                    return;
                }
                k -= 1;
                if coords[k] < ranges[k].1 {
                    coords[k] += 1;
                    break;
                }
                coords[k] = ranges[k].0;
            }
        }
    }

    pub fn candidate_cells(&self, q: &QueryRect) -> Vec<usize> {
        let mut cells = Vec::new();
        self.for_each_candidate_cell(q, |c| cells.push(c));
        cells
    }

    /// Appends the ids of all stored rows inside `q` to `out`, in storage order.
    pub fn query_into(&self, q: &QueryRect, out: &mut Vec<usize>) -> QueryStats {
        debug_assert_eq!(q.n_dims(), self.n_dims);
        let mut stats = QueryStats::default();
        self.for_each_candidate_cell(q, |cell| {
            stats.cells_visited += 1;
            let span = self.cell_span(cell);
            if span.is_empty() {
                return;
            }
            let (from, to) = match self.sort_dim {
                Some(s) => {
                    let b = q.dim(s);
                    let key = |pos: usize| self.records[pos * self.n_dims + s];
                    let lo = span.start + partition(span.len(), |i| key(span.start + i) < b.lo());
                    let hi = span.start + partition(span.len(), |i| key(span.start + i) <= b.hi());
                    (lo, hi.max(lo))
                }
                None => (span.start, span.end),
            };
            stats.rows_scanned += (to - from) as u64;
            for pos in from..to {
                if q.contains(self.record(pos)) {
                    out.push(self.row_ids[pos]);
                    stats.rows_returned += 1;
                }
            }
        });
        stats
    }

    /// Sorted ids of all stored rows inside `q`, with the work done.
    pub fn range_query(&self, q: &QueryRect) -> (Vec<usize>, QueryStats) {
        let mut out = Vec::new();
        let stats = self.query_into(q, &mut out);
        out.sort_unstable();
        (out, stats)
    }

    pub fn point_query(&self, point: &[f64]) -> Vec<usize> {
        self.range_query(&QueryRect::point(point)).0
    }
}

/// First index in `0..len` where `pred` turns false (`pred` must be monotone).
#[inline]
fn partition(len: usize, pred: impl Fn(usize) -> bool) -> usize {
    let (mut lo, mut hi) = (0usize, len);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

fn quantile_boundaries(mut values: Vec<f64>, cells: usize) -> Vec<f64> {
    values.sort_by(f64::total_cmp);
    let mut b: Vec<f64> = (1..cells)
        .map(|i| quantile_sorted(&values, i as f64 / cells as f64))
        .collect();
    b.dedup();
    // a boundary at the minimum would only open an empty first cell
    if let Some(&min) = values.first() {
        b.retain(|&v| v > min);
    }
    b
}

fn uniform_boundaries(values: &[f64], cells: usize) -> Vec<f64> {
    let (lo, hi) = min_max(values);
    if !(hi > lo) {
        return Vec::new();
    }
    let w = (hi - lo) / cells as f64;
    let mut b: Vec<f64> = (1..cells).map(|i| lo + w * i as f64).collect();
    b.dedup();
    b
}

/// Ids of all rows of `data` inside `q`; the reference every index is checked
/// against.
pub fn full_scan(data: &Dataset, q: &QueryRect) -> Vec<usize> {
    (0..data.n_rows())
        .filter(|&r| {
            q.bounds()
                .iter()
                .enumerate()
                .all(|(d, b)| b.contains(data.value(r, d)))
        })
        .collect()
}
