//! Columnar numeric tables: CSV ingestion, sampling and per-column diagnostics.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An immutable table of finite `f64` attributes stored column by column.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    n_rows: usize,
    dropped_rows: usize,
}

/// Summary of a single column. Quantiles sit at levels `i / (q + 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub quantiles: Vec<f64>,
}

impl Dataset {
    /// Builds a dataset from whole columns. Every column must have the same
    /// length and contain only finite values.
    pub fn from_columns(names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::NoColumns);
        }
        if names.len() != columns.len() {
            return Err(Error::DimMismatch {
                expected: columns.len(),
                got: names.len(),
            });
        }
        let n_rows = columns[0].len();
        for col in &columns {
            if col.len() != n_rows {
                return Err(Error::DimMismatch {
                    expected: n_rows,
                    got: col.len(),
                });
            }
            if col.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid("dataset values must be finite"));
            }
        }
        Ok(Self {
            names,
            columns,
            n_rows,
            dropped_rows: 0,
        })
    }

    /// Builds a dataset from row-major records, naming columns `c0, c1, ...`.
    pub fn from_rows(n_dims: usize, rows: &[Vec<f64>]) -> Result<Self> {
        let mut columns = vec![Vec::with_capacity(rows.len()); n_dims];
        for row in rows {
            if row.len() != n_dims {
                return Err(Error::DimMismatch {
                    expected: n_dims,
                    got: row.len(),
                });
            }
            for (col, &v) in columns.iter_mut().zip(row) {
                col.push(v);
            }
        }
        Self::from_columns(default_names(n_dims), columns)
    }

    /// Loads the selected columns of a headered CSV file. Each selector is a
    /// header name or a zero-based column index. Rows with a missing,
    /// unparseable or non-finite value in any selected column are skipped and
    /// counted in [`Dataset::dropped_rows`].
    pub fn load_csv<S: AsRef<str>>(path: impl AsRef<Path>, dims: &[S]) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::NoColumns);
        }
        let path = path.as_ref();
        let mut reader = open_csv(path)?;
        let headers = reader.headers()?.clone();
        let selected = dims
            .iter()
            .map(|d| resolve_column(&headers, d.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        read_selected(reader, &headers, &selected)
    }

    /// Loads every column of a headered CSV file.
    pub fn load_csv_all(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut reader = open_csv(path)?;
        let headers = reader.headers()?.clone();
        let selected: Vec<usize> = (0..headers.len()).collect();
        if selected.is_empty() {
            return Err(Error::NoColumns);
        }
        read_selected(reader, &headers, &selected)
    }

    /// Writes a headered CSV. Values use Rust's shortest round-trip formatting,
    /// so [`Dataset::load_csv_all`] reads back exactly the same numbers.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
        w.write_record(&self.names)?;
        let mut record = Vec::with_capacity(self.n_dims());
        for r in 0..self.n_rows {
            record.clear();
            record.extend(self.columns.iter().map(|c| c[r].to_string()));
            w.write_record(&record)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_dims(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, dim: usize) -> &[f64] {
        &self.columns[dim]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    #[inline]
    pub fn value(&self, row: usize, dim: usize) -> f64 {
        self.columns[dim][row]
    }

    /// Number of CSV rows skipped during ingestion.
    pub fn dropped_rows(&self) -> usize {
        self.dropped_rows
    }

    pub fn row(&self, row: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[row]).collect()
    }

    /// Copies the given rows (in the given order) into a new dataset.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let columns = self
            .columns
            .iter()
            .map(|c| rows.iter().map(|&r| c[r]).collect())
            .collect();
        Self {
            names: self.names.clone(),
            columns,
            n_rows: rows.len(),
            dropped_rows: 0,
        }
    }

    /// Keeps only the given dimensions, in the given order.
    pub fn project(&self, dims: &[usize]) -> Result<Self> {
        for &d in dims {
            self.check_dim(d)?;
        }
        Self::from_columns(
            dims.iter().map(|&d| self.names[d].clone()).collect(),
            dims.iter().map(|&d| self.columns[d].clone()).collect(),
        )
    }

    /// Per-dimension `(min, max)`; `None` when the dataset has no rows.
    pub fn bounds(&self) -> Option<Vec<(f64, f64)>> {
        if self.n_rows == 0 {
            return None;
        }
        Some(self.columns.iter().map(|c| min_max(c)).collect())
    }

    /// Draws `min(n, n_rows)` distinct rows uniformly at random. Rows keep
    /// their original relative order.
    pub fn sample(&self, n: usize, seed: u64) -> Self {
        self.select_rows(&sample_indices(self.n_rows, n, seed))
    }

    pub fn column_stats(&self, dim: usize, q: usize) -> Result<ColumnStats> {
        self.check_dim(dim)?;
        if q == 0 {
            return Err(Error::invalid("quantile count must be at least 1"));
        }
        let col = &self.columns[dim];
        if col.is_empty() {
            return Err(Error::Empty("column"));
        }
        let mut sorted = col.clone();
        sorted.sort_by(f64::total_cmp);
        let quantiles = (1..=q)
            .map(|i| quantile_sorted(&sorted, i as f64 / (q + 1) as f64))
            .collect();
        Ok(ColumnStats {
            min: sorted[0],
            max: sorted[sorted.len() - 1],
            mean: col.iter().sum::<f64>() / col.len() as f64,
            quantiles,
        })
    }

    /// KL divergence (natural log) between the empirical distribution of the
    /// distinct values in `dim` and the uniform distribution over those values.
    /// Zero exactly when every distinct value occurs equally often.
    pub fn kl_uniform_divergence(&self, dim: usize) -> Result<f64> {
        self.check_dim(dim)?;
        let col = &self.columns[dim];
        if col.is_empty() {
            return Err(Error::Empty("column"));
        }
        let mut sorted = col.clone();
        sorted.sort_by(f64::total_cmp);
        let mut counts = Vec::new();
        let mut run = 1usize;
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                run += 1;
            } else {
                counts.push(run);
                run = 1;
            }
        }
        counts.push(run);

        let n = col.len() as f64;
        let n_unique = counts.len() as f64;
        let kl = counts
            .iter()
            .map(|&c| {
                let p = c as f64 / n;
                p * (p * n_unique).ln()
            })
            .sum::<f64>();
        // Rounding can leave a tiny negative residue on equifrequent columns.
        Ok(kl.max(0.0))
    }

    pub(crate) fn check_dim(&self, dim: usize) -> Result<()> {
        if dim >= self.n_dims() {
            return Err(Error::DimOutOfRange {
                dim,
                n_dims: self.n_dims(),
            });
        }
        Ok(())
    }
}

pub(crate) fn default_names(n_dims: usize) -> Vec<String> {
    (0..n_dims).map(|i| format!("c{i}")).collect()
}

/// Sorted row indices of a seeded uniform sample without replacement.
pub fn sample_indices(n_rows: usize, n: usize, seed: u64) -> Vec<usize> {
    let amount = n.min(n_rows);
    if amount == n_rows {
        return (0..n_rows).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = rand::seq::index::sample(&mut rng, n_rows, amount).into_vec();
    idx.sort_unstable();
    idx
}

/// Linear interpolation between order statistics: position `p * (len - 1)`.
pub(crate) fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    let frac = h - lo as f64;
    if lo == hi || sorted[lo] == sorted[hi] {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

pub(crate) fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}

fn open_csv(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn resolve_column(headers: &csv::StringRecord, sel: &str) -> Result<usize> {
    if let Some(i) = headers.iter().position(|h| h == sel) {
        return Ok(i);
    }
    match sel.parse::<usize>() {
        Ok(i) if i < headers.len() => Ok(i),
        _ => Err(Error::UnknownColumn(sel.to_string())),
    }
}

fn read_selected(
    mut reader: csv::Reader<std::fs::File>,
    headers: &csv::StringRecord,
    selected: &[usize],
) -> Result<Dataset> {
    let mut columns = vec![Vec::new(); selected.len()];
    let mut dropped = 0usize;
    let mut values = Vec::with_capacity(selected.len());
    for record in reader.records() {
        let record = match record {
            Ok(r) => r,
            Err(e) if e.is_io_error() => return Err(e.into()),
            Err(_) => {
                dropped += 1;
                continue;
            }
        };
        values.clear();
        let ok = selected.iter().all(|&i| {
            match record.get(i).and_then(|f| f.parse::<f64>().ok()) {
                Some(v) if v.is_finite() => {
                    values.push(v);
                    true
                }
                _ => false,
            }
        });
        if !ok {
            dropped += 1;
            continue;
        }
        for (col, &v) in columns.iter_mut().zip(&values) {
            col.push(v);
        }
    }
    let n_rows = columns[0].len();
    if n_rows == 0 {
        return Err(Error::NoRows { dropped });
    }
    Ok(Dataset {
        names: selected.iter().map(|&i| headers[i].to_string()).collect(),
        columns,
        n_rows,
        dropped_rows: dropped,
    })
}
