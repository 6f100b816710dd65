//! Binary snapshots of a built [`CoaxIndex`].
//!
//! All integers and floats are little-endian. Counts and ids are `u64`,
//! dimension numbers `u32`, and an absent dimension is `u32::MAX`.
//!
//! ```text
//! header   magic "COAXIDX\0" (8 bytes), version u32 (= 1)
//! index    n_rows u64, n_dims u32, sort_dim u32,
//!          n_dims × name (len u32, utf-8 bytes),
//!          n_groups u32, per group: predictor u32, n_models u32,
//!            per model: dependent u32, slope f64, intercept f64,
//!                       eps_lb f64, eps_ub f64, fit_quality f64
//!          primary grid, outlier grid
//! grid     present u8 (0 or 1); if present:
//!          mode u8 (0 quantile, 1 uniform), sort_dim u32,
//!          n_grid_dims u32, grid dims u32…,
//!          per grid dim: n_boundaries u32, boundaries f64…,
//!          n_cells u64, per cell: start u64, len u64,
//!          n_records u64, row ids u64…, records f64… (n_records × n_dims,
//!          row-major), bbox (min f64, max f64) × n_dims
//! ```

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Cell, GridIndex, GridMode};
use crate::index::CoaxIndex;
use crate::softfd::{validate_groups, CorrelationGroup, SoftFdModel};

pub const MAGIC: [u8; 8] = *b"COAXIDX\0";
pub const VERSION: u32 = 1;
const NONE: u32 = u32::MAX;

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn dim(&mut self, d: Option<usize>) {
        self.u32(d.map_or(NONE, |d| d as u32));
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::Snapshot(format!("truncated at byte {}", self.pos)))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn len(&mut self, elem_bytes: usize) -> Result<usize> {
        let n = self.u64()?;
        self.check_len(n, elem_bytes)
    }
    fn len32(&mut self, elem_bytes: usize) -> Result<usize> {
        let n = self.u32()? as u64;
        self.check_len(n, elem_bytes)
    }
    /// Rejects counts the remaining bytes cannot hold before allocating.
    fn check_len(&self, n: u64, elem_bytes: usize) -> Result<usize> {
        let remaining = (self.buf.len() - self.pos) as u64;
        if n.saturating_mul(elem_bytes as u64) > remaining {
            return Err(Error::Snapshot(format!("count {n} exceeds remaining input")));
        }
        Ok(n as usize)
    }
    fn dim(&mut self, n_dims: usize) -> Result<Option<usize>> {
        match self.u32()? {
            NONE => Ok(None),
            d if (d as usize) < n_dims => Ok(Some(d as usize)),
            d => Err(Error::Snapshot(format!("dimension {d} out of range"))),
        }
    }
    fn some_dim(&mut self, n_dims: usize) -> Result<usize> {
        self.dim(n_dims)?
            .ok_or_else(|| Error::Snapshot("missing dimension".into()))
    }
}

fn write_grid(w: &mut Writer, g: Option<&GridIndex>) {
    let Some(g) = g else {
        w.u8(0);
        return;
    };
    w.u8(1);
    w.u8(match g.mode {
        GridMode::Quantile => 0,
        GridMode::Uniform => 1,
    });
    w.dim(g.sort_dim);
    w.u32(g.grid_dims.len() as u32);
    for &d in &g.grid_dims {
        w.u32(d as u32);
    }
    for b in &g.boundaries {
        w.u32(b.len() as u32);
        b.iter().for_each(|&v| w.f64(v));
    }
    w.u64(g.cells.len() as u64);
    for c in &g.cells {
        w.u64(c.start);
        w.u64(c.len);
    }
    w.u64(g.row_ids.len() as u64);
    g.row_ids.iter().for_each(|&r| w.u64(r as u64));
    g.records.iter().for_each(|&v| w.f64(v));
    for &(lo, hi) in &g.bbox {
        w.f64(lo);
        w.f64(hi);
    }
}

fn read_grid(r: &mut Reader, n_dims: usize, n_rows: usize) -> Result<Option<GridIndex>> {
    match r.u8()? {
        0 => return Ok(None),
        1 => {}
        t => return Err(Error::Snapshot(format!("bad grid tag {t}"))),
    }
    let mode = match r.u8()? {
        0 => GridMode::Quantile,
        1 => GridMode::Uniform,
        m => return Err(Error::Snapshot(format!("bad grid mode {m}"))),
    };
    let sort_dim = r.dim(n_dims)?;
    let n_grid = r.len32(4)?;
    let grid_dims = (0..n_grid)
        .map(|_| r.some_dim(n_dims))
        .collect::<Result<Vec<_>>>()?;
    let mut boundaries = Vec::with_capacity(n_grid);
    for _ in 0..n_grid {
        let n = r.len32(8)?;
        let b = (0..n).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
        if b.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Snapshot("grid boundaries must increase".into()));
        }
        boundaries.push(b);
    }
    let n_cells = r.len(16)?;
    let expected_cells = boundaries.iter().map(|b| b.len() + 1).product::<usize>();
    if n_cells != expected_cells {
        return Err(Error::Snapshot(format!(
            "{n_cells} cells, boundaries imply {expected_cells}"
        )));
    }
    let cells = (0..n_cells)
        .map(|_| Ok(Cell { start: r.u64()?, len: r.u64()? }))
        .collect::<Result<Vec<_>>>()?;
    let n_records = r.len(8)?;
    let mut next = 0u64;
    for c in &cells {
        if c.start != next {
            return Err(Error::Snapshot("cells are not contiguous".into()));
        }
        next = next
            .checked_add(c.len)
            .ok_or_else(|| Error::Snapshot("cell length overflow".into()))?;
    }
    if next != n_records as u64 {
        return Err(Error::Snapshot("cells do not cover the row store".into()));
    }
    let row_ids = (0..n_records)
        .map(|_| {
            let id = r.u64()?;
            if id as usize >= n_rows {
                return Err(Error::Snapshot(format!("row id {id} out of range")));
            }
            Ok(id as usize)
        })
        .collect::<Result<Vec<_>>>()?;
    let n_values = n_records
        .checked_mul(n_dims)
        .ok_or_else(|| Error::Snapshot("record store overflow".into()))?;
    r.check_len(n_values as u64, 8)?;
    let records = (0..n_values).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
    let bbox = (0..n_dims)
        .map(|_| Ok((r.f64()?, r.f64()?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Some(GridIndex {
        n_dims,
        grid_dims,
        sort_dim,
        mode,
        boundaries,
        cells,
        records,
        row_ids,
        bbox,
    }))
}

impl CoaxIndex {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer(Vec::new());
        w.0.extend_from_slice(&MAGIC);
        w.u32(VERSION);
        w.u64(self.n_rows as u64);
        w.u32(self.names.len() as u32);
        w.u32(self.sort_dim as u32);
        for name in &self.names {
            w.u32(name.len() as u32);
            w.0.extend_from_slice(name.as_bytes());
        }
        w.u32(self.groups.len() as u32);
        for g in &self.groups {
            w.u32(g.predictor as u32);
            w.u32(g.models.len() as u32);
            for m in &g.models {
                w.u32(m.dependent_dim as u32);
                for v in [m.slope, m.intercept, m.eps_lb, m.eps_ub, m.fit_quality] {
                    w.f64(v);
                }
            }
        }
        write_grid(&mut w, self.primary.as_ref());
        write_grid(&mut w, self.outliers.as_ref());
        w.0
    }

    pub fn from_bytes(buf: &[u8]) -> Result<Self> {
        let mut r = Reader { buf, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(Error::Snapshot("not an index snapshot".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::Snapshot(format!("unsupported version {version}")));
        }
        let n_rows = r.u64()? as usize;
        let n_dims = r.len32(4)?;
        if n_dims == 0 {
            return Err(Error::Snapshot("zero dimensions".into()));
        }
        let sort_dim = r.some_dim(n_dims)?;
        let names = (0..n_dims)
            .map(|_| {
                let n = r.len32(1)?;
                String::from_utf8(r.take(n)?.to_vec()).map_err(|e| Error::Snapshot(e.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        let n_groups = r.len32(8)?;
        let mut groups = Vec::with_capacity(n_groups);
        for _ in 0..n_groups {
            let predictor = r.some_dim(n_dims)?;
            let n_models = r.len32(44)?;
            let models = (0..n_models)
                .map(|_| {
                    Ok(SoftFdModel {
                        indexed_dim: predictor,
                        dependent_dim: r.some_dim(n_dims)?,
                        slope: r.f64()?,
                        intercept: r.f64()?,
                        eps_lb: r.f64()?,
                        eps_ub: r.f64()?,
                        fit_quality: r.f64()?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            groups.push(CorrelationGroup { predictor, models });
        }
        validate_groups(&groups, n_dims).map_err(|e| Error::Snapshot(e.to_string()))?;
        let primary = read_grid(&mut r, n_dims, n_rows)?;
        let outliers = read_grid(&mut r, n_dims, n_rows)?;
        if r.pos != buf.len() {
            return Err(Error::Snapshot("trailing bytes".into()));
        }
        let stored = primary.as_ref().map_or(0, GridIndex::len) + outliers.as_ref().map_or(0, GridIndex::len);
        if stored != n_rows {
            return Err(Error::Snapshot(format!("{stored} stored rows, header says {n_rows}")));
        }
        Ok(CoaxIndex {
            names,
            n_rows,
            groups,
            sort_dim,
            primary,
            outliers,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let buf = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&buf)
    }
}
