use crate::error::{Error, Result};

/// A `chunks × chunks` histogram over two pre-shifted (min = 0) columns.
#[derive(Debug, Clone, PartialEq)]
pub struct BucketGrid {
    pub chunks: usize,
    pub w_x: f64,
    pub w_d: f64,
    counts: Vec<u64>,
}

impl BucketGrid {
    /// Builds a grid directly from a row-major count matrix.
    pub fn from_counts(chunks: usize, w_x: f64, w_d: f64, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != chunks * chunks {
            return Err(Error::DimMismatch {
                expected: chunks * chunks,
                got: counts.len(),
            });
        }
        if !(w_x > 0.0 && w_d > 0.0) {
            return Err(Error::invalid("bucket widths must be positive"));
        }
        Ok(Self {
            chunks,
            w_x,
            w_d,
            counts,
        })
    }

    /// Count of cell `(i, j)`: `i` along x, `j` along d.
    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.chunks + j]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Weighted cell centres used as regression input. Each centre stands for
/// `weight` identical training points.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingSet {
    pub xs: Vec<f64>,
    pub ds: Vec<f64>,
    pub weights: Vec<u64>,
}

impl TrainingSet {
    pub fn push(&mut self, x: f64, d: f64, weight: u64) {
        self.xs.push(x);
        self.ds.push(d);
        self.weights.push(weight);
    }

    /// Number of training points, counting repeats.
    pub fn len(&self) -> u64 {
        self.weights.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Expands the weights into repeated `(x, d)` points.
    pub fn expanded(&self) -> Vec<(f64, f64)> {
        self.xs
            .iter()
            .zip(&self.ds)
            .zip(&self.weights)
            .flat_map(|((&x, &d), &w)| std::iter::repeat_n((x, d), w as usize))
            .collect()
    }

    /// Weighted sum of squared residuals of the line `d = m·x + b`.
    pub fn sse(&self, m: f64, b: f64) -> f64 {
        self.xs
            .iter()
            .zip(&self.ds)
            .zip(&self.weights)
            .map(|((&x, &d), &w)| w as f64 * (d - (m * x + b)).powi(2))
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
}

/// Asymmetric margins: records with displacement in `[-lb, ub]` conform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Margins {
    pub lb: f64,
    pub ub: f64,
}

/// Counts points into a square grid whose cell widths are `max / chunks` per
/// axis. The maximum value is clamped into the last cell; negative values fall
/// outside the grid and are not counted.
pub fn bucketize(xs: &[f64], ds: &[f64], chunks: usize) -> Result<BucketGrid> {
    if xs.len() != ds.len() {
        return Err(Error::DimMismatch {
            expected: xs.len(),
            got: ds.len(),
        });
    }
    if xs.is_empty() {
        return Err(Error::Empty("bucketize input"));
    }
    if chunks < 2 {
        return Err(Error::invalid("bucket chunks must be at least 2"));
    }
    let max_x = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let max_d = ds.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w_x = max_x / chunks as f64;
    let w_d = max_d / chunks as f64;
    if !(w_x > 0.0) {
        return Err(Error::ZeroWidth("x"));
    }
    if !(w_d > 0.0) {
        return Err(Error::ZeroWidth("dependent"));
    }

    let mut counts = vec![0u64; chunks * chunks];
    let cell = |v: f64, w: f64| -> Option<usize> {
        if v < 0.0 {
            return None;
        }
        Some(((v / w) as usize).min(chunks - 1))
    };
    for (&x, &d) in xs.iter().zip(ds) {
        if let (Some(i), Some(j)) = (cell(x, w_x), cell(d, w_d)) {
            counts[i * chunks + j] += 1;
        }
    }
    Ok(BucketGrid {
        chunks,
        w_x,
        w_d,
        counts,
    })
}

/// Centres of the cells whose count is strictly above `threshold`, weighted by
/// their count.
pub fn dense_centers(grid: &BucketGrid, threshold: u64) -> Result<TrainingSet> {
    let mut t = TrainingSet::default();
    for i in 0..grid.chunks {
        for j in 0..grid.chunks {
            let c = grid.count(i, j);
            if c > threshold {
                t.push(
                    i as f64 * grid.w_x + 0.5 * grid.w_x,
                    j as f64 * grid.w_d + 0.5 * grid.w_d,
                    c,
                );
            }
        }
    }
    if t.is_empty() {
        return Err(Error::EmptyTrainingSet { threshold });
    }
    Ok(t)
}

/// Weighted ordinary least squares of `d` on `x`.
pub fn fit_linear(t: &TrainingSet) -> Result<LinearFit> {
    let w_total = t.len() as f64;
    if w_total == 0.0 {
        return Err(Error::Empty("training set"));
    }
    let weighted_mean = |vals: &[f64]| -> f64 {
        vals.iter()
            .zip(&t.weights)
            .map(|(&v, &w)| v * w as f64)
            .sum::<f64>()
            / w_total
    };
    let mx = weighted_mean(&t.xs);
    let md = weighted_mean(&t.ds);
    let (mut sxx, mut sxd) = (0.0, 0.0);
    for ((&x, &d), &w) in t.xs.iter().zip(&t.ds).zip(&t.weights) {
        let w = w as f64;
        sxx += w * (x - mx) * (x - mx);
        sxd += w * (x - mx) * (d - md);
    }
    if !(sxx > 0.0) {
        return Err(Error::DegenerateFit);
    }
    let slope = sxd / sxx;
    Ok(LinearFit {
        slope,
        intercept: md - slope * mx,
    })
}

/// Margins from the displacement quantiles at levels `(1 - r) / 2` and
/// `1 - (1 - r) / 2`, floored at zero.
///
/// Order statistics are rounded outward, so at least `ceil(r · n)` of the
/// given displacements fall inside the closed band `[-lb, ub]`.
pub fn select_margins(displacements: &[f64], target_ratio: f64) -> Result<Margins> {
    let (lo, hi) = central_interval(displacements, target_ratio)?;
    Ok(Margins {
        lb: (-lo).max(0.0),
        ub: hi.max(0.0),
    })
}

/// The central interval holding at least a fraction `r` of `values`, bounded
/// by the outward-rounded order statistics at levels `(1 - r) / 2` and
/// `1 - (1 - r) / 2`.
pub fn central_interval(values: &[f64], r: f64) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::Empty("displacements"));
    }
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::invalid(format!("target ratio {r} outside (0, 1]")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let last = (sorted.len() - 1) as f64;
    let tail = (1.0 - r) / 2.0;
    let lo_idx = (tail * last).floor() as usize;
    let hi_idx = (((1.0 - tail) * last).ceil() as usize).min(sorted.len() - 1);
    Ok((sorted[lo_idx], sorted[hi_idx]))
}
