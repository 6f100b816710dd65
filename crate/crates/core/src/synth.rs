//! Synthetic tables with planted linear dependencies and planted outliers.
//!
//! Free dimensions are uniform on `[0, range)`. A dependent dimension is
//! `slope · predictor + intercept` plus uniform noise of half-width
//! `noise · |slope| · range`. Exactly `round(outlier_fraction · n_rows)` rows are
//! chosen as outliers, and every dependent dimension of those rows is pushed
//! away from its line by at least four noise half-widths (and at least a tenth
//! of the dependent range), in a random direction.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{default_names, Dataset};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantedFd {
    pub predictor: usize,
    pub dependent: usize,
    pub slope: f64,
    pub intercept: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_rows: usize,
    pub n_dims: usize,
    pub fds: Vec<PlantedFd>,
    /// Width of every free dimension.
    pub range: f64,
    /// Noise half-width as a fraction of the dependent range.
    pub noise: f64,
    pub outlier_fraction: f64,
    pub seed: u64,
}

impl SynthConfig {
    /// `n_dims` free uniform dimensions with nothing planted.
    pub fn independent(n_rows: usize, n_dims: usize, seed: u64) -> Self {
        Self {
            n_rows,
            n_dims,
            fds: Vec::new(),
            range: 1000.0,
            noise: 0.01,
            outlier_fraction: 0.0,
            seed,
        }
    }

    pub fn with_fd(mut self, predictor: usize, dependent: usize, slope: f64, intercept: f64) -> Self {
        self.fds.push(PlantedFd {
            predictor,
            dependent,
            slope,
            intercept,
        });
        self
    }

    pub fn with_noise(mut self, noise: f64) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_outliers(mut self, fraction: f64) -> Self {
        self.outlier_fraction = fraction;
        self
    }

    /// Planted groups as `(predictor, sorted dependents)`, sorted by predictor.
    pub fn planted_groups(&self) -> Vec<(usize, Vec<usize>)> {
        let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
        for fd in &self.fds {
            match groups.iter_mut().find(|g| g.0 == fd.predictor) {
                Some(g) => g.1.push(fd.dependent),
                None => groups.push((fd.predictor, vec![fd.dependent])),
            }
        }
        for g in &mut groups {
            g.1.sort_unstable();
        }
        groups.sort_unstable();
        groups
    }

    fn validate(&self) -> Result<()> {
        if self.n_rows == 0 || self.n_dims == 0 {
            return Err(Error::Empty("synthetic table"));
        }
        if !(self.range > 0.0 && self.range.is_finite()) {
            return Err(Error::invalid("range must be positive"));
        }
        if !(0.0..=0.05).contains(&self.noise) {
            return Err(Error::invalid("noise must lie in [0, 0.05]"));
        }
        if !(0.0..1.0).contains(&self.outlier_fraction) {
            return Err(Error::invalid("outlier fraction must lie in [0, 1)"));
        }
        let mut role = vec![0u8; self.n_dims]; // 1 predictor, 2 dependent
        for fd in &self.fds {
            for d in [fd.predictor, fd.dependent] {
                if d >= self.n_dims {
                    return Err(Error::DimOutOfRange {
                        dim: d,
                        n_dims: self.n_dims,
                    });
                }
            }
            if fd.slope == 0.0 || !fd.slope.is_finite() || !fd.intercept.is_finite() {
                return Err(Error::invalid("planted slope must be finite and nonzero"));
            }
            if role[fd.predictor] == 2 || role[fd.dependent] != 0 {
                return Err(Error::invalid(format!(
                    "dimension roles overlap in planted dependency {} -> {}",
                    fd.predictor, fd.dependent
                )));
            }
            role[fd.predictor] = 1;
            role[fd.dependent] = 2;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Synthetic {
    pub data: Dataset,
    /// Sorted ids of the planted outlier rows.
    pub outlier_rows: Vec<usize>,
    pub config: SynthConfig,
}

impl Synthetic {
    pub fn outlier_fraction(&self) -> f64 {
        self.outlier_rows.len() as f64 / self.data.n_rows() as f64
    }
}

pub fn generate(cfg: &SynthConfig) -> Result<Synthetic> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.n_rows;
    let mut columns = vec![Vec::new(); cfg.n_dims];
    let dependent: Vec<bool> = (0..cfg.n_dims)
        .map(|d| cfg.fds.iter().any(|fd| fd.dependent == d))
        .collect();
    for (d, col) in columns.iter_mut().enumerate() {
        if !dependent[d] {
            *col = (0..n).map(|_| rng.random_range(0.0..cfg.range)).collect();
        }
    }
    for fd in &cfg.fds {
        let half = cfg.noise * fd.slope.abs() * cfg.range;
        let col: Vec<f64> = columns[fd.predictor]
            .iter()
            .map(|&x| {
                let e = if half > 0.0 { rng.random_range(-half..=half) } else { 0.0 };
                fd.slope * x + fd.intercept + e
            })
            .collect();
        columns[fd.dependent] = col;
    }

    let n_out = (cfg.outlier_fraction * n as f64).round() as usize;
    let mut outlier_rows = if cfg.fds.is_empty() {
        Vec::new()
    } else {
        sample(&mut rng, n, n_out).into_vec()
    };
    outlier_rows.sort_unstable();
    for &r in &outlier_rows {
        for fd in &cfg.fds {
            let span = fd.slope.abs() * cfg.range;
            let floor = (4.0 * cfg.noise * span).max(0.1 * span);
            let shift = rng.random_range(floor..floor + 0.3 * span);
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            columns[fd.dependent][r] += sign * shift;
        }
    }

    Ok(Synthetic {
        data: Dataset::from_columns(default_names(cfg.n_dims), columns)?,
        outlier_rows,
        config: cfg.clone(),
    })
}

/// A uniform band `y = slope · x + U[−eps, eps]` with `x` uniform on
/// `[0, x_range)`: the regime in which scan effectiveness has a closed form.
pub fn uniform_band(n_rows: usize, x_range: f64, slope: f64, eps: f64, seed: u64) -> Result<Dataset> {
    if n_rows == 0 {
        return Err(Error::Empty("band"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<f64> = (0..n_rows).map(|_| rng.random_range(0.0..x_range)).collect();
    let ys: Vec<f64> = xs
        .iter()
        .map(|&x| slope * x + rng.random_range(-eps..=eps))
        .collect();
    Dataset::from_columns(vec!["x".into(), "y".into()], vec![xs, ys])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planted_structure() {
        let cfg = SynthConfig::independent(10_000, 5, 3)
            .with_fd(0, 1, 2.0, 5.0)
            .with_fd(0, 3, -0.5, 100.0)
            .with_noise(0.01)
            .with_outliers(0.1);
        let s = generate(&cfg).unwrap();
        assert_eq!(s.outlier_rows.len(), 1000);
        assert_eq!(cfg.planted_groups(), vec![(0, vec![1, 3])]);
        let is_out: Vec<bool> = {
            let mut v = vec![false; 10_000];
            for &r in &s.outlier_rows {
                v[r] = true;
            }
            v
        };
        for fd in &cfg.fds {
            let half = cfg.noise * fd.slope.abs() * cfg.range;
            for (r, &out) in is_out.iter().enumerate() {
                let disp = s.data.value(r, fd.dependent) - (fd.slope * s.data.value(r, 0) + fd.intercept);
                if out {
                    assert!(disp.abs() >= 4.0 * half - 1e-9);
                } else {
                    assert!(disp.abs() <= half + 1e-9);
                }
            }
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let cfg = SynthConfig::independent(500, 3, 1).with_fd(2, 0, 1.0, 0.0).with_outliers(0.2);
        assert_eq!(generate(&cfg).unwrap(), generate(&cfg).unwrap());
        let other = SynthConfig { seed: 2, ..cfg.clone() };
        assert_ne!(generate(&cfg).unwrap().data, generate(&other).unwrap().data);
    }

    #[test]
    fn rejects_inconsistent_plans() {
        let base = SynthConfig::independent(100, 3, 0);
        assert!(generate(&base.clone().with_fd(0, 0, 1.0, 0.0)).is_err());
        assert!(generate(&base.clone().with_fd(0, 1, 1.0, 0.0).with_fd(1, 2, 1.0, 0.0)).is_err());
        assert!(generate(&base.clone().with_fd(0, 1, 1.0, 0.0).with_fd(2, 1, 1.0, 0.0)).is_err());
        assert!(generate(&base.clone().with_fd(0, 5, 1.0, 0.0)).is_err());
        assert!(generate(&base.clone().with_fd(0, 1, 0.0, 0.0)).is_err());
        assert!(generate(&base.clone().with_noise(0.2)).is_err());
        assert!(generate(&base.with_outliers(1.0)).is_err());
    }

    #[test]
    fn band_stays_inside_its_margins() {
        let d = uniform_band(2000, 100.0, 1.5, 2.0, 4).unwrap();
        assert!((0..2000).all(|r| (d.value(r, 1) - 1.5 * d.value(r, 0)).abs() <= 2.0 + 1e-12));
    }
}
