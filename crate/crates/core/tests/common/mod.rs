#![allow(dead_code)]

use coax::synth::{generate, SynthConfig, Synthetic};
use coax::{CoaxConfig, CoaxIndex, DetectConfig, Interval, QueryRect};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The five planted datasets used for exactness checks.
pub fn exactness_configs(n_rows: usize) -> Vec<(&'static str, SynthConfig)> {
    vec![
        ("free4", SynthConfig::independent(n_rows, 4, 101)),
        (
            "one5",
            SynthConfig::independent(n_rows, 5, 102)
                .with_fd(0, 1, 2.0, 5.0)
                .with_outliers(0.05),
        ),
        (
            "two6",
            SynthConfig::independent(n_rows, 6, 103)
                .with_fd(0, 1, -1.5, 2000.0)
                .with_fd(2, 3, 0.8, -40.0)
                .with_outliers(0.10),
        ),
        (
            "three8",
            SynthConfig::independent(n_rows, 8, 104)
                .with_fd(0, 1, 2.0, 0.0)
                .with_fd(0, 2, -0.5, 700.0)
                .with_fd(5, 6, 3.0, 10.0)
                .with_outliers(0.15),
        ),
        (
            "noisy7",
            SynthConfig::independent(n_rows, 7, 105)
                .with_fd(1, 2, 1.0, 0.0)
                .with_fd(1, 3, -2.0, 3000.0)
                .with_fd(1, 4, 0.3, 0.0)
                .with_noise(0.05)
                .with_outliers(0.25),
        ),
    ]
}

/// Eight dimensions, two groups of three dependents each.
pub fn six_dependents(n_rows: usize) -> SynthConfig {
    SynthConfig::independent(n_rows, 8, 106)
        .with_fd(0, 1, 2.0, 5.0)
        .with_fd(0, 2, -0.7, 30.0)
        .with_fd(0, 3, 1.3, 0.0)
        .with_fd(4, 5, 0.5, 1.0)
        .with_fd(4, 6, 3.0, 0.0)
        .with_fd(4, 7, -1.0, 1000.0)
        .with_outliers(0.05)
}

pub fn config_for(s: &SynthConfig, cells: usize) -> CoaxConfig {
    let target_ratio = if s.fds.is_empty() { 0.9 } else { 1.0 - s.outlier_fraction };
    CoaxConfig {
        detect: DetectConfig {
            target_ratio,
            ..DetectConfig::default()
        },
        cells_per_dim: cells,
        ..CoaxConfig::default()
    }
}

pub fn build(cfg: &SynthConfig) -> (Synthetic, CoaxIndex) {
    let s = generate(cfg).unwrap();
    let ix = CoaxIndex::build(&s.data, &config_for(cfg, 16)).unwrap();
    (s, ix)
}

/// Queries whose dependent-dimension intervals straddle a margin edge of a
/// learned model, with the predictor loosely constrained around a random row.
pub fn band_edge_queries(s: &Synthetic, ix: &CoaxIndex, n: usize, seed: u64) -> Vec<QueryRect> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = &s.data;
    let models: Vec<_> = ix.groups().iter().flat_map(|g| g.models.iter().copied()).collect();
    (0..n)
        .map(|_| {
            let r = rng.random_range(0..d.n_rows());
            let mut q = QueryRect::full(d.n_dims());
            if models.is_empty() {
                for dim in 0..d.n_dims() {
                    let v = d.value(r, dim);
                    let w = rng.random_range(0.0..100.0);
                    q = q.with_dim(dim, Interval::new(v - w, v + w)).unwrap();
                }
                return q;
            }
            let m = models[rng.random_range(0..models.len())];
            let x = d.value(r, m.indexed_dim);
            let edge = if rng.random_bool(0.5) {
                m.predict(x) + m.eps_ub
            } else {
                m.predict(x) - m.eps_lb
            };
            let half = rng.random_range(0.0..=0.5) * (m.eps_lb + m.eps_ub).max(1.0);
            let xw = rng.random_range(0.0..50.0);
            q = q
                .with_dim(m.dependent_dim, Interval::new(edge - half, edge + half))
                .unwrap()
                .with_dim(m.indexed_dim, Interval::new(x - xw, x + xw))
                .unwrap();
            q
        })
        .collect()
}
