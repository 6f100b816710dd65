//! Capacity analysis of linear segments over a sorted key stream.
//!
//! Keys are modelled as a sequence of i.i.d. positive gaps with mean `mu` and
//! standard deviation `sigma`. A segment of slope `a` covers keys while the
//! walk `Z_i = Σ (g_j − a)` stays inside `[−eps, eps]`. This module has the
//! closed forms for the expected and variance of that coverage and the number
//! of segments a stream needs, Monte-Carlo simulators to check them, and the
//! square-grid comparison formulas.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapDist {
    /// Uniform on `[mu − √3·sigma, mu + √3·sigma]`.
    Uniform,
    /// Normal truncated to positive values, with location and scale chosen so
    /// the truncated distribution has the requested mean and deviation.
    GaussianTruncated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapConfig {
    pub mu: f64,
    pub sigma: f64,
    pub dist: GapDist,
    /// Walk length cap for exit simulations; stream length for segment counts.
    pub n: usize,
    pub seed: u64,
}

/// Samples gaps for a [`GapConfig`].
#[derive(Debug, Clone, Copy)]
pub enum GapSampler {
    Uniform { lo: f64, hi: f64 },
    Truncated { normal: Normal<f64> },
}

impl GapSampler {
    pub fn new(mu: f64, sigma: f64, dist: GapDist) -> Result<Self> {
        if !(mu > 0.0 && sigma > 0.0 && mu.is_finite() && sigma.is_finite()) {
            return Err(Error::invalid("gap mean and deviation must be positive"));
        }
        match dist {
            GapDist::Uniform => {
                let half = 3f64.sqrt() * sigma;
                if mu - half < 0.0 {
                    return Err(Error::invalid(format!(
                        "uniform gaps need mu >= √3·sigma (mu={mu}, sigma={sigma})"
                    )));
                }
                Ok(GapSampler::Uniform {
                    lo: mu - half,
                    hi: mu + half,
                })
            }
            GapDist::GaussianTruncated => {
                let (loc, scale) = truncated_normal_params(mu, sigma)?;
                Ok(GapSampler::Truncated {
                    normal: Normal::new(loc, scale).map_err(|e| Error::invalid(e.to_string()))?,
                })
            }
        }
    }

    pub fn from_config(cfg: &GapConfig) -> Result<Self> {
        Self::new(cfg.mu, cfg.sigma, cfg.dist)
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            GapSampler::Uniform { lo, hi } => rng.random_range(lo..=hi),
            GapSampler::Truncated { normal } => loop {
                let g = normal.sample(rng);
                if g > 0.0 {
                    break g;
                }
            },
        }
    }
}

fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `P(Z > z)` for a standard normal.
fn std_normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z / std::f64::consts::SQRT_2)
}

/// Mean and variance of `N(t, 1)` truncated to `(0, ∞)`.
fn unit_truncated_moments(t: f64) -> (f64, f64) {
    let alpha = -t;
    let lambda = std_normal_pdf(alpha) / std_normal_sf(alpha);
    (t + lambda, 1.0 + alpha * lambda - lambda * lambda)
}

/// Location and scale of a normal whose positive truncation has mean `mu` and
/// deviation `sigma`. Only coefficients of variation comfortably below one
/// are supported (the truncated normal tends to an exponential, CV = 1).
pub fn truncated_normal_params(mu: f64, sigma: f64) -> Result<(f64, f64)> {
    const T_MIN: f64 = -3.0;
    const T_MAX: f64 = 40.0;
    let ratio = |t: f64| {
        let (m, v) = unit_truncated_moments(t);
        m / v.sqrt()
    };
    let target = mu / sigma;
    if target <= ratio(T_MIN) {
        return Err(Error::invalid(format!(
            "truncated normal gaps need mu/sigma > {:.3} (got {target})",
            ratio(T_MIN)
        )));
    }
    if target >= T_MAX {
        // truncation is immaterial
        return Ok((mu, sigma));
    }
    let (mut lo, mut hi) = (T_MIN, T_MAX);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ratio(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    let (_, v) = unit_truncated_moments(t);
    let scale = sigma / v.sqrt();
    Ok((t * scale, scale))
}

/// Expected keys covered by one segment with the optimal slope: `ε²/σ²`.
pub fn expected_keys(eps: f64, sigma: f64) -> f64 {
    (eps / sigma).powi(2)
}

/// Expected keys when the slope is off by `d`: `(ε/d)·tanh(εd/σ²)`, with the
/// `d → 0` limit `ε²/σ²`.
pub fn expected_keys_drift(eps: f64, sigma: f64, d: f64) -> f64 {
    let x = eps * d / (sigma * sigma);
    if x.abs() < 1e-8 {
        // tanh(x)/x = 1 − x²/3 + ...
        expected_keys(eps, sigma) * (1.0 - x * x / 3.0)
    } else {
        eps / d * x.tanh()
    }
}

/// Variance of the keys covered by one segment: `2ε⁴/(3σ⁴)`.
pub fn variance_keys(eps: f64, sigma: f64) -> f64 {
    2.0 * (eps / sigma).powi(4) / 3.0
}

/// Segments needed for a stream of `n` keys: `n·σ²/ε²`.
pub fn expected_segments(n: usize, eps: f64, sigma: f64) -> f64 {
    n as f64 / expected_keys(eps, sigma)
}

/// Equivalent square-grid cell count `(Y/(tε))·(X/((2ε + q_y)/a))`.
pub fn equivalent_grid_cells(x_range: f64, y_range: f64, a: f64, eps: f64, q_y: f64, t: f64) -> f64 {
    (y_range / (t * eps)) * (x_range / ((2.0 * eps + q_y) / a))
}

/// Length-to-width ratio of the margin band: `√(X² + Y²)/(2ε/√(1 + a²))`.
pub fn band_ratio(x_range: f64, y_range: f64, a: f64, eps: f64) -> f64 {
    x_range.hypot(y_range) / (2.0 * eps / (1.0 + a * a).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExitStats {
    pub mean_exit: f64,
    pub var_exit: f64,
    /// Uncensored trials the statistics are computed over.
    pub trials: usize,
    pub censored: usize,
}

/// Steps until `|Σ (g_j − slope)| > eps`, or `None` if the walk stays inside
/// for all `n` steps.
fn first_exit<R: Rng>(gaps: &GapSampler, slope: f64, eps: f64, n: usize, rng: &mut R) -> Option<usize> {
    let mut z = 0.0;
    for i in 1..=n {
        z += gaps.sample(rng) - slope;
        if z.abs() > eps {
            return Some(i);
        }
    }
    None
}

/// Runs `trials` independent walks of slope `slope`; trial `i` draws from a
/// generator seeded with `cfg.seed + i`, so results do not depend on thread
/// scheduling.
pub fn simulate_exit(cfg: &GapConfig, eps: f64, slope: f64, trials: usize) -> Result<ExitStats> {
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    if !(eps > 0.0) {
        return Err(Error::invalid("eps must be positive"));
    }
    let gaps = GapSampler::from_config(cfg)?;
    let exits: Vec<Option<usize>> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(i));
            first_exit(&gaps, slope, eps, cfg.n, &mut rng)
        })
        .collect();
    let done: Vec<f64> = exits.iter().flatten().map(|&t| t as f64).collect();
    let censored = trials - done.len();
    if done.is_empty() {
        return Err(Error::AllCensored { trials, n: cfg.n });
    }
    let k = done.len() as f64;
    let mean = done.iter().sum::<f64>() / k;
    let var = if done.len() > 1 {
        done.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (k - 1.0)
    } else {
        0.0
    };
    Ok(ExitStats {
        mean_exit: mean,
        var_exit: var,
        trials: done.len(),
        censored,
    })
}

/// Greedy segmentation of one stream of `cfg.n` gaps with slope `mu`: a new
/// segment starts at every key where the current one's walk exits. Returns the
/// number of segments.
pub fn simulate_segments(cfg: &GapConfig, eps: f64) -> Result<usize> {
    if !(eps > 0.0) {
        return Err(Error::invalid("eps must be positive"));
    }
    let gaps = GapSampler::from_config(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut segments = 1;
    let mut z = 0.0;
    for _ in 0..cfg.n {
        z += gaps.sample(&mut rng) - cfg.mu;
        if z.abs() > eps {
            segments += 1;
            z = 0.0;
        }
    }
    Ok(segments)
}

/// Per-interval centroids of a point cloud.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenterSequence {
    /// `(interval midpoint, mean y)` for every nonempty interval, in x order.
    pub centers: Vec<(f64, f64)>,
    /// One flag per interval; `true` where the interval held no points and was
    /// left out of `centers`.
    pub empty: Vec<bool>,
}

impl CenterSequence {
    pub fn has_gaps(&self) -> bool {
        self.empty.iter().any(|&e| e)
    }
}

/// Centre sequence over `n_intervals` equal-width x intervals spanning the
/// points' x range.
pub fn csm_centers(points: &[(f64, f64)], n_intervals: usize) -> Result<CenterSequence> {
    if points.is_empty() {
        return Err(Error::Empty("points"));
    }
    let (lo, hi) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.0), hi.max(p.0)));
    let hi = if hi > lo { hi } else { lo + 1.0 };
    csm_centers_in(points, lo, hi, n_intervals)
}

/// Centre sequence over `n_intervals` equal-width intervals of `[lo, hi]`;
/// a point at `hi` belongs to the last interval.
pub fn csm_centers_in(points: &[(f64, f64)], lo: f64, hi: f64, n_intervals: usize) -> Result<CenterSequence> {
    if n_intervals == 0 {
        return Err(Error::invalid("need at least one interval"));
    }
    if !(hi > lo) {
        return Err(Error::ZeroWidth("x"));
    }
    let w = (hi - lo) / n_intervals as f64;
    let mut sums = vec![(0.0, 0usize); n_intervals];
    for &(x, y) in points {
        if !(lo <= x && x <= hi) {
            return Err(Error::invalid(format!("point x={x} outside [{lo}, {hi}]")));
        }
        let i = (((x - lo) / w) as usize).min(n_intervals - 1);
        sums[i].0 += y;
        sums[i].1 += 1;
    }
    let mut centers = Vec::new();
    let mut empty = Vec::with_capacity(n_intervals);
    for (i, &(s, c)) in sums.iter().enumerate() {
        empty.push(c == 0);
        if c > 0 {
            centers.push((lo + (i as f64 + 0.5) * w, s / c as f64));
        }
    }
    Ok(CenterSequence { centers, empty })
}

/// Settings for [`theory_report`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryConfig {
    pub eps_over_sigma: Vec<f64>,
    /// Drifts, in units of sigma, for the slope-sensitivity experiment.
    pub drifts: Vec<f64>,
    pub trials: usize,
    /// Stream length for segment counts and walk cap for exit times.
    pub n: usize,
    pub mu: f64,
    pub sigma: f64,
    pub seed: u64,
}

impl Default for TheoryConfig {
    fn default() -> Self {
        Self {
            eps_over_sigma: vec![5.0, 10.0, 20.0],
            drifts: vec![0.0, 0.25, -0.25, 0.5, -0.5, 1.0, -1.0],
            trials: 10_000,
            n: 1_000_000,
            mu: 1.0,
            sigma: 0.5,
            seed: 0,
        }
    }
}

/// One closed form against its simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryCheck {
    pub quantity: String,
    pub dist: GapDist,
    pub eps_over_sigma: f64,
    pub drift_over_sigma: f64,
    pub closed_form: f64,
    pub simulated: f64,
    pub relative_error: f64,
    pub trials: usize,
    pub censored: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftSweep {
    pub eps_over_sigma: f64,
    /// Drift (in sigma) with the largest simulated mean exit.
    pub argmax_drift_over_sigma: f64,
    pub checks: Vec<TheoryCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryReport {
    pub config: TheoryConfig,
    /// Mean keys per segment at the optimal slope, both gap distributions.
    pub expected_keys: Vec<TheoryCheck>,
    /// Mean keys per segment with a mis-set slope.
    pub drift: Vec<DriftSweep>,
    pub variance_keys: Vec<TheoryCheck>,
    pub segments: Vec<TheoryCheck>,
}

impl TheoryReport {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

fn rel_err(simulated: f64, closed: f64) -> f64 {
    (simulated - closed).abs() / closed.abs()
}

/// Runs every simulation for the configured `eps/sigma` ratios.
pub fn theory_report(cfg: &TheoryConfig) -> Result<TheoryReport> {
    let sigma = cfg.sigma;
    let gap = |dist| GapConfig {
        mu: cfg.mu,
        sigma,
        dist,
        n: cfg.n,
        seed: cfg.seed,
    };
    let check = |quantity: &str, dist, r: f64, drift: f64, closed: f64, simulated: f64, stats: Option<&ExitStats>| TheoryCheck {
        quantity: quantity.to_string(),
        dist,
        eps_over_sigma: r,
        drift_over_sigma: drift,
        closed_form: closed,
        simulated,
        relative_error: rel_err(simulated, closed),
        trials: stats.map_or(1, |s| s.trials),
        censored: stats.map_or(0, |s| s.censored),
        seed: cfg.seed,
    };

    let mut expected = Vec::new();
    let mut variance = Vec::new();
    let mut drift = Vec::new();
    let mut segments = Vec::new();
    for &r in &cfg.eps_over_sigma {
        let eps = r * sigma;
        for dist in [GapDist::Uniform, GapDist::GaussianTruncated] {
            let s = simulate_exit(&gap(dist), eps, cfg.mu, cfg.trials)?;
            expected.push(check("expected_keys", dist, r, 0.0, expected_keys(eps, sigma), s.mean_exit, Some(&s)));
            if dist == GapDist::GaussianTruncated {
                variance.push(check("variance_keys", dist, r, 0.0, variance_keys(eps, sigma), s.var_exit, Some(&s)));
            }
        }

        let mut checks = Vec::new();
        for &dr in &cfg.drifts {
            let d = dr * sigma;
            let s = simulate_exit(&gap(GapDist::GaussianTruncated), eps, cfg.mu + d, cfg.trials)?;
            checks.push(check(
                "expected_keys_drift",
                GapDist::GaussianTruncated,
                r,
                dr,
                expected_keys_drift(eps, sigma, d),
                s.mean_exit,
                Some(&s),
            ));
        }
        let argmax = checks
            .iter()
            .max_by(|a, b| a.simulated.total_cmp(&b.simulated))
            .map_or(0.0, |c| c.drift_over_sigma);
        drift.push(DriftSweep {
            eps_over_sigma: r,
            argmax_drift_over_sigma: argmax,
            checks,
        });

        let count = simulate_segments(&gap(GapDist::GaussianTruncated), eps)?;
        segments.push(check(
            "segments",
            GapDist::GaussianTruncated,
            r,
            0.0,
            expected_segments(cfg.n, eps, sigma),
            count as f64,
            None,
        ));
    }
    Ok(TheoryReport {
        config: cfg.clone(),
        expected_keys: expected,
        drift,
        variance_keys: variance,
        segments,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn closed_forms() {
        assert_eq!(expected_keys(10.0, 1.0), 100.0);
        assert_eq!(expected_keys(3.0, 3.0), 1.0);
        assert_eq!(expected_keys(20.0, 2.0), 100.0);
        assert!(close(variance_keys(1.0, 1.0), 2.0 / 3.0, 1e-15));
        assert!(close(variance_keys(10.0, 1.0), 20_000.0 / 3.0, 1e-15));
        assert!(close(variance_keys(20.0, 2.0), variance_keys(10.0, 1.0), 1e-15));
        assert!(close(expected_segments(1_000_000, 10.0, 1.0), 10_000.0, 1e-15));
        assert!(close(expected_segments(100, 1.0, 1.0), 100.0, 1e-15));
        assert!(close(expected_segments(100, 2.0, 1.0), 25.0, 1e-15));
    }

    #[test]
    fn drift_closed_form() {
        let direct = 20.0 * 5f64.tanh();
        assert!(close(expected_keys_drift(10.0, 1.0, 0.5), direct, 1e-15));
        assert!((expected_keys_drift(10.0, 1.0, 0.5) - 19.999).abs() < 1e-3);
        assert_eq!(expected_keys_drift(10.0, 1.0, 0.0), 100.0);
        assert!(close(expected_keys_drift(10.0, 1.0, 1e-12), 100.0, 1e-9));
        for d in [0.1, 0.7, 3.0] {
            assert_eq!(expected_keys_drift(4.0, 1.5, d), expected_keys_drift(4.0, 1.5, -d));
            assert!(expected_keys_drift(4.0, 1.5, d) < expected_keys(4.0, 1.5));
        }
    }

    #[test]
    fn grid_comparison_formulas() {
        assert!(close(equivalent_grid_cells(100.0, 100.0, 1.0, 1.0, 2.0, 1.0), 2500.0, 1e-15));
        assert!(close(equivalent_grid_cells(100.0, 100.0, 1.0, 1.0, 2.0, 2.0), 1250.0, 1e-15));
        assert!(equivalent_grid_cells(100.0, 100.0, 1.0, 1.5, 2.0, 1.0) < 2500.0);
        assert!(close(band_ratio(3.0, 4.0, 0.0, 0.5), 5.0, 1e-15));
        assert!(band_ratio(3.0, 4.0, 0.0, 1e300) < 1e-290);
        assert!(band_ratio(4.0, 4.0, 1.0, 0.5) > band_ratio(3.0, 4.0, 1.0, 0.5));
    }

    #[test]
    fn gap_samplers_match_requested_moments() {
        for (mu, sigma) in [(1.0, 0.5), (1.0, 0.2), (2.0, 1.5)] {
            for dist in [GapDist::Uniform, GapDist::GaussianTruncated] {
                let Ok(s) = GapSampler::new(mu, sigma, dist) else {
                    assert!(dist == GapDist::Uniform && mu < 3f64.sqrt() * sigma);
                    continue;
                };
                let mut rng = ChaCha8Rng::seed_from_u64(9);
                let xs: Vec<f64> = (0..400_000).map(|_| s.sample(&mut rng)).collect();
                assert!(xs.iter().all(|&g| g > 0.0));
                let m = xs.iter().sum::<f64>() / xs.len() as f64;
                let sd = (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64).sqrt();
                assert!(close(m, mu, 0.01), "{dist:?} mean {m} vs {mu}");
                assert!(close(sd, sigma, 0.01), "{dist:?} sd {sd} vs {sigma}");
            }
        }
    }

    #[test]
    fn gap_sampler_rejects_bad_parameters() {
        assert!(GapSampler::new(1.0, 0.0, GapDist::Uniform).is_err());
        assert!(GapSampler::new(-1.0, 1.0, GapDist::GaussianTruncated).is_err());
        assert!(GapSampler::new(1.0, 1.0, GapDist::Uniform).is_err());
        assert!(GapSampler::new(1.0, 2.0, GapDist::GaussianTruncated).is_err());
    }

    fn cfg(dist: GapDist, n: usize, seed: u64) -> GapConfig {
        GapConfig {
            mu: 1.0,
            sigma: 0.5,
            dist,
            n,
            seed,
        }
    }

    #[test]
    fn exit_simulation_is_reproducible_and_sane() {
        let c = cfg(GapDist::GaussianTruncated, 100_000, 3);
        let a = simulate_exit(&c, 2.5, 1.0, 2000).unwrap();
        let b = simulate_exit(&c, 2.5, 1.0, 2000).unwrap();
        assert_eq!(a, b);
        assert!(a.var_exit >= 0.0);
        assert_eq!((a.trials, a.censored), (2000, 0));
        // discrete overshoot puts the mean above 25, but not wildly
        assert!(a.mean_exit > 25.0 && a.mean_exit < 40.0, "{}", a.mean_exit);
    }

    #[test]
    fn drift_shortens_the_walk() {
        let c = cfg(GapDist::GaussianTruncated, 100_000, 5);
        let centred = simulate_exit(&c, 5.0, 1.0, 4000).unwrap();
        let off = simulate_exit(&c, 5.0, 1.25, 4000).unwrap();
        assert!(off.mean_exit < centred.mean_exit);
    }

    #[test]
    fn censoring() {
        let c = cfg(GapDist::Uniform, 10, 0);
        assert!(matches!(simulate_exit(&c, 1e9, 1.0, 5), Err(Error::AllCensored { trials: 5, n: 10 })));
        let c = cfg(GapDist::Uniform, 30, 0);
        let s = simulate_exit(&c, 2.0, 1.0, 500).unwrap();
        assert_eq!(s.trials + s.censored, 500);
        assert!(s.censored > 0);
        assert!(simulate_exit(&c, 2.0, 1.0, 0).is_err());
    }

    #[test]
    fn segment_counts() {
        let c = cfg(GapDist::Uniform, 10_000, 1);
        assert_eq!(simulate_segments(&c, 10_000.0 * 0.5).unwrap(), 1);
        let coarse = simulate_segments(&c, 5.0).unwrap();
        let fine = simulate_segments(&c, 2.5).unwrap();
        assert!(fine > coarse && coarse > 1);
        assert_eq!(simulate_segments(&c, 2.5).unwrap(), fine);
    }

    #[test]
    fn csm_examples() {
        let s = csm_centers_in(&[(0.5, 1.0), (1.5, 3.0)], 0.0, 2.0, 2).unwrap();
        assert_eq!(s.centers, vec![(0.5, 1.0), (1.5, 3.0)]);
        assert!(!s.has_gaps());

        let s = csm_centers_in(&[(0.1, 1.0), (0.2, 2.0), (0.3, 6.0)], 0.0, 1.0, 1).unwrap();
        assert_eq!(s.centers, vec![(0.5, 3.0)]);

        let mut pts: Vec<(f64, f64)> = (0..50).map(|i| (i as f64 / 1000.0, 1.0)).collect();
        pts.push((10.0, 2.0));
        let s = csm_centers(&pts, 10).unwrap();
        assert!(s.has_gaps());
        assert_eq!(s.empty.iter().filter(|&&e| e).count(), 8);
        assert_eq!(s.centers.len(), 2);

        assert!(csm_centers(&[], 3).is_err());
        assert!(csm_centers_in(&[(5.0, 0.0)], 0.0, 1.0, 3).is_err());
        assert!(csm_centers_in(&[(0.5, 0.0)], 0.0, 1.0, 0).is_err());
    }

    fn ols_slope(p: &[(f64, f64)]) -> f64 {
        let n = p.len() as f64;
        let mx = p.iter().map(|q| q.0).sum::<f64>() / n;
        let my = p.iter().map(|q| q.1).sum::<f64>() / n;
        let sxy: f64 = p.iter().map(|q| (q.0 - mx) * (q.1 - my)).sum();
        let sxx: f64 = p.iter().map(|q| (q.0 - mx).powi(2)).sum();
        sxy / sxx
    }

    #[test]
    fn centre_sequence_keeps_the_slope() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let noise = Normal::new(0.0, 5.0).unwrap();
        let pts: Vec<(f64, f64)> = (0..20_000)
            .map(|_| {
                let x = rng.random_range(0.0..100.0);
                (x, 3.0 * x + 7.0 + noise.sample(&mut rng))
            })
            .collect();
        for n in [50, 100, 400] {
            let s = csm_centers(&pts, n).unwrap();
            assert!(close(ols_slope(&s.centers), ols_slope(&pts), 0.02));
        }
    }

    #[test]
    fn small_report_is_deterministic() {
        let cfg = TheoryConfig {
            eps_over_sigma: vec![4.0],
            drifts: vec![0.0, 0.5, -0.5],
            trials: 300,
            n: 20_000,
            seed: 7,
            ..TheoryConfig::default()
        };
        let a = theory_report(&cfg).unwrap().to_json().unwrap();
        let b = theory_report(&cfg).unwrap().to_json().unwrap();
        assert_eq!(a, b);
        let r = theory_report(&cfg).unwrap();
        assert_eq!(r.expected_keys.len(), 2);
        assert_eq!(r.drift[0].checks.len(), 3);
        assert_eq!(r.drift[0].argmax_drift_over_sigma, 0.0);
    }
}
