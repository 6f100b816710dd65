//! A small benchmark: nearest-neighbour query boxes replayed against the
//! index and the baselines, each checked against a full scan.

use coax::bench::{gen_workload, run_bench, sweep_specs, BenchConfig, QueryKind};
use coax::synth::{generate, SynthConfig};
use coax::{CoaxConfig, DetectConfig};

fn main() -> coax::Result<()> {
    let plan = SynthConfig::independent(50_000, 5, 21)
        .with_fd(0, 1, 2.0, 0.0)
        .with_fd(0, 2, 0.5, 100.0)
        .with_outliers(0.05);
    let data = generate(&plan)?.data;

    let workloads = vec![
        gen_workload(&data, 50, 200, QueryKind::Range, 1)?,
        gen_workload(&data, 1, 200, QueryKind::Point, 2)?,
    ];
    let specs = sweep_specs(&["coax", "columnfiles", "uniformgrid", "fullscan"], &[4, 8, 16], 0)?;
    let cfg = BenchConfig {
        coax: CoaxConfig {
            detect: DetectConfig {
                target_ratio: 0.95,
                ..DetectConfig::default()
            },
            ..CoaxConfig::default()
        },
        dataset: "synthetic".into(),
        ..BenchConfig::default()
    };
    let report = run_bench(&data, &workloads, &specs, &cfg)?;

    println!("{:<18} {:>10} {:>8} {:>12} {:>12}", "index", "dir bytes", "kind", "median us", "med scanned");
    for ix in &report.indexes {
        for r in &ix.results {
            println!(
                "{:<18} {:>10} {:>8} {:>12.1} {:>12.0}",
                ix.name,
                ix.directory_bytes,
                format!("{:?}", r.kind),
                r.median_query_us,
                r.median_rows_scanned
            );
        }
    }
    for s in &report.skipped {
        println!("skipped {}: {} B directory for {} B of data", s.name, s.predicted_directory_bytes, s.data_bytes);
    }
    println!("all answers match the full scan: {}", report.valid);
    Ok(())
}
