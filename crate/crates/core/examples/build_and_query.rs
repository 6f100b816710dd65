//! Builds an index over a table with two dependency groups, then runs a range
//! query and a point query and compares them with a full scan.

use coax::synth::{generate, SynthConfig};
use coax::{full_scan, CoaxConfig, CoaxIndex, DetectConfig, Interval, QueryRect};

fn main() -> coax::Result<()> {
    let plan = SynthConfig::independent(300_000, 6, 11)
        .with_fd(0, 1, 1.5, 0.0)
        .with_fd(0, 2, -2.0, 2500.0)
        .with_fd(3, 4, 0.8, 50.0)
        .with_outliers(0.05);
    let data = generate(&plan)?.data;

    let cfg = CoaxConfig {
        detect: DetectConfig {
            target_ratio: 0.95,
            ..DetectConfig::default()
        },
        cells_per_dim: 32,
        ..CoaxConfig::default()
    };
    let index = CoaxIndex::build(&data, &cfg)?;
    let stats = index.stats();
    println!(
        "{} rows: {} primary, {} outliers; primary grid over {} of {} dims, sort dim {}",
        stats.n_rows, stats.primary_rows, stats.outlier_rows, stats.primary_grid_dims, stats.n_dims, stats.sort_dim
    );
    println!(
        "directory bytes: primary {}, outliers {}",
        stats.primary_directory_bytes, stats.outlier_directory_bytes
    );

    // Constrain only dependent columns; translation recovers the predictor range.
    let q = QueryRect::full(6)
        .with_dim(1, Interval::new(300.0, 420.0))?
        .with_dim(4, Interval::new(200.0, 400.0))?
        .with_dim(5, Interval::new(0.0, 500.0))?;
    let (rows, qs) = index.query(&q);
    let expected = full_scan(&data, &q);
    println!(
        "range query: {} rows ({} scanned primary, {} scanned outliers), full scan agrees: {}",
        rows.len(),
        qs.primary.rows_scanned,
        qs.outlier.rows_scanned,
        rows == expected
    );

    let probe = data.row(12_345);
    let hits = index.point_query(&probe);
    println!("point query for row 12345 -> {:?}", hits);
    Ok(())
}
