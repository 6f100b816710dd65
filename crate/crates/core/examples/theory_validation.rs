//! Monte Carlo checks of the segment-length formulas for a random walk of
//! key gaps, plus the centre-sequence and grid-equivalence helpers.

use coax::theory::{
    band_ratio, csm_centers, equivalent_grid_cells, expected_keys, expected_keys_drift, expected_segments,
    simulate_exit, simulate_segments, variance_keys, GapConfig, GapDist,
};

fn main() -> coax::Result<()> {
    let sigma = 0.5;
    let cfg = |dist| GapConfig {
        mu: 1.0,
        sigma,
        dist,
        n: 1_000_000,
        seed: 42,
    };

    println!("eps/sigma  dist               E[T] sim   closed   Var[T] sim   closed");
    for r in [5.0, 10.0, 20.0] {
        let eps = r * sigma;
        for dist in [GapDist::Uniform, GapDist::GaussianTruncated] {
            let s = simulate_exit(&cfg(dist), eps, 1.0, 5_000)?;
            println!(
                "{r:9} {:<18} {:9.1} {:8.1} {:12.1} {:8.1}",
                format!("{dist:?}"),
                s.mean_exit,
                expected_keys(eps, sigma),
                s.var_exit,
                variance_keys(eps, sigma)
            );
        }
    }

    let eps = 10.0 * sigma;
    println!("\nmis-set slope at eps/sigma = 10");
    for drift in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        let s = simulate_exit(&cfg(GapDist::Uniform), eps, 1.0 + drift * sigma, 5_000)?;
        println!(
            "  drift {drift:+.1} sigma: simulated {:7.1}, closed form {:7.1}",
            s.mean_exit,
            expected_keys_drift(eps, sigma, drift * sigma)
        );
    }

    let segs = simulate_segments(&cfg(GapDist::Uniform), eps)?;
    println!(
        "\nsegments over 1e6 keys: simulated {segs}, closed form {:.0}",
        expected_segments(1_000_000, eps, sigma)
    );

    let points: Vec<(f64, f64)> = (0..1000).map(|i| (i as f64, 3.0 * i as f64 + (i % 7) as f64)).collect();
    let centres = csm_centers(&points, 10)?;
    println!("\ncentre sequence: {:?}", &centres.centers[..3]);
    println!(
        "band ratio {:.1}, equivalent grid cells {:.1}",
        band_ratio(1000.0, 3000.0, 3.0, 10.0),
        equivalent_grid_cells(1000.0, 3000.0, 3.0, 10.0, 100.0, 1.0)
    );
    Ok(())
}
