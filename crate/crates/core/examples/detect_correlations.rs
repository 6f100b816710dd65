//! Learns linear dependencies from a synthetic table and shows why the
//! unrelated pairs were turned down.

use coax::softfd::{learn_groups, split_data, PairFitter};
use coax::synth::{generate, SynthConfig};
use coax::DetectConfig;

fn main() -> coax::Result<()> {
    let plan = SynthConfig::independent(200_000, 6, 7)
        .with_fd(0, 1, 2.0, 10.0)
        .with_fd(0, 2, -0.5, 800.0)
        .with_fd(3, 4, 1.2, 0.0)
        .with_outliers(0.08);
    let synth = generate(&plan)?;
    let data = &synth.data;
    println!("planted: {:?}", plan.planted_groups());

    let cfg = DetectConfig {
        target_ratio: 0.92,
        seed: 1,
        ..DetectConfig::default()
    };
    let fitter = PairFitter::new(data, cfg)?;
    println!(
        "sample of {} rows, bucket threshold {}",
        fitter.sample_len(),
        fitter.threshold()
    );
    for (x, d) in [(0, 1), (3, 4), (0, 3), (5, 2)] {
        match fitter.fit(x, d) {
            Ok(m) => println!(
                "  {x} -> {d}: d = {:.4}·x + {:.2}, margins [-{:.2}, +{:.2}], quality {:.3}",
                m.slope, m.intercept, m.eps_lb, m.eps_ub, m.fit_quality
            ),
            Err(why) => println!("  {x} -> {d}: rejected ({why})"),
        }
    }

    let groups = learn_groups(data, &cfg)?;
    for g in &groups {
        let deps: Vec<usize> = g.dependents().collect();
        println!("group: predictor {} explains {:?}", g.predictor, deps);
    }
    let split = split_data(data, &groups);
    println!(
        "primary ratio {:.4} (planted outliers {:.4})",
        split.primary_ratio(),
        synth.outlier_fraction()
    );
    Ok(())
}
