//! How a constraint on a dependent column becomes a scan range on its
//! predictor, and how much of that scan is wasted for different query widths.

use coax::softfd::SoftFdModel;
use coax::translate::{dependent_range_to_indexed, effectiveness, result_area, scanned_area, translated_scan_range};
use coax::Interval;

fn main() -> coax::Result<()> {
    let model = SoftFdModel {
        indexed_dim: 0,
        dependent_dim: 1,
        slope: -2.0,
        intercept: 1000.0,
        eps_lb: 15.0,
        eps_ub: 25.0,
        fit_quality: 0.97,
    };

    let y = Interval::new(400.0, 500.0);
    let x = dependent_range_to_indexed(&model, y.lo(), y.hi())?;
    println!("dependent in [{}, {}] -> predictor in [{:.3}, {:.3}]", y.lo(), y.hi(), x.lo(), x.hi());

    let narrowed = translated_scan_range(&model, Interval::new(200.0, 260.0), y)?;
    println!("with predictor already in [200, 260]: scan [{:.3}, {:.3}]", narrowed.lo(), narrowed.hi());

    let disjoint = translated_scan_range(&model, Interval::new(0.0, 100.0), y)?;
    println!("with predictor in [0, 100]: empty = {}", disjoint.is_empty());

    let eps = 20.0;
    println!("\n q_y/eps   result area   scanned area   effectiveness");
    for ratio in [0.25, 0.5, 1.0, 2.0, 4.0, 8.0] {
        let q_y = ratio * eps;
        println!(
            "{ratio:8.2} {:13.1} {:14.1} {:15.3}",
            result_area(q_y, eps, 2.0),
            scanned_area(q_y, eps, 2.0),
            effectiveness(q_y, eps)?
        );
    }
    Ok(())
}
