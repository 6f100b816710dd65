//! The on-disk workflow: write a CSV, learn models, save them as JSON, build
//! an index from the saved models, snapshot it and query the reloaded copy.

use coax::model_file::ModelFile;
use coax::softfd::learn_groups;
use coax::synth::{generate, SynthConfig};
use coax::{full_scan, CoaxConfig, CoaxIndex, Dataset, DetectConfig, QueryRect};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tmp = tempfile::tempdir()?;
    let dir = tmp.path();
    let csv = dir.join("table.csv");
    let models = dir.join("models.json");
    let snapshot = dir.join("table.coax");

    let plan = SynthConfig::independent(50_000, 4, 5).with_fd(2, 3, 4.0, -100.0).with_outliers(0.1);
    generate(&plan)?.data.write_csv(&csv)?;

    let data = Dataset::load_csv(&csv, &["c0", "c1", "c2", "c3"])?;
    let detect = DetectConfig {
        target_ratio: 0.9,
        ..DetectConfig::default()
    };
    let groups = learn_groups(&data, &detect)?;
    ModelFile::from_groups(data.names(), &groups).write(&models)?;
    println!("models written to {}", models.display());

    let groups = ModelFile::read(&models)?.to_groups(data.n_dims())?;
    let index = CoaxIndex::build_with_groups(&data, groups, &CoaxConfig::default())?;
    index.save(&snapshot)?;
    let reloaded = CoaxIndex::load(&snapshot)?;
    println!(
        "snapshot {} bytes, reload identical: {}",
        std::fs::metadata(&snapshot)?.len(),
        reloaded == index
    );

    let q = QueryRect::new(&[0.0, 0.0, 0.0, 1500.0], &[500.0, 1000.0, 1000.0, 1700.0])?;
    let (rows, _) = reloaded.query(&q);
    println!("{} rows, full scan agrees: {}", rows.len(), rows == full_scan(&data, &q));

    Ok(())
}
