//! The grid baselines on their own: column files (one sort dimension, the
//! others gridded) and a uniform grid over every dimension.

use coax::grid::GridIndex;
use coax::synth::{generate, SynthConfig};
use coax::{full_scan, QueryRect};

fn main() -> coax::Result<()> {
    let data = generate(&SynthConfig::independent(100_000, 4, 3))?.data;
    let rows: Vec<usize> = (0..data.n_rows()).collect();
    let q = QueryRect::new(&[100.0, 250.0, 0.0, 600.0], &[180.0, 400.0, 1000.0, 640.0])?;
    let expected = full_scan(&data, &q);
    println!("full scan: {} matches", expected.len());

    for cells in [4, 8, 16] {
        let cf = GridIndex::column_files(&data, &rows, 0, cells)?;
        let ug = GridIndex::uniform_grid(&data, &rows, cells)?;
        for (name, ix) in [("column files", &cf), ("uniform grid", &ug)] {
            let (got, st) = ix.range_query(&q);
            println!(
                "{name:>12} c={cells:<3} cells {:>6}  dir {:>8} B  visited {:>5}  scanned {:>6}  exact {}",
                ix.n_cells(),
                ix.directory_bytes(),
                st.cells_visited,
                st.rows_scanned,
                got == expected
            );
        }
    }
    Ok(())
}
