//! The dims x noise x model grid on a synthetic corpus, written out as
//! report.json, table1.csv and fig2_series.csv.
//!
//! cargo run --release --example experiment_grid [-- OUT_DIR]

use quakefilter::eval::{run_grid, ExperimentConfig};
use quakefilter::synthetic::{generate, SyntheticSpec};

fn main() -> quakefilter::Result<()> {
    let out = std::env::args().nth(1).map(std::path::PathBuf::from);
    let data = generate(&SyntheticSpec {
        relevant: 250,
        non_relevant: 750,
        pool: 1000,
        ..SyntheticSpec::default()
    });
    let mut cfg = ExperimentConfig::default();
    cfg.grid.dims = vec![10, 30];
    cfg.grid.noise = vec![0.0, 0.4, 0.8];
    cfg.lda.sweeps = 300;

    let t = std::time::Instant::now();
    let report = run_grid(&data.corpus, &data.pool, &cfg, 7)?;
    for c in &report.cells {
        println!(
            "{:<20} dims={:<3} noise={:.1} f1={:.3} auc={:.3} test_noise={}",
            c.model,
            c.dims,
            c.noise,
            c.metrics.f1,
            c.metrics.auc.unwrap_or(f64::NAN),
            c.test_noise
        );
    }
    println!("\nbest cell per model:");
    for r in &report.summary {
        println!("{:<20} f1={:.3} auc={:.3} dims={} noise={}", r.model, r.f1, r.auc, r.dims, r.noise);
    }
    println!("{:.1?}", t.elapsed());

    let dir = match out {
        Some(d) => d,
        None => std::env::temp_dir().join("quakefilter-grid"),
    };
    report.write(&dir)?;
    println!("wrote {}", dir.display());
    Ok(())
}
