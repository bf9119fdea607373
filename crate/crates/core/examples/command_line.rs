//! Drives the command-line front end in-process: writes a synthetic corpus
//! and config, then runs `grid` and `tune`.
//!
//! cargo run --release --example command_line

use quakefilter::corpus::write_jsonl;
use quakefilter::synthetic::{generate, SyntheticSpec};

fn main() -> quakefilter::Result<()> {
    let dir = std::env::temp_dir().join("quakefilter-cli");
    std::fs::create_dir_all(&dir).map_err(|e| quakefilter::Error::Io { path: dir.clone(), source: e })?;
    let data = generate(&SyntheticSpec {
        relevant: 100,
        non_relevant: 300,
        pool: 400,
        ..SyntheticSpec::default()
    });
    write_jsonl(&data.corpus, dir.join("corpus.jsonl"))?;
    write_jsonl(&data.pool, dir.join("pool.jsonl"))?;
    let config = dir.join("run.toml");
    std::fs::write(
        &config,
        r#"seed = 3

[paths]
corpus = "corpus.jsonl"
pool = "pool.jsonl"
output = "out"

[grid]
dims = [10]
noise = [0.0, 0.4]

[lda]
sweeps = 200

[hyper.random_forest]
trees = [50, 100]
"#,
    )
    .map_err(|e| quakefilter::Error::Io { path: config.clone(), source: e })?;

    let cfg = config.to_str().unwrap();
    for args in [
        vec!["quakefilter", "grid", "--config", cfg],
        vec!["quakefilter", "tune", "--config", cfg, "--model", "random_forest", "--dims", "10"],
    ] {
        let code = quakefilter::cli::run(args.iter());
        println!("{} -> exit {code}", args[1]);
    }
    println!("outputs in {}", dir.join("out").display());
    Ok(())
}
