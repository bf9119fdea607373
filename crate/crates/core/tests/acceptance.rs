//! Acceptance runner: one PASS/FAIL/SKIP line per criterion, nonzero exit
//! on any failure.

mod common;

use std::collections::HashMap;
use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use common::Check;
use quakefilter::agreement::{fleiss_kappa, icc_2_1, icc_anova, RatingMatrix};
use quakefilter::corpus::{load_corpus, write_jsonl, Format};
use quakefilter::error::Error;
use quakefilter::eval::{run_grid, ExperimentConfig};
use quakefilter::features::build_vocabulary;
use quakefilter::models::ModelKind;
use quakefilter::synthetic::{generate, SyntheticSpec};
use quakefilter::text::{stem_word, TokenSeq};
use quakefilter::topics::{lda_train, LdaParams};

type Criterion = (&'static str, Box<dyn FnOnce() -> Outcome>);

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn within(budget: Duration, check: impl FnOnce() -> Result<String, String>) -> Outcome {
    let start = Instant::now();
    let result = check();
    let took = start.elapsed();
    match result {
        Ok(_) if took > budget => Outcome::Fail(format!("took {took:.1?}, budget {budget:?}")),
        Ok(note) => Outcome::Pass(format!("{note} in {took:.2?}")),
        Err(e) => Outcome::Fail(e),
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ratio(v: &serde_json::Value) -> f64 {
    let (a, b) = v.as_str().unwrap().split_once('/').unwrap();
    a.parse::<f64>().unwrap() / b.parse::<f64>().unwrap()
}

fn metric_oracles() -> Result<String, String> {
    common::auc_matches_brute_force(200, 1)?;
    common::confusion_matches_definitions(200, 2)?;
    Ok("200 AUC sets and 200 confusion sets agree".into())
}

fn agreement_oracles() -> Result<String, String> {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/agreement.json"))
        .map_err(|e| e.to_string())?;
    let fx: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let f = &fx["fleiss"];
    let counts: Vec<Vec<usize>> = serde_json::from_value(f["counts"].clone()).unwrap();
    let cats: Vec<String> = serde_json::from_value(f["categories"].clone()).unwrap();
    let kappa = fleiss_kappa(&RatingMatrix::new(cats.clone(), counts).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    ensure((kappa - ratio(&f["kappa"])).abs() < 1e-9, || format!("kappa {kappa}"))?;
    let ratings: Vec<Vec<f64>> = serde_json::from_value(fx["icc"]["ratings"].clone()).unwrap();
    let icc = icc_anova(&ratings).map_err(|e| e.to_string())?.icc;
    ensure((icc - ratio(&fx["icc"]["icc"])).abs() < 1e-9, || format!("icc {icc}"))?;

    let perfect = RatingMatrix::new(cats.clone(), vec![vec![3, 0], vec![0, 3], vec![3, 0]]).unwrap();
    let k1 = fleiss_kappa(&perfect).map_err(|e| e.to_string())?;
    let i1 = icc_2_1(&[vec![1.0; 3], vec![0.0; 3], vec![1.0; 3]]).map_err(|e| e.to_string())?;
    ensure(k1 == 1.0 && i1 == 1.0, || format!("perfect agreement gave kappa {k1}, icc {i1}"))?;

    let one_category = RatingMatrix::new(cats, vec![vec![3, 0], vec![3, 0]]).unwrap();
    ensure(matches!(fleiss_kappa(&one_category), Err(Error::UndefinedKappa)), || {
        "single-category input did not raise the undefined-kappa error".into()
    })?;
    Ok(format!("kappa {kappa:.6}, icc {icc:.6}"))
}

fn smote_geometry() -> Result<String, String> {
    let mut with_noise = 0;
    for seed in 0..50 {
        with_noise += common::smote_geometry(seed)? as usize;
    }
    Ok(format!("50 configs, {with_noise} with all-majority neighborhoods"))
}

fn lda_sanity() -> Result<String, String> {
    let (docs, _) = common::two_group_docs(1);
    let vocab = build_vocabulary(&docs, 1).map_err(|e| e.to_string())?;
    for t in [1, 2, 5] {
        let model = lda_train(&docs, &vocab, &LdaParams { sweeps: 100, ..LdaParams::new(t, 3) })
            .map_err(|e| e.to_string())?;
        for k in 0..t {
            let sum: f64 = model.phi(k).iter().sum();
            ensure((sum - 1.0).abs() < 1e-9, || format!("T={t} topic {k} sums to {sum}"))?;
        }
        if t == 1 {
            let mut counts: HashMap<&str, f64> = HashMap::new();
            for d in &docs {
                for w in d.iter() {
                    *counts.entry(w.as_str()).or_default() += 1.0;
                }
            }
            let total: f64 = counts.values().sum();
            let beta = model.beta();
            let v = vocab.len() as f64;
            for (term, p) in vocab.terms().iter().zip(model.phi(0)) {
                let want = (counts[term.as_str()] + beta) / (total + v * beta);
                ensure((p - want).abs() < 1e-9, || format!("T=1 phi[{term}] {p} vs unigram {want}"))?;
            }
        }
    }
    let purities: Vec<f64> = (1..=5)
        .map(|s| common::two_topic_purity(s, 500))
        .collect::<Result<_, _>>()?;
    let pure = purities.iter().filter(|&&p| p >= 0.9).count();
    ensure(pure >= 4, || format!("purity {purities:?}"))?;
    let (first, last) = common::likelihood_trend(3, 1000)?;
    ensure(last > first, || format!("log-likelihood first-10 {first} vs last-10 {last}"))?;
    Ok(format!("purity >= 0.9 in {pure}/5 seeds, log-likelihood {first:.1} -> {last:.1}"))
}

fn synthetic_trend() -> Result<String, String> {
    let data = generate(&SyntheticSpec::default());
    let mut cfg = ExperimentConfig::default();
    cfg.grid.dims = vec![50];
    cfg.grid.noise = vec![0.0, 0.4];
    let report = run_grid(&data.corpus, &data.pool, &cfg, 7).map_err(|e| e.to_string())?;
    let auc = |kind, noise| {
        report
            .cell(kind, 50, noise)
            .and_then(|c| c.metrics.auc)
            .ok_or_else(|| format!("missing {kind} cell at noise {noise}"))
    };
    let rf0 = auc(ModelKind::RandomForest, 0.0)?;
    let rf4 = auc(ModelKind::RandomForest, 0.4)?;
    let base0 = auc(ModelKind::Baseline, 0.0)?;
    let note = format!("forest AUC {rf0:.3} at noise 0, {rf4:.3} at 0.4; baseline {base0:.3}");
    ensure(rf0 >= 0.90 && rf0 > base0 && rf4 >= rf0 - 0.02, || note.clone())?;
    Ok(note)
}

fn grid_determinism() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let data = generate(&SyntheticSpec {
        relevant: 60,
        non_relevant: 140,
        pool: 200,
        ..SyntheticSpec::default()
    });
    write_jsonl(&data.corpus, dir.path().join("corpus.jsonl")).map_err(|e| e.to_string())?;
    write_jsonl(&data.pool, dir.path().join("pool.jsonl")).map_err(|e| e.to_string())?;
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        "seed = 99\n[paths]\ncorpus = \"corpus.jsonl\"\npool = \"pool.jsonl\"\n\
         [grid]\ndims = [8, 12]\nnoise = [0.0, 0.2]\n[lda]\nsweeps = 150\n",
    )
    .map_err(|e| e.to_string())?;
    let mut reports = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let o = Command::new(env!("CARGO_BIN_EXE_quakefilter"))
            .args(["grid", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .env_remove(quakefilter::config::OUTPUT_ENV)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(o.status.success(), || String::from_utf8_lossy(&o.stderr).into_owned())?;
        reports.push(std::fs::read(out.join("report.json")).map_err(|e| e.to_string())?);
    }
    ensure(reports[0] == reports[1], || "report.json differs between runs".into())?;
    Ok(format!("two runs, {} identical bytes", reports[0].len()))
}

/// Published best-cell scores: precision, recall, f1, accuracy, auc.
const REFERENCE_BASELINE: [f64; 5] = [0.625, 0.545, 0.53, 0.5, 0.568];
const REFERENCE_FOREST_AUC: f64 = 0.844;

fn reference_numbers() -> Outcome {
    let (Some(corpus), Some(pool)) = (
        std::env::var_os("QUAKEFILTER_REFERENCE_CORPUS"),
        std::env::var_os("QUAKEFILTER_REFERENCE_POOL"),
    ) else {
        return Outcome::Skip(
            "original labeled dataset not supplied (set QUAKEFILTER_REFERENCE_CORPUS and QUAKEFILTER_REFERENCE_POOL)".into(),
        );
    };
    within(Duration::MAX, || {
        let load = |p: PathBuf| load_corpus(&p, Format::from_path(&p)).map_err(|e| e.to_string());
        let corpus = load(corpus.into())?;
        let pool = load(pool.into())?;
        let cfg = ExperimentConfig::default();
        let report = run_grid(&corpus, &pool, &cfg, 42).map_err(|e| e.to_string())?;
        let forest = report
            .summary_for(ModelKind::RandomForest)
            .map(|r| r.auc)
            .ok_or("no forest summary")?;
        let base = report
            .cell(ModelKind::Baseline, cfg.grid.dims[0], 0.0)
            .ok_or("no baseline cell at noise 0")?
            .metrics
            .clone();
        let got = [base.precision, base.recall, base.f1, base.accuracy, base.auc.unwrap_or(f64::NAN)];
        let note = format!("forest best AUC {forest:.3}, baseline {got:.3?}");
        ensure((forest - REFERENCE_FOREST_AUC).abs() <= 0.05, || note.clone())?;
        ensure(got.iter().zip(REFERENCE_BASELINE).all(|(g, w)| (g - w).abs() <= 0.05), || note.clone())?;
        Ok(note)
    })
}

fn stemmer_conformance() -> Result<String, String> {
    let fixture = include_str!("fixtures/stemmer_es.csv");
    let pairs: Vec<(&str, &str)> = fixture.lines().skip(1).filter_map(|l| l.split_once(',')).collect();
    ensure(pairs.len() >= 500, || format!("fixture has only {} pairs", pairs.len()))?;
    let hits = pairs.iter().filter(|(w, s)| stem_word(w) == *s).count();
    let rate = hits as f64 / pairs.len() as f64;
    ensure(rate >= 0.995, || format!("{hits}/{} exact", pairs.len()))?;
    // the analyzer applies the same stemmer to every kept token
    let seq: TokenSeq = quakefilter::text::analyze("Terremotos");
    ensure(seq.0 == ["terremot"], || format!("analyze gave {:?}", seq.0))?;
    Ok(format!("{hits}/{} exact ({:.2}%)", pairs.len(), 100.0 * rate))
}

fn main() -> ExitCode {
    let criteria: Vec<Criterion> = vec![
        ("1 metric oracle equivalence", Box::new(|| within(Duration::from_secs(5), metric_oracles))),
        ("2 agreement oracles", Box::new(|| within(Duration::MAX, agreement_oracles))),
        ("3 SMOTE geometry", Box::new(|| within(Duration::from_secs(10), smote_geometry))),
        ("4 LDA sanity", Box::new(|| within(Duration::from_secs(120), lda_sanity))),
        ("5 synthetic end-to-end trend", Box::new(|| within(Duration::from_secs(600), synthetic_trend))),
        ("6 grid determinism", Box::new(|| within(Duration::MAX, grid_determinism))),
        ("7 reference scores on the original dataset", Box::new(reference_numbers)),
        ("8 stemmer conformance", Box::new(|| within(Duration::MAX, stemmer_conformance))),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Outcome::Pass(note) => println!("[PASS] {name}: {note}"),
            Outcome::Skip(note) => println!("[SKIP] {name}: {note}"),
            Outcome::Fail(note) => {
                failed += 1;
                println!("[FAIL] {name}: {note}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
