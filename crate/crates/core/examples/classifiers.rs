//! Trains the five classifiers on topic vectors and scores a holdout split.
//!
//! cargo run --release --example classifiers

use quakefilter::balance::{borderline_smote, LabeledVectors};
use quakefilter::eval::{score_metrics, stratified_split};
use quakefilter::models::{train, ModelKind, ModelSpec};
use quakefilter::pipeline::{FeatureConfig, LdaConfig, Pipeline};
use quakefilter::synthetic::{generate, SyntheticSpec};
use quakefilter::text::analyze;

fn main() -> quakefilter::Result<()> {
    let data = generate(&SyntheticSpec {
        relevant: 150,
        non_relevant: 450,
        pool: 0,
        ..SyntheticSpec::default()
    });
    let msgs = &data.corpus.messages;
    let tokens: Vec<_> = msgs.iter().map(|m| analyze(&m.text)).collect();
    let gold: Vec<_> = msgs.iter().map(|m| m.gold.unwrap()).collect();
    let (train_idx, test_idx) = stratified_split(&gold, 0.25, 1)?;

    let pick = |idx: &[usize]| -> (Vec<_>, Vec<_>) { idx.iter().map(|&i| (msgs[i].clone(), tokens[i].clone())).unzip() };
    let (train_msgs, train_tokens) = pick(&train_idx);
    let (test_msgs, test_tokens) = pick(&test_idx);
    let lda = LdaConfig {
        sweeps: 200,
        ..LdaConfig::default()
    };
    let dims = 20;
    let pipeline = Pipeline::fit(&train_tokens, Some(dims), &FeatureConfig::default(), &lda, 5)?;
    let train_set = LabeledVectors::new(
        pipeline.transform(&train_msgs, &train_tokens)?,
        train_idx.iter().map(|&i| gold[i]).collect(),
    )?;
    let balanced = borderline_smote(&train_set, 5, 5, 2)?;
    let test_x = pipeline.transform(&test_msgs, &test_tokens)?;
    let test_y: Vec<_> = test_idx.iter().map(|&i| gold[i]).collect();

    println!("{:<20} {:>9} {:>6} {:>6} {:>6}", "model", "precision", "recall", "f1", "auc");
    for kind in ModelKind::ALL {
        let mut spec = ModelSpec::new(kind).with_seed(3);
        if kind == ModelKind::BernoulliNb {
            spec = spec.with("binarize", 1.0 / dims as f64);
        }
        let model = train(&spec, &balanced)?;
        let scored = if kind == ModelKind::Baseline {
            model.score_tokens(&test_tokens)?
        } else {
            model.predict_scores(&test_x)?
        };
        let m = score_metrics(&scored, &test_y)?;
        println!(
            "{:<20} {:>9.3} {:>6.3} {:>6.3} {:>6.3}",
            kind,
            m.precision,
            m.recall,
            m.f1,
            m.auc.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
