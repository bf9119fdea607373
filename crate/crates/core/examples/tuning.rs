//! Cross-validated hyperparameter search over a small grid, with
//! oversampling inside each training fold.
//!
//! cargo run --release --example tuning

use std::collections::BTreeMap;

use quakefilter::balance::LabeledVectors;
use quakefilter::eval::{auc, cross_validate_tune, expand_grid, CvOptions};
use quakefilter::models::ModelKind;
use quakefilter::pipeline::{FeatureConfig, LdaConfig, Pipeline};
use quakefilter::synthetic::{generate, SyntheticSpec};
use quakefilter::text::analyze;

fn main() -> quakefilter::Result<()> {
    let data = generate(&SyntheticSpec {
        relevant: 100,
        non_relevant: 300,
        pool: 0,
        ..SyntheticSpec::default()
    });
    let msgs = &data.corpus.messages;
    let tokens: Vec<_> = msgs.iter().map(|m| analyze(&m.text)).collect();
    let lda = LdaConfig {
        sweeps: 200,
        ..LdaConfig::default()
    };
    let pipeline = Pipeline::fit(&tokens, Some(10), &FeatureConfig::default(), &lda, 1)?;
    let set = LabeledVectors::new(pipeline.transform(msgs, &tokens)?, msgs.iter().map(|m| m.gold.unwrap()).collect())?;

    let grid = BTreeMap::from([("lambda".to_string(), vec![0.01, 0.1, 1.0, 10.0])]);
    let specs = expand_grid(ModelKind::LogisticRegression, &grid, 4);
    let report = cross_validate_tune(&specs, &set, &CvOptions::default(), 4)?;
    for c in &report.candidates {
        println!("lambda {:>5}: mean AUC {:.4}, mean F1 {:.4}", c.spec.get("lambda"), c.mean_auc, c.mean_f1);
    }
    println!("best: {:?}", report.best.hyper);

    // ties score one half
    let toy = auc(&[0.8, 0.3, 0.5, 0.1], &[
        quakefilter::corpus::Label::Relevant,
        quakefilter::corpus::Label::Relevant,
        quakefilter::corpus::Label::NonRelevant,
        quakefilter::corpus::Label::NonRelevant,
    ])?;
    println!("toy AUC {toy}");
    Ok(())
}
