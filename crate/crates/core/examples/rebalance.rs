//! Noise injection from an unlabeled pool, then borderline-SMOTE on the
//! resulting vectors.
//!
//! cargo run --example rebalance

use quakefilter::balance::{borderline_smote, borderline_status, inject_noise, Borderline, LabeledVectors};
use quakefilter::corpus::Label;
use quakefilter::synthetic::{generate, SyntheticSpec};

fn main() -> quakefilter::Result<()> {
    let data = generate(&SyntheticSpec {
        relevant: 30,
        non_relevant: 70,
        pool: 100,
        ..SyntheticSpec::default()
    });
    let noisy = inject_noise(&data.corpus, &data.pool, 0.4, 9)?;
    println!("{} labeled + {} injected", data.corpus.len(), noisy.len() - data.corpus.len());

    // two overlapping clouds in the plane stand in for topic vectors
    let mut vectors = Vec::new();
    let mut labels = Vec::new();
    for i in 0..60 {
        let t = i as f64 * 0.7;
        vectors.push(vec![t.sin() * 2.0, t.cos() * 2.0]);
        labels.push(Label::NonRelevant);
    }
    for i in 0..12 {
        let t = i as f64 * 0.5;
        vectors.push(vec![1.5 + 0.4 * t.cos(), 0.4 * t.sin()]);
        labels.push(Label::Relevant);
    }
    let set = LabeledVectors::new(vectors, labels)?;
    let status = borderline_status(&set, 5);
    for s in [Borderline::Safe, Borderline::Danger, Borderline::Noise] {
        println!("{s:?}: {}", status.iter().filter(|x| x.1 == s).count());
    }

    let balanced = borderline_smote(&set, 5, 5, 1)?;
    println!(
        "relevant {} -> {}, non-relevant {}",
        set.count(Label::Relevant),
        balanced.count(Label::Relevant),
        balanced.count(Label::NonRelevant)
    );
    for i in set.len()..set.len() + 3 {
        let (p, q) = balanced.parents[i].unwrap();
        println!("synthetic {:.3?} between #{p} and #{q}", balanced.vectors[i]);
    }
    Ok(())
}
