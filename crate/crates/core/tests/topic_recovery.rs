mod common;

use quakefilter::features::build_vocabulary;
use quakefilter::topics::{lda_infer, lda_train, LdaParams};

#[test]
fn disjoint_groups_separate_in_most_seeds() {
    let pure = (1..=5)
        .filter(|&seed| common::two_topic_purity(seed, 500).unwrap() >= 0.9)
        .count();
    assert!(pure >= 4, "{pure}/5 seeds reached 90% purity");
}

#[test]
fn log_likelihood_improves_over_training() {
    let (first, last) = common::likelihood_trend(3, 1000).unwrap();
    assert!(last > first, "first-10 mean {first}, last-10 mean {last}");
}

#[test]
fn fold_in_recovers_the_group_of_a_new_document() {
    let (docs, _) = common::two_group_docs(9);
    let vocab = build_vocabulary(&docs, 1).unwrap();
    let params = LdaParams {
        sweeps: 500,
        ..LdaParams::new(2, 9)
    };
    let model = lda_train(&docs, &vocab, &params).unwrap();
    let alfa = lda_infer(&model, &vocab, &["alfa1", "alfa2", "alfa3", "alfa4"].into_iter().collect(), 100, 1).unwrap();
    let beta = lda_infer(&model, &vocab, &["beta1", "beta2", "beta3", "beta4"].into_iter().collect(), 100, 1).unwrap();
    let top = |v: &[f64]| if v[0] > v[1] { 0 } else { 1 };
    assert_ne!(top(&alfa.0), top(&beta.0));
    assert!((alfa.0.iter().sum::<f64>() - 1.0).abs() < 1e-9);
}
