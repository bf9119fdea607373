//! Builds a ground-truth set from a raw stream: stratified systematic
//! sampling, near-duplicate removal, majority vote and agreement statistics.
//!
//! cargo run --example ground_truth

use quakefilter::agreement::validate_labels;
use quakefilter::corpus::{dedup_levenshtein, normalized_levenshtein, systematic_sample, Corpus, Message};
use quakefilter::synthetic::{generate, SyntheticSpec};

fn main() -> quakefilter::Result<()> {
    let raw = generate(&SyntheticSpec {
        relevant: 300,
        non_relevant: 900,
        pool: 0,
        rater_flip: Some(0.12),
        ..SyntheticSpec::default()
    })
    .corpus;

    let mut per_day = std::collections::BTreeMap::new();
    for m in &raw.messages {
        *per_day.entry(m.day()).or_insert(0) += 1;
    }
    println!("raw: {} messages, per day {:?}", raw.len(), per_day.values().collect::<Vec<_>>());

    let sample = systematic_sample(&raw, 400, Some(Message::day));
    println!("sampled: {}", sample.len());

    // a retweet-style copy of the first message
    let mut with_copy = sample.messages.clone();
    let mut copy = with_copy[0].clone();
    copy.id = "copy".into();
    copy.text.push('!');
    println!(
        "distance to the copy: {:.3}",
        normalized_levenshtein(&with_copy[0].text, &copy.text)
    );
    with_copy.insert(1, copy);
    let deduped = dedup_levenshtein(&Corpus::new(with_copy, "sample"), 0.10);
    println!("after dedup: {}", deduped.len());

    let (labeled, report) = validate_labels(&deduped);
    println!(
        "gold labels for {} messages: raw agreement {:.3}, fleiss kappa {:.3}, icc(2,1) {:.3}",
        labeled.len(),
        report.raw_agreement.unwrap_or(f64::NAN),
        report.fleiss_kappa.unwrap_or(f64::NAN),
        report.icc_2_1.unwrap_or(f64::NAN)
    );
    Ok(())
}
