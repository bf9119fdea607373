//! Trains LDA on a synthetic corpus, prints the top words per topic and
//! folds in an unseen message.
//!
//! cargo run --release --example topic_model

use quakefilter::features::build_vocabulary;
use quakefilter::synthetic::{generate, SyntheticSpec};
use quakefilter::text::analyze;
use quakefilter::topics::{lda_infer, lda_train_traced, LdaParams};

fn main() -> quakefilter::Result<()> {
    let data = generate(&SyntheticSpec {
        relevant: 200,
        non_relevant: 400,
        pool: 0,
        ..SyntheticSpec::default()
    });
    let docs: Vec<_> = data.corpus.messages.iter().map(|m| analyze(&m.text)).collect();
    let vocab = build_vocabulary(&docs, 1)?;
    let params = LdaParams {
        sweeps: 300,
        ..LdaParams::new(6, 3)
    };
    let (model, trace) = lda_train_traced(&docs, &vocab, &params)?;
    for (sweep, ll) in &trace.checkpoints {
        println!("sweep {sweep:>4}  log-likelihood {ll:.1}");
    }

    for k in 0..model.topics() {
        let mut words: Vec<(usize, f64)> = model.phi(k).iter().copied().enumerate().collect();
        words.sort_by(|a, b| b.1.total_cmp(&a.1));
        let top: Vec<&str> = words[..6].iter().map(|&(w, _)| vocab.terms()[w].as_str()).collect();
        println!("topic {k}: {}", top.join(" "));
    }

    let doc = analyze("terremoto y tsunami en la costa, evacuación");
    let theta = lda_infer(&model, &vocab, &doc, 100, 1)?;
    println!("theta for {:?}: {:.3?}", doc.0, theta.0);
    Ok(())
}
