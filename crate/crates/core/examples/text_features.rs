//! Tokenizing, stemming and tf-idf with user features.
//!
//! cargo run --example text_features

use quakefilter::corpus::Message;
use quakefilter::features::{append_user_features, build_vocabulary, tfidf_transform};
use quakefilter::text::{analyze, tokenize};

fn main() -> quakefilter::Result<()> {
    let messages = vec![
        Message::new("1", 0, "Fuerte #Terremoto en @Chile http://t.co/x").with_user(1200, 300),
        Message::new("2", 0, "RT @ana: temblores y réplicas en Concepción!!").with_user(40, 80),
        Message::new("3", 0, "vamos a la playa hoy").with_user(0, 0),
    ];
    for m in &messages {
        println!("{:<48} {:?}", m.text, tokenize(&m.text).0);
        println!("{:<48} {:?}", "", analyze(&m.text).0);
    }

    let docs: Vec<_> = messages.iter().map(|m| analyze(&m.text)).collect();
    let vocab = build_vocabulary(&docs, 1)?;
    println!("\n{} terms", vocab.len());
    for (i, t) in vocab.terms().iter().enumerate() {
        println!("  {t:<12} df={} idf={:.3}", vocab.df(i), vocab.idf(i));
    }

    let x = append_user_features(tfidf_transform(&docs, &vocab), &messages)?;
    for (i, m) in messages.iter().enumerate() {
        let row = x.dense_row(i);
        let nonzero: Vec<String> = row.iter().filter(|v| **v != 0.0).map(|v| format!("{v:.3}")).collect();
        println!("message {}: {}", m.id, nonzero.join(" "));
    }
    Ok(())
}
