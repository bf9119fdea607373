//! Saves a trained model artifact and streams JSONL records through it.
//!
//! cargo run --release --example classify_stream

use std::io::Cursor;

use quakefilter::artifact::ModelArtifact;
use quakefilter::balance::{borderline_smote, LabeledVectors};
use quakefilter::cli::classify;
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
    let lda = LdaConfig {
        sweeps: 200,
        ..LdaConfig::default()
    };
    let pipeline = Pipeline::fit(&tokens, Some(12), &FeatureConfig::default(), &lda, 8)?;
    let set = LabeledVectors::new(pipeline.transform(msgs, &tokens)?, msgs.iter().map(|m| m.gold.unwrap()).collect())?;
    let model = train(
        &ModelSpec::new(ModelKind::RandomForest).with_seed(2),
        &borderline_smote(&set, 5, 5, 3)?,
    )?;

    let dir = std::env::temp_dir().join("quakefilter-artifact");
    std::fs::create_dir_all(&dir).map_err(|e| quakefilter::Error::Io { path: dir.clone(), source: e })?;
    let path = dir.join("model.json");
    ModelArtifact::new(Some(pipeline), model)?.save(&path)?;
    let artifact = ModelArtifact::load(&path)?;
    println!("artifact at {}", path.display());

    // the second record reuses a non-relevant text so its words are in the vocabulary
    let other = msgs.iter().find(|m| !m.gold.unwrap().is_relevant()).unwrap();
    let input = format!(
        "{}\n{}\n{}\n",
        r#"{"id":"a","timestamp":1267249000,"text":"Fuerte terremoto, daños en el puente y heridos","followers":120}"#,
        serde_json::json!({"id": "b", "timestamp": 1267249100, "text": other.text, "source": "web"}),
        r#"{"id":"c","timestamp":1267249200,"text":"alerta de tsunami en la costa, evacuación"}"#,
    );
    let mut out = Vec::new();
    let n = classify(&artifact, Cursor::new(input), "stdin".as_ref(), &mut out)?;
    print!("{}", String::from_utf8_lossy(&out));
    println!("{n} records");
    Ok(())
}
