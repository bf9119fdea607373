use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use quakefilter::corpus::{write_jsonl, Corpus, Label, Message};
use quakefilter::synthetic::{generate, SyntheticSpec};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_quakefilter"));
    c.env_remove(quakefilter::config::OUTPUT_ENV);
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(path: impl AsRef<Path>) -> serde_json::Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

/// 200 labeled messages plus a pool, and a config with short LDA runs.
fn small_setup(dir: &Path) -> (PathBuf, PathBuf, PathBuf) {
    let data = generate(&SyntheticSpec {
        relevant: 50,
        non_relevant: 150,
        pool: 200,
        ..SyntheticSpec::default()
    });
    let corpus = dir.join("corpus.jsonl");
    let pool = dir.join("pool.jsonl");
    write_jsonl(&data.corpus, &corpus).unwrap();
    write_jsonl(&data.pool, &pool).unwrap();
    let config = dir.join("run.toml");
    fs::write(
        &config,
        "seed = 11\n[paths]\ncorpus = \"corpus.jsonl\"\npool = \"pool.jsonl\"\n[lda]\nsweeps = 100\ninfer_sweeps = 20\n\
         [hyper.random_forest]\ntrees = [20]\n",
    )
    .unwrap();
    (config, corpus, pool)
}

#[test]
fn grid_of_one_dims_and_one_noise_has_five_cells_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (config, _, _) = small_setup(dir.path());
    let out1 = dir.path().join("g1");
    let out2 = dir.path().join("g2");
    for out in [&out1, &out2] {
        let o = run(&["grid", "--config", s(&config), "--dims", "10", "--noise", "0", "--out", s(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let report = json(out1.join("report.json"));
    let cells = report["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 5);
    assert!(cells.iter().all(|c| c["dims"] == 10 && c["noise"] == 0.0));
    for f in ["report.json", "table1.csv", "fig2_series.csv"] {
        assert_eq!(fs::read(out1.join(f)).unwrap(), fs::read(out2.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn output_directory_comes_from_the_environment_unless_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let (config, _, _) = small_setup(dir.path());
    let env_out = dir.path().join("from_env");
    let o = bin()
        .args(["grid", "--config", s(&config), "--dims", "5", "--noise", "0", "--models", "baseline"])
        .env(quakefilter::config::OUTPUT_ENV, &env_out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(env_out.join("report.json").exists());
}

#[test]
fn baseline_artifact_flags_terremoto_and_keeps_other_fields() {
    let dir = tempfile::tempdir().unwrap();
    let (config, _, _) = small_setup(dir.path());
    let out = dir.path().join("tuned");
    let o = run(&["tune", "--config", s(&config), "--model", "baseline", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let input = dir.path().join("in.jsonl");
    fs::write(
        &input,
        "{\"id\":\"a\",\"timestamp\":1,\"text\":\"Fuerte terremoto en Concepción\",\"extra\":[1,2]}\n\n\
         {\"id\":\"b\",\"timestamp\":2,\"text\":\"buenos días a todos\"}\n",
    )
    .unwrap();
    let output = dir.path().join("scored.jsonl");
    let model = out.join("model.json");
    let o = run(&["classify", "--model", s(&model), "--input", s(&input), "--output", s(&output)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let lines: Vec<serde_json::Value> = fs::read_to_string(&output)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0]["predicted"], "relevant");
    assert_eq!(lines[0]["extra"], serde_json::json!([1, 2]));
    assert_eq!(lines[1]["predicted"], "non-relevant");
    let keys: Vec<&String> = lines[0].as_object().unwrap().keys().collect();
    assert_eq!(keys, ["id", "timestamp", "text", "extra", "score", "predicted"]);
}

#[test]
fn classify_reads_stdin_and_reports_bad_lines() {
    use std::io::Write;
    let dir = tempfile::tempdir().unwrap();
    let (config, _, _) = small_setup(dir.path());
    let out = dir.path().join("tuned");
    assert!(run(&["tune", "--config", s(&config), "--model", "baseline", "--out", s(&out)]).status.success());
    let model = out.join("model.json");
    let mut child = bin()
        .args(["classify", "--model", s(&model)])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .stderr(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"{\"id\":\"a\",\"timestamp\":1,\"text\":\"#terremoto\"}\n{\"id\":\"b\"}\n")
        .unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("\"predicted\":\"relevant\""));
    assert!(String::from_utf8_lossy(&o.stderr).contains(":2:"));
}

#[test]
fn tuned_forest_round_trips_and_rejects_a_foreign_vocabulary() {
    let dir = tempfile::tempdir().unwrap();
    let (config, corpus, _) = small_setup(dir.path());
    let out = dir.path().join("tuned");
    let o = run(&[
        "tune", "--config", s(&config), "--model", "random_forest", "--dims", "8", "--noise", "0.2",
        "--folds", "3", "--out", s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let tune = json(out.join("tune.json"));
    assert_eq!(tune["report"]["folds"], 3);
    assert_eq!(tune["report"]["best"]["hyper"]["trees"], 20.0);

    let model = out.join("model.json");
    let scored = dir.path().join("scored.jsonl");
    let o = run(&["classify", "--model", s(&model), "--input", s(&corpus), "--output", s(&scored)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let original: Vec<serde_json::Value> = fs::read_to_string(&corpus)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    let predicted: Vec<serde_json::Value> = fs::read_to_string(&scored)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(predicted.len(), 200);
    let correct = original
        .iter()
        .zip(&predicted)
        .filter(|(a, b)| a["gold"] == b["predicted"])
        .count();
    assert!(correct >= 180, "training accuracy {correct}/200");

    let mut art = json(&model);
    art["pipeline"]["vocabulary"]["terms"][0] = "zzz".into();
    let forged = dir.path().join("forged.json");
    fs::write(&forged, serde_json::to_vec(&art).unwrap()).unwrap();
    let o = run(&["classify", "--model", s(&forged), "--input", s(&corpus), "--output", s(&scored)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("incompatible"), "{}", String::from_utf8_lossy(&o.stderr));
}

fn message(id: &str, day: i64, text: &str) -> Message {
    Message::new(id, 1_267_228_800 + day * 86_400, text)
}

#[test]
fn prepare_accounts_for_one_near_duplicate() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("raw.jsonl");
    let corpus = Corpus::new(
        vec![
            message("1", 0, "se siente un temblor fuerte en santiago"),
            message("2", 0, "se siente un temblor fuerte en santiago!"),
            message("3", 1, "hoy juega colo colo en el estadio"),
            message("4", 1, "que rico el almuerzo de hoy"),
        ],
        "raw",
    );
    write_jsonl(&corpus, &raw).unwrap();
    let out = dir.path().join("prep");
    let o = run(&["prepare", "--input", s(&raw), "--noise", "0", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let prov = json(out.join("provenance.json"));
    let dedup = prov["stages"]
        .as_array()
        .unwrap()
        .iter()
        .find(|st| st["stage"] == "dedup_levenshtein")
        .unwrap();
    assert_eq!(dedup["dropped"], 1);
    assert_eq!(fs::read_to_string(out.join("prepared.jsonl")).unwrap().lines().count(), 3);
    assert!(!out.join("pool.jsonl").exists());

    let again = dir.path().join("prep2");
    assert!(run(&["prepare", "--input", s(&raw), "--noise", "0", "--out", s(&again)]).status.success());
    assert_eq!(
        fs::read(out.join("prepared.jsonl")).unwrap(),
        fs::read(again.join("prepared.jsonl")).unwrap()
    );
}

#[test]
fn prepare_filters_the_pool_around_events() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("raw.jsonl");
    write_jsonl(&Corpus::new(vec![message("1", 0, "hola")], "raw"), &raw).unwrap();
    let pool = dir.path().join("pool.jsonl");
    let pool_msgs = Corpus::new(vec![Message::new("p1", 1_267_228_800 + 3_700, "uno"), message("p2", 10, "dos")], "pool");
    write_jsonl(&pool_msgs, &pool).unwrap();
    let events = dir.path().join("events.csv");
    fs::write(&events, format!("event_time,magnitude\n{},6.1\n", 1_267_228_800 + 3600)).unwrap();
    let out = dir.path().join("prep");
    let o = run(&[
        "prepare", "--input", s(&raw), "--pool", s(&pool), "--events", s(&events), "--out", s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let kept = fs::read_to_string(out.join("pool.jsonl")).unwrap();
    assert!(kept.contains("\"p2\"") && !kept.contains("\"p1\""));
}

#[test]
fn exit_codes_separate_validation_from_runtime_failures() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("raw.jsonl");
    write_jsonl(&Corpus::new(vec![message("1", 0, "hola")], "raw"), &raw).unwrap();
    // positive noise levels without a pool
    let o = run(&["prepare", "--input", s(&raw), "--noise", "0,0.2", "--out", s(&dir.path().join("o"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("pool"));
    // output directory blocked by a regular file
    let blocked = dir.path().join("file");
    fs::write(&blocked, "x").unwrap();
    let o = run(&["prepare", "--input", s(&raw), "--noise", "0", "--out", s(&blocked.join("sub"))]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["grid", "--models", "svm"]).status.code(), Some(1));
}

#[test]
fn validate_labels_lists_incomplete_ratings() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("rated.jsonl");
    let r = Label::Relevant;
    let n = Label::NonRelevant;
    let mut msgs = vec![
        message("a", 0, "uno"),
        message("b", 0, "dos"),
        message("c", 0, "tres"),
        message("short", 0, "cuatro"),
    ];
    msgs[0].labels = Some(vec![r, r, r]);
    msgs[1].labels = Some(vec![n, n, n]);
    msgs[2].labels = Some(vec![r, r, r]);
    msgs[3].labels = Some(vec![r, n]);
    write_jsonl(&Corpus::new(msgs, "rated"), &raw).unwrap();
    let out = dir.path().join("v");
    let o = run(&["validate-labels", "--input", s(&raw), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(out.join("validation.json"));
    assert_eq!(report["n"], 3);
    assert_eq!(report["fleiss_kappa"], 1.0);
    assert_eq!(report["raw_agreement"], 1.0);
    assert!(report["rejects"].to_string().contains("short"));
    let labeled = fs::read_to_string(out.join("labeled.jsonl")).unwrap();
    assert_eq!(labeled.lines().count(), 3);
    assert!(labeled.contains("\"gold\":\"relevant\""));
}

#[test]
fn readme_configuration_parses() {
    let readme = fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../README.md")).unwrap();
    let start = readme.find("```toml\n").unwrap() + 8;
    let end = start + readme[start..].find("```").unwrap();
    let cfg = quakefilter::config::RunConfig::from_toml(&readme[start..end]).unwrap();
    cfg.validate().unwrap();
    assert_eq!(cfg.grid.dims, [100, 500, 1000, 2000]);
    assert_eq!(cfg.experiment().candidates(quakefilter::models::ModelKind::RandomForest, 0).len(), 3);
}
