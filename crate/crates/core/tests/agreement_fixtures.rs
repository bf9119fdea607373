use quakefilter::agreement::{fleiss_kappa, icc_anova, raw_agreement, RatingMatrix};
use serde_json::Value;

fn fixture() -> Value {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/agreement.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn ratio(v: &Value) -> f64 {
    let s = v.as_str().unwrap();
    let (a, b) = s.split_once('/').unwrap();
    a.parse::<f64>().unwrap() / b.parse::<f64>().unwrap()
}

#[test]
fn fleiss_matches_hand_computation() {
    let f = &fixture()["fleiss"];
    let counts: Vec<Vec<usize>> = serde_json::from_value(f["counts"].clone()).unwrap();
    let cats: Vec<String> = serde_json::from_value(f["categories"].clone()).unwrap();
    let m = RatingMatrix::new(cats, counts).unwrap();
    assert_eq!(m.k, 3);
    assert!((raw_agreement(&m).unwrap() - ratio(&f["mean_agreement"])).abs() < 1e-12);
    let kappa = fleiss_kappa(&m).unwrap();
    assert!((kappa - ratio(&f["kappa"])).abs() < 1e-9);
    assert!((kappa - f["kappa_value"].as_f64().unwrap()).abs() < 1e-9);
}

#[test]
fn icc_matches_hand_anova() {
    let f = &fixture()["icc"];
    let ratings: Vec<Vec<f64>> = serde_json::from_value(f["ratings"].clone()).unwrap();
    let a = icc_anova(&ratings).unwrap();
    for (got, key) in [
        (a.ss_rows, "ss_rows"),
        (a.ss_cols, "ss_cols"),
        (a.ss_error, "ss_error"),
        (a.ms_rows, "ms_rows"),
        (a.ms_cols, "ms_cols"),
        (a.ms_error, "ms_error"),
        (a.icc, "icc"),
    ] {
        assert!((got - ratio(&f[key])).abs() < 1e-9, "{key}: {got}");
    }
    assert_eq!((a.df_rows, a.df_cols, a.df_error), (5, 2, 10));
    assert!((a.icc - f["icc_value"].as_f64().unwrap()).abs() < 1e-9);
}
