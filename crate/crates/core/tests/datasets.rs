use std::path::PathBuf;

use argucast_core::datasets::*;
use argucast_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// Star strength computed directly from the closed form, independent of the
/// graph evaluator.
fn star_sigma(base: f64, pro: &[f64], con: &[f64]) -> f64 {
    let agg = |xs: &[f64]| 1.0 - xs.iter().map(|x| 1.0 - x).product::<f64>();
    let (sup, att) = (agg(pro), agg(con));
    if att > sup {
        base - base * (att - sup)
    } else {
        base + (1.0 - base) * (sup - att)
    }
}

#[test]
fn ten_record_fixture_matches_hand_counts() {
    let records = load_dataset(&fixture("ten_records.json")).unwrap();
    assert_eq!(records.len(), 10);
    let outcomes = score_records(&records, &ThresholdConfig::default(), 0.5).unwrap();
    let coherent: Vec<bool> = outcomes.iter().map(|o| o.coherent).collect();
    let correct: Vec<bool> = outcomes.iter().map(|o| o.correct).collect();
    assert_eq!(coherent, [true, false, true, false, true, false, true, true, true, true]);
    assert_eq!(correct, [true, true, true, false, true, true, false, false, true, false]);
    assert!((outcomes[8].sigma - 0.575).abs() < 1e-12);
    assert!((outcomes[9].sigma - 0.18).abs() < 1e-12);
    assert_eq!(outcomes[4].branch, Branch::AtThreshold);

    let r = accuracy_report(&records, &ThresholdConfig::default(), 0.5).unwrap();
    assert_eq!((r.total, r.correct, r.coherent_total, r.coherent_correct), (10, 6, 7, 4));
    assert_eq!(r.accuracy, Some(0.6));
    assert!((r.coherent_accuracy.unwrap() - 4.0 / 7.0).abs() < 1e-15);
    assert_eq!(r.retention, Some(0.7));
}

#[test]
fn report_table_is_stable() {
    let records = load_dataset(&fixture("ten_records.json")).unwrap();
    let r = accuracy_report(&records, &ThresholdConfig::default(), 0.5).unwrap();
    let expected = "\
fixture    Raw  Coherent
------------------------
N           10         7
Correct      6         4
Acc.       0.6  0.571429
Retention            0.7
";
    assert_eq!(render_report("fixture", &r), expected);
}

fn synthetic(n: usize, seed: u64) -> Vec<ForecastRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let bnk = rng.random_bool(0.5);
            let (np, nc) = if bnk {
                (rng.random_range(0..4), rng.random_range(0..4))
            } else {
                (1, 1)
            };
            let mut args = |k: usize| {
                (0..k)
                    .map(|j| GeneratedArgument {
                        text: format!("arg {j}"),
                        score: rng.random_range(0..=100) as f64 / 100.0,
                    })
                    .collect::<Vec<_>>()
            };
            let pro = args(np);
            let con = args(nc);
            ForecastRecord {
                question_id: format!("q{i:04}"),
                claim: format!("claim {i}"),
                prediction: rng.random_range(0..=100) as f64 / 100.0,
                resolution: Some(rng.random_bool(0.5)),
                breadth: if bnk { Breadth::Bnk } else { Breadth::B11 },
                pro,
                con,
            }
        })
        .collect()
}

#[test]
fn large_dataset_round_trips_and_recounts() {
    let records = synthetic(2923, 7);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("records.json");
    save_dataset(&path, &records).unwrap();
    let loaded = load_dataset(&path).unwrap();
    assert_eq!(loaded, records);

    let cfg = ThresholdConfig::default();
    let report = accuracy_report(&loaded, &cfg, 0.5).unwrap();
    let mut expect = (0u64, 0u64, 0u64, 0u64);
    for r in &records {
        let pro: Vec<f64> = r.pro.iter().map(|a| a.score).collect();
        let con: Vec<f64> = r.con.iter().map(|a| a.score).collect();
        let s = star_sigma(0.5, &pro, &con);
        let p = r.prediction;
        let coherent = if (s - 0.5).abs() <= 1e-9 {
            (p - 0.5).abs() <= 0.05 + 1e-12
        } else if s < 0.5 {
            p < 0.5
        } else {
            p > 0.5
        };
        let correct = (p > 0.5) == r.resolution.unwrap();
        expect.0 += 1;
        expect.1 += correct as u64;
        expect.2 += coherent as u64;
        expect.3 += (coherent && correct) as u64;
    }
    assert_eq!(
        (report.total, report.correct, report.coherent_total, report.coherent_correct),
        expect
    );
}

#[test]
fn unresolved_records_block_the_report() {
    let mut records = synthetic(3, 1);
    records[1].resolution = None;
    let err = accuracy_report(&records, &ThresholdConfig::default(), 0.5).unwrap_err();
    assert!(matches!(err, Error::Precondition(ref m) if m.contains("q0001")), "{err}");
}

#[test]
fn parse_errors_carry_locations() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        "[\n  {\"question_id\": \"q\", \"claim\": \"c\", \"prediction\": 1.5, \"resolution\": true,\n   \"breadth\": \"b11\", \"pro\": [], \"con\": []}\n]\n",
    )
    .unwrap();
    match load_dataset(&path).unwrap_err() {
        Error::Parse { line, message, .. } => {
            // The record closes on line 3; serde reports at the following token.
            assert_eq!(line, 4);
            assert!(message.contains("prediction"), "{message}");
        }
        other => panic!("unexpected {other}"),
    }
}

#[test]
fn debate_file_round_trips() {
    let mut acf = Acf::new();
    let id = |s: &str| ArgumentId::new(s).unwrap();
    acf.add_forecasting(Argument::new(id("f"), "Team X wins"));
    acf.add_regular(Argument::new(id("a"), "Star player injured"));
    acf.add_regular(Argument::new(id("b"), "Injury is minor"));
    acf.add_attack(id("a"), id("f"));
    acf.add_attack(id("b"), id("a"));
    let u = ForecasterId::new("alex").unwrap();
    acf.set_vote(u.clone(), id("a"), Some(Vote::Disagree));
    acf.set_vote(u.clone(), id("b"), Some(Vote::Agree));
    acf.set_prediction(u.clone(), id("f"), Some(0.7));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("debate.json");
    save_acf(&path, &acf).unwrap();
    let back = load_acf(&path).unwrap();
    assert_eq!(back, acf);
    let v = check_coherence(&back, &u, &ThresholdConfig::default(), &ForecastBase::default()).unwrap();
    assert_eq!(v, check_coherence(&acf, &u, &ThresholdConfig::default(), &ForecastBase::default()).unwrap());
    save_verdicts(&dir.path().join("v.json"), &v).unwrap();
    assert_eq!(load_verdicts(&dir.path().join("v.json")).unwrap(), v);
}

#[test]
fn invalid_debate_files_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("debate.json");
    std::fs::write(
        &path,
        r#"{"arguments": [{"id": "f", "kind": "forecasting"}, {"id": "a", "kind": "regular"}],
            "edges": [{"src": "f", "dst": "a", "polarity": "attack"}]}"#,
    )
    .unwrap();
    let err = load_acf(&path).unwrap_err();
    assert!(matches!(err, Error::Schema { .. }), "{err}");
}
