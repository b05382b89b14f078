use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{fmt_sig6, read_json, write_json};
use crate::coherence::{judge, Branch, ThresholdConfig};
use crate::error::{check_unit, Error, Result};
use crate::qbaf::{evaluate, Argument, ArgumentId, Qbaf};

/// Id of the root argument in a record's QBAF.
pub const CLAIM_ID: &str = "claim";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Breadth {
    /// One supporter and one attacker.
    B11,
    /// Any number of supporters and attackers.
    Bnk,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedArgument {
    pub text: String,
    /// Uncertainty score, used as the argument's base score.
    pub score: f64,
}

/// One resolved (or pending) forecasting claim with its generated
/// arguments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRecord")]
pub struct ForecastRecord {
    pub question_id: String,
    pub claim: String,
    pub prediction: f64,
    pub resolution: Option<bool>,
    pub breadth: Breadth,
    pub pro: Vec<GeneratedArgument>,
    pub con: Vec<GeneratedArgument>,
}

#[derive(Deserialize)]
struct RawRecord {
    question_id: String,
    claim: String,
    prediction: f64,
    resolution: Option<bool>,
    breadth: Breadth,
    pro: Vec<GeneratedArgument>,
    con: Vec<GeneratedArgument>,
}

impl TryFrom<RawRecord> for ForecastRecord {
    type Error = String;

    fn try_from(raw: RawRecord) -> std::result::Result<Self, String> {
        let record = ForecastRecord {
            question_id: raw.question_id,
            claim: raw.claim,
            prediction: raw.prediction,
            resolution: raw.resolution,
            breadth: raw.breadth,
            pro: raw.pro,
            con: raw.con,
        };
        record.check().map_err(|e| e.to_string())?;
        Ok(record)
    }
}

impl ForecastRecord {
    /// Checks ranges, the question id, and the one-pro-one-con rule for
    /// breadth (1,1) records.
    pub fn check(&self) -> Result<()> {
        ArgumentId::new(self.question_id.clone())?;
        check_unit(format!("prediction of `{}`", self.question_id), self.prediction)?;
        for (side, args) in [("pro", &self.pro), ("con", &self.con)] {
            for (i, a) in args.iter().enumerate() {
                check_unit(format!("{side}[{i}].score of `{}`", self.question_id), a.score)?;
            }
        }
        if self.breadth == Breadth::B11 && (self.pro.len() != 1 || self.con.len() != 1) {
            return Err(Error::Domain(format!(
                "record `{}` is b11 but has {} pro and {} con arguments",
                self.question_id,
                self.pro.len(),
                self.con.len()
            )));
        }
        Ok(())
    }
}

/// Star-shaped QBAF: the claim at the root, pro arguments supporting it and
/// con arguments attacking it, each weighted by its uncertainty score.
pub fn record_to_qbaf(rec: &ForecastRecord, forecast_base: f64) -> Result<Qbaf> {
    check_unit("forecast base score", forecast_base)?;
    let root = ArgumentId::new(CLAIM_ID).expect("static id");
    let mut q = Qbaf::new();
    q.add_argument(Argument::new(root.clone(), &rec.claim), forecast_base);
    for (prefix, args, support) in [("pro", &rec.pro, true), ("con", &rec.con, false)] {
        for (i, a) in args.iter().enumerate() {
            let score = check_unit(format!("{prefix}[{i}].score of `{}`", rec.question_id), a.score)?;
            let id = ArgumentId::new(format!("{prefix}{}", i + 1)).expect("generated id");
            q.add_argument(Argument::new(id.clone(), &a.text), score);
            if support {
                q.add_support(id, root.clone());
            } else {
                q.add_attack(id, root.clone());
            }
        }
    }
    Ok(q)
}

/// Per-record scoring used by [`accuracy_report`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordOutcome {
    pub question_id: String,
    pub sigma: f64,
    pub prediction: f64,
    pub branch: Branch,
    pub coherent: bool,
    pub correct: bool,
}

/// Raw and coherent tallies. Merging is associative, so chunks can be
/// tallied independently.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub total: u64,
    pub correct: u64,
    pub coherent_total: u64,
    pub coherent_correct: u64,
}

impl Tally {
    pub fn add(&mut self, outcome: &RecordOutcome) {
        self.total += 1;
        self.correct += u64::from(outcome.correct);
        if outcome.coherent {
            self.coherent_total += 1;
            self.coherent_correct += u64::from(outcome.correct);
        }
    }

    pub fn merge(self, other: Tally) -> Tally {
        Tally {
            total: self.total + other.total,
            correct: self.correct + other.correct,
            coherent_total: self.coherent_total + other.coherent_total,
            coherent_correct: self.coherent_correct + other.coherent_correct,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub total: u64,
    pub correct: u64,
    pub coherent_total: u64,
    pub coherent_correct: u64,
    pub accuracy: Option<f64>,
    pub coherent_accuracy: Option<f64>,
    pub retention: Option<f64>,
}

impl From<Tally> for AccuracyReport {
    fn from(t: Tally) -> Self {
        let ratio = |num: u64, den: u64| (den > 0).then(|| num as f64 / den as f64);
        AccuracyReport {
            total: t.total,
            correct: t.correct,
            coherent_total: t.coherent_total,
            coherent_correct: t.coherent_correct,
            accuracy: ratio(t.correct, t.total),
            coherent_accuracy: ratio(t.coherent_correct, t.coherent_total),
            retention: ratio(t.coherent_total, t.total),
        }
    }
}

/// Scores every record: correctness by the `p > 0.5` rule against its
/// resolution, coherence of `(sigma(claim), p)` under `cfg`.
pub fn score_records(records: &[ForecastRecord], cfg: &ThresholdConfig, forecast_base: f64) -> Result<Vec<RecordOutcome>> {
    cfg.validate()?;
    let unresolved: Vec<&str> = records
        .iter()
        .filter(|r| r.resolution.is_none())
        .map(|r| r.question_id.as_str())
        .collect();
    if !unresolved.is_empty() {
        return Err(Error::Precondition(format!("unresolved records: {}", unresolved.join(", "))));
    }
    let root = ArgumentId::new(CLAIM_ID).expect("static id");
    records
        .iter()
        .map(|rec| {
            let sigma = evaluate(&record_to_qbaf(rec, forecast_base)?)?
                .get(&root)
                .expect("claim strength");
            let (xi1, xi2) = match ArgumentId::new(rec.question_id.clone()) {
                Ok(q) => (cfg.xi1.get(&q), cfg.xi2.get(&q)),
                Err(_) => (cfg.xi1.default, cfg.xi2.default),
            };
            let (branch, coherent) = judge(sigma, Some(rec.prediction), xi1, xi2, cfg.epsilon, cfg.sigma_eq_tol);
            let resolution = rec.resolution.expect("checked above");
            Ok(RecordOutcome {
                question_id: rec.question_id.clone(),
                sigma,
                prediction: rec.prediction,
                branch,
                coherent,
                correct: (rec.prediction > 0.5) == resolution,
            })
        })
        .collect()
}

pub fn accuracy_report(records: &[ForecastRecord], cfg: &ThresholdConfig, forecast_base: f64) -> Result<AccuracyReport> {
    let tally = score_records(records, cfg, forecast_base)?
        .iter()
        .fold(Tally::default(), |mut t, o| {
            t.add(o);
            t
        });
    Ok(tally.into())
}

/// Plain-text table with raw and coherent accuracy columns.
pub fn render_report(label: &str, report: &AccuracyReport) -> String {
    let opt = |x: Option<f64>| x.map_or_else(|| "-".to_string(), fmt_sig6);
    let rows = [
        ("", "Raw", "Coherent"),
        (
            "N",
            &*report.total.to_string(),
            &*report.coherent_total.to_string(),
        ),
        (
            "Correct",
            &*report.correct.to_string(),
            &*report.coherent_correct.to_string(),
        ),
        ("Acc.", &*opt(report.accuracy), &*opt(report.coherent_accuracy)),
        ("Retention", "", &*opt(report.retention)),
    ]
    .map(|(a, b, c)| (a.to_string(), b.to_string(), c.to_string()));
    let w0 = rows.iter().map(|r| r.0.len()).max().unwrap_or(0).max(label.len());
    let w1 = rows.iter().map(|r| r.1.len()).max().unwrap_or(0);
    let w2 = rows.iter().map(|r| r.2.len()).max().unwrap_or(0);
    let mut out = String::new();
    for (i, (a, b, c)) in rows.iter().enumerate() {
        let a = if i == 0 { label } else { a.as_str() };
        writeln!(out, "{a:<w0$}  {b:>w1$}  {c:>w2$}").expect("write to string");
        if i == 0 {
            writeln!(out, "{}", "-".repeat(w0 + w1 + w2 + 4)).expect("write to string");
        }
    }
    out
}

pub fn load_dataset(path: &Path) -> Result<Vec<ForecastRecord>> {
    read_json(path)
}

pub fn save_dataset(path: &Path, records: &[ForecastRecord]) -> Result<()> {
    write_json(path, &records)
}
