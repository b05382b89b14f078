//! File formats and batch analysis.
//!
//! Everything on disk is UTF-8 JSON. Datasets are a top-level array of
//! [`ForecastRecord`]s; debates use [`DebateDocument`].

mod client;
mod document;
mod records;

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

pub use client::{MockClient, ReplayClient, TextCompletionClient};
pub use document::{
    load_acf, load_templates, load_verdicts, save_acf, save_templates, save_verdicts, ArgumentRecord,
    DebateDocument, PredictionRecord, VoteRecord,
};
pub use records::{
    accuracy_report, load_dataset, record_to_qbaf, render_report, save_dataset, score_records, AccuracyReport,
    Breadth, ForecastRecord, GeneratedArgument, RecordOutcome, Tally, CLAIM_ID,
};

use crate::error::{Error, Result};

/// Reads and deserializes a JSON file, reporting parse failures with their
/// line and column.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    from_json_str(path, &text)
}

pub(crate) fn from_json_str<T: DeserializeOwned>(path: &Path, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: strip_position(&e.to_string()),
    })
}

fn strip_position(message: &str) -> String {
    match message.rfind(" at line ") {
        Some(i) => message[..i].to_string(),
        None => message.to_string(),
    }
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json_string(value)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Formats a number with six significant digits, switching to exponent
/// notation for very small or very large magnitudes.
pub fn fmt_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        format!("{}e{exp}", trim_zeros(mantissa))
    } else {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
