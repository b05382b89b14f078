use std::path::PathBuf;

use thiserror::Error;

use crate::qbaf::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A numeric input fell outside the interval its operation accepts.
    #[error("{what} = {value} is outside {interval}")]
    OutOfRange {
        what: String,
        value: f64,
        interval: &'static str,
    },

    #[error("invalid identifier {0:?}: must be nonempty and free of control characters")]
    InvalidId(String),

    #[error("cyclic graph: {}", .0.join(" -> "))]
    Cycle(Vec<String>),

    #[error("{} invariant violation(s): {}", .0.len(), summarize(.0))]
    Invalid(Vec<Violation>),

    #[error("unknown {kind} `{id}`")]
    NotFound { kind: &'static str, id: String },

    #[error("{0}")]
    Domain(String),

    #[error("unsupported debate shape: {0}")]
    UnsupportedShape(String),

    #[error("cannot generate variant: {0}")]
    Generation(String),

    #[error("test undefined: {0}")]
    UndefinedTest(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("{}:{line}:{column}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{}: {message}", path.display())]
    Schema { path: PathBuf, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("client: {0}")]
    Client(String),
}

fn summarize(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

pub(crate) fn check_unit(what: impl Into<String>, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::OutOfRange {
            what: what.into(),
            value,
            interval: "[0, 1]",
        })
    }
}
