//! Argumentative coherence for judgmental forecasting.
//!
//! Forecasters debate a question by adding arguments that attack or support
//! it and voting on each other's arguments. Each forecaster's votes induce a
//! personal quantitative bipolar argumentation framework whose DF-QuAD
//! strength for the question is compared against their numeric prediction;
//! only coherent predictions enter the group forecast.
//!
//! - [`qbaf`]: graphs and DF-QuAD evaluation
//! - [`acf`]: debates and per-forecaster graphs
//! - [`coherence`]: the coherence check and raw vs. coherent aggregation
//! - [`variants`]: complexity classification and variant generation
//! - [`datasets`]: file formats, LLM-forecast records, accuracy reports
//! - [`stats`]: McNemar's test, complexity means, Welch's t-test

pub mod acf;
pub mod coherence;
pub mod datasets;
pub mod error;
pub mod qbaf;
pub mod stats;
pub mod variants;

pub use acf::{
    derive_forecaster_qbaf, forecaster_strengths, validate_acf, Acf, ArgumentKind, EdgeProvenance, ForecastBase,
    ForecasterId, ForecasterQbaf, PerArgument, Vote,
};
pub use coherence::{
    aggregate_forecast, check_coherence, forecaster_is_coherent, Branch, CoherenceVerdict, ForecastSummary,
    ThresholdConfig,
};
pub use error::{Error, Result};
pub use qbaf::{aggregate, combine, evaluate, validate, Argument, ArgumentId, Edge, Polarity, Qbaf, StrengthMap};
