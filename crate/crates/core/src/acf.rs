//! Forecasting debates (ArguCast frameworks) and per-forecaster QBAFs.
//!
//! An [`Acf`] separates forecasting arguments (the claims being predicted)
//! from the regular arguments that attack or support them, and records each
//! forecaster's votes and predictions. [`derive_forecaster_qbaf`] turns the
//! debate into one forecaster's personal QBAF: relations around disagreed
//! arguments change stance, and base scores follow the forecaster's votes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_unit, Error, Result};
use crate::qbaf::{
    evaluate, topological_order, validate_edges, Argument, ArgumentId, Edge, Polarity, Qbaf,
    StrengthMap, Violation, ViolationKind,
};

/// Base score of a regular argument the forecaster agreed or disagreed with.
pub const VOTED_BASE_SCORE: f64 = 0.5;
/// Base score of a regular argument the forecaster was unsure about or
/// never voted on.
pub const SILENT_BASE_SCORE: f64 = 0.0;
/// Base score of forecasting arguments unless overridden.
pub const DEFAULT_FORECAST_BASE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ForecasterId(String);

impl ForecasterId {
    pub fn new(id: impl Into<String>) -> Result<Self> {
        let id = id.into();
        if id.is_empty() || id.chars().any(char::is_control) {
            return Err(Error::InvalidId(id));
        }
        Ok(Self(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for ForecasterId {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        Self::new(value)
    }
}

impl From<ForecasterId> for String {
    fn from(id: ForecasterId) -> Self {
        id.0
    }
}

impl fmt::Display for ForecasterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A recorded vote. A missing record is the undefined vote.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Vote {
    #[serde(rename = "+")]
    Agree,
    #[serde(rename = "-")]
    Disagree,
    #[serde(rename = "?")]
    Unsure,
}

impl Vote {
    pub fn symbol(self) -> &'static str {
        match self {
            Vote::Agree => "+",
            Vote::Disagree => "-",
            Vote::Unsure => "?",
        }
    }
}

impl fmt::Display for Vote {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArgumentKind {
    Forecasting,
    Regular,
}

/// A per-argument real value with a fallback default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerArgument {
    pub default: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub overrides: BTreeMap<ArgumentId, f64>,
}

impl PerArgument {
    pub fn constant(default: f64) -> Self {
        Self {
            default,
            overrides: BTreeMap::new(),
        }
    }

    pub fn with(mut self, id: ArgumentId, value: f64) -> Self {
        self.overrides.insert(id, value);
        self
    }

    pub fn get(&self, id: &ArgumentId) -> f64 {
        self.overrides.get(id).copied().unwrap_or(self.default)
    }

    pub(crate) fn values(&self) -> impl Iterator<Item = (Option<&ArgumentId>, f64)> {
        std::iter::once((None, self.default)).chain(self.overrides.iter().map(|(k, v)| (Some(k), *v)))
    }
}

/// Base scores for forecasting arguments; 0.5 unless overridden.
pub type ForecastBase = PerArgument;

impl Default for PerArgument {
    fn default() -> Self {
        Self::constant(DEFAULT_FORECAST_BASE)
    }
}

/// A forecasting debate: arguments, relations, forecasters, votes and
/// predictions. Mutators record data as given; [`validate_acf`] checks it.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Acf {
    arguments: Vec<(Argument, ArgumentKind)>,
    edges: Vec<Edge>,
    forecasters: BTreeSet<ForecasterId>,
    votes: BTreeMap<ForecasterId, BTreeMap<ArgumentId, Vote>>,
    predictions: BTreeMap<ForecasterId, BTreeMap<ArgumentId, f64>>,
}

impl Acf {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_forecasting(&mut self, argument: Argument) -> &mut Self {
        self.arguments.push((argument, ArgumentKind::Forecasting));
        self
    }

    pub fn add_regular(&mut self, argument: Argument) -> &mut Self {
        self.arguments.push((argument, ArgumentKind::Regular));
        self
    }

    pub fn add_edge(&mut self, edge: Edge) -> &mut Self {
        self.edges.push(edge);
        self
    }

    pub fn add_attack(&mut self, src: ArgumentId, dst: ArgumentId) -> &mut Self {
        self.add_edge(Edge::new(src, dst, Polarity::Attack))
    }

    pub fn add_support(&mut self, src: ArgumentId, dst: ArgumentId) -> &mut Self {
        self.add_edge(Edge::new(src, dst, Polarity::Support))
    }

    pub fn add_forecaster(&mut self, u: ForecasterId) -> &mut Self {
        self.forecasters.insert(u);
        self
    }

    /// Records (or with `None`, erases) a vote. Last write wins.
    pub fn set_vote(&mut self, u: ForecasterId, arg: ArgumentId, vote: Option<Vote>) -> &mut Self {
        self.forecasters.insert(u.clone());
        let votes = self.votes.entry(u.clone()).or_default();
        match vote {
            Some(v) => {
                votes.insert(arg, v);
            }
            None => {
                votes.remove(&arg);
                if votes.is_empty() {
                    self.votes.remove(&u);
                }
            }
        }
        self
    }

    pub fn set_prediction(&mut self, u: ForecasterId, arg: ArgumentId, p: Option<f64>) -> &mut Self {
        self.forecasters.insert(u.clone());
        let preds = self.predictions.entry(u.clone()).or_default();
        match p {
            Some(p) => {
                preds.insert(arg, p);
            }
            None => {
                preds.remove(&arg);
                if preds.is_empty() {
                    self.predictions.remove(&u);
                }
            }
        }
        self
    }

    pub fn arguments(&self) -> impl Iterator<Item = (&Argument, ArgumentKind)> {
        self.arguments.iter().map(|(a, k)| (a, *k))
    }

    pub fn forecasting_args(&self) -> impl Iterator<Item = &Argument> {
        self.arguments
            .iter()
            .filter(|(_, k)| *k == ArgumentKind::Forecasting)
            .map(|(a, _)| a)
    }

    pub fn regular_args(&self) -> impl Iterator<Item = &Argument> {
        self.arguments
            .iter()
            .filter(|(_, k)| *k == ArgumentKind::Regular)
            .map(|(a, _)| a)
    }

    pub fn argument(&self, id: &ArgumentId) -> Option<(&Argument, ArgumentKind)> {
        self.arguments().find(|(a, _)| &a.id == id)
    }

    pub fn kind_of(&self, id: &ArgumentId) -> Option<ArgumentKind> {
        self.argument(id).map(|(_, k)| k)
    }

    pub fn is_forecasting(&self, id: &ArgumentId) -> bool {
        self.kind_of(id) == Some(ArgumentKind::Forecasting)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn forecasters(&self) -> &BTreeSet<ForecasterId> {
        &self.forecasters
    }

    pub fn has_forecaster(&self, u: &ForecasterId) -> bool {
        self.forecasters.contains(u)
    }

    /// The vote as recorded, including any (invalid) vote on a forecasting
    /// argument.
    pub fn recorded_vote(&self, u: &ForecasterId, arg: &ArgumentId) -> Option<Vote> {
        self.votes.get(u).and_then(|m| m.get(arg)).copied()
    }

    /// The vote as the semantics sees it: forecasting arguments are never
    /// voted on.
    pub fn vote(&self, u: &ForecasterId, arg: &ArgumentId) -> Option<Vote> {
        if self.is_forecasting(arg) {
            None
        } else {
            self.recorded_vote(u, arg)
        }
    }

    pub fn votes(&self) -> impl Iterator<Item = (&ForecasterId, &ArgumentId, Vote)> {
        self.votes
            .iter()
            .flat_map(|(u, m)| m.iter().map(move |(a, v)| (u, a, *v)))
    }

    pub fn prediction(&self, u: &ForecasterId, f: &ArgumentId) -> Option<f64> {
        self.predictions.get(u).and_then(|m| m.get(f)).copied()
    }

    pub fn predictions(&self) -> impl Iterator<Item = (&ForecasterId, &ArgumentId, f64)> {
        self.predictions
            .iter()
            .flat_map(|(u, m)| m.iter().map(move |(a, p)| (u, a, *p)))
    }

    /// Attackers and supporters of `target`, in edge order.
    pub fn children_of(&self, target: &ArgumentId) -> (Vec<&ArgumentId>, Vec<&ArgumentId>) {
        let mut attackers = Vec::new();
        let mut supporters = Vec::new();
        for edge in self.edges.iter().filter(|e| &e.dst == target) {
            match edge.polarity {
                Polarity::Attack => attackers.push(&edge.src),
                Polarity::Support => supporters.push(&edge.src),
            }
        }
        (attackers, supporters)
    }
}

/// What happened to an original relation in a forecaster's QBAF.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EdgeProvenance {
    Kept,
    Flipped,
    Dropped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub original: Edge,
    pub provenance: EdgeProvenance,
    /// Polarity in the forecaster QBAF; absent for dropped edges.
    pub stance: Option<Polarity>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecasterQbaf {
    pub forecaster: ForecasterId,
    pub qbaf: Qbaf,
    pub provenance: Vec<EdgeRecord>,
}

/// The stance rule for one relation given the votes on its source and
/// target. `None` means no clause admits the relation.
pub fn stance(polarity: Polarity, source_vote: Option<Vote>, target_vote: Option<Vote>) -> Option<(Polarity, EdgeProvenance)> {
    let disagreed = |v: Option<Vote>| v == Some(Vote::Disagree);
    if source_vote == target_vote || (!disagreed(source_vote) && !disagreed(target_vote)) {
        Some((polarity, EdgeProvenance::Kept))
    } else if disagreed(source_vote) && !disagreed(target_vote) {
        Some((polarity.flipped(), EdgeProvenance::Flipped))
    } else {
        None
    }
}

/// Builds forecaster `u`'s QBAF from the debate.
pub fn derive_forecaster_qbaf(acf: &Acf, u: &ForecasterId, forecast_base: &ForecastBase) -> Result<ForecasterQbaf> {
    if !acf.has_forecaster(u) {
        return Err(Error::NotFound {
            kind: "forecaster",
            id: u.to_string(),
        });
    }
    ensure_structure(acf)?;

    let mut qbaf = Qbaf::new();
    for (arg, kind) in acf.arguments() {
        let base = match kind {
            ArgumentKind::Forecasting => {
                check_unit(format!("forecast base score of {}", arg.id), forecast_base.get(&arg.id))?
            }
            ArgumentKind::Regular => match acf.vote(u, &arg.id) {
                Some(Vote::Agree | Vote::Disagree) => VOTED_BASE_SCORE,
                Some(Vote::Unsure) | None => SILENT_BASE_SCORE,
            },
        };
        qbaf.add_argument(arg.clone(), base);
    }

    let mut provenance = Vec::with_capacity(acf.edges().len());
    for edge in acf.edges() {
        let decided = stance(edge.polarity, acf.vote(u, &edge.src), acf.vote(u, &edge.dst));
        match decided {
            Some((polarity, how)) => {
                qbaf.add_edge(Edge::new(edge.src.clone(), edge.dst.clone(), polarity));
                provenance.push(EdgeRecord {
                    original: edge.clone(),
                    provenance: how,
                    stance: Some(polarity),
                });
            }
            None => provenance.push(EdgeRecord {
                original: edge.clone(),
                provenance: EdgeProvenance::Dropped,
                stance: None,
            }),
        }
    }

    Ok(ForecasterQbaf {
        forecaster: u.clone(),
        qbaf,
        provenance,
    })
}

/// DF-QuAD strengths of forecaster `u`'s QBAF.
pub fn forecaster_strengths(acf: &Acf, u: &ForecasterId, forecast_base: &ForecastBase) -> Result<StrengthMap> {
    evaluate(&derive_forecaster_qbaf(acf, u, forecast_base)?.qbaf)
}

/// Structural checks needed before derivation. Vote and prediction problems
/// do not block it.
fn ensure_structure(acf: &Acf) -> Result<()> {
    let violations = validate_acf(acf);
    if let Some(cycle) = violations.iter().find(|v| v.kind == ViolationKind::Cycle) {
        return Err(Error::Cycle(cycle.ids.clone()));
    }
    let blocking: Vec<Violation> = violations
        .into_iter()
        .filter(|v| {
            !matches!(
                v.kind,
                ViolationKind::VoteOnForecasting
                    | ViolationKind::VoteOnUnknown
                    | ViolationKind::PredictionOnNonForecasting
                    | ViolationKind::PredictionOutOfRange
            )
        })
        .collect();
    if blocking.is_empty() {
        Ok(())
    } else {
        Err(Error::Invalid(blocking))
    }
}

/// Lists every debate invariant the framework breaks.
pub fn validate_acf(acf: &Acf) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut known: BTreeMap<&ArgumentId, ArgumentKind> = BTreeMap::new();
    for (arg, kind) in acf.arguments() {
        match known.get(&arg.id) {
            Some(&prev) if prev != kind => out.push(Violation::new(
                ViolationKind::ForecastingOverlap,
                vec![arg.id.to_string()],
                "",
            )),
            Some(_) => out.push(Violation::new(
                ViolationKind::DuplicateArgument,
                vec![arg.id.to_string()],
                "",
            )),
            None => {
                known.insert(&arg.id, kind);
            }
        }
    }
    if acf.forecasting_args().next().is_none() {
        out.push(Violation::new(ViolationKind::NoForecastingArgument, vec![], ""));
    }

    let ids: BTreeSet<&ArgumentId> = known.keys().copied().collect();
    out.extend(validate_edges(&ids, acf.edges()));
    for edge in acf.edges() {
        if known.get(&edge.src) == Some(&ArgumentKind::Forecasting) {
            out.push(Violation::new(
                ViolationKind::ForecastingSource,
                vec![edge.src.to_string(), edge.dst.to_string()],
                format!("{} edge sourced at forecasting argument {}", edge.polarity, edge.src),
            ));
        }
    }

    for (u, arg, vote) in acf.votes() {
        match known.get(arg) {
            None => out.push(Violation::new(
                ViolationKind::VoteOnUnknown,
                vec![u.to_string(), arg.to_string()],
                "",
            )),
            Some(ArgumentKind::Forecasting) => out.push(Violation::new(
                ViolationKind::VoteOnForecasting,
                vec![u.to_string(), arg.to_string()],
                format!("vote {vote}"),
            )),
            Some(ArgumentKind::Regular) => {}
        }
    }
    for (u, arg, p) in acf.predictions() {
        if known.get(arg) != Some(&ArgumentKind::Forecasting) {
            out.push(Violation::new(
                ViolationKind::PredictionOnNonForecasting,
                vec![u.to_string(), arg.to_string()],
                "",
            ));
        }
        if !(0.0..=1.0).contains(&p) {
            out.push(Violation::new(
                ViolationKind::PredictionOutOfRange,
                vec![u.to_string(), arg.to_string()],
                format!("prediction {p} is outside [0, 1]"),
            ));
        }
    }

    let structural_ok = !out.iter().any(|v| {
        matches!(
            v.kind,
            ViolationKind::UnknownEndpoint | ViolationKind::DuplicateArgument | ViolationKind::ForecastingOverlap
        )
    });
    if structural_ok {
        if let Err(cycle) = topological_order(acf.arguments().map(|(a, _)| &a.id), acf.edges()) {
            out.push(Violation::new(
                ViolationKind::Cycle,
                cycle.iter().map(ToString::to_string).collect(),
                "",
            ));
        }
    }
    out
}
