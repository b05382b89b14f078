//! Quantitative bipolar argumentation frameworks and DF-QuAD strengths.
//!
//! A [`Qbaf`] holds arguments with base scores plus attack and support
//! edges. [`evaluate`] propagates strengths from the leaves upwards in
//! topological order: each argument's strength is [`combine`] applied to its
//! base score and the [`aggregate`] of its attackers' and supporters'
//! strengths. Any acyclic graph is accepted; cycles are rejected.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_unit, Error, Result};

/// Opaque argument identifier: nonempty, no control characters.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ArgumentId(String);

impl ArgumentId {
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

impl TryFrom<String> for ArgumentId {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        Self::new(value)
    }
}

impl From<ArgumentId> for String {
    fn from(id: ArgumentId) -> Self {
        id.0
    }
}

impl fmt::Display for ArgumentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Argument {
    pub id: ArgumentId,
    #[serde(default)]
    pub text: String,
}

impl Argument {
    pub fn new(id: ArgumentId, text: impl Into<String>) -> Self {
        Self {
            id,
            text: text.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Attack,
    Support,
}

impl Polarity {
    pub fn flipped(self) -> Self {
        match self {
            Polarity::Attack => Polarity::Support,
            Polarity::Support => Polarity::Attack,
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarity::Attack => "attack",
            Polarity::Support => "support",
        })
    }
}

/// A directed relation: `src` attacks or supports `dst`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub src: ArgumentId,
    pub dst: ArgumentId,
    pub polarity: Polarity,
}

impl Edge {
    pub fn new(src: ArgumentId, dst: ArgumentId, polarity: Polarity) -> Self {
        Self { src, dst, polarity }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    DuplicateArgument,
    UnknownEndpoint,
    SelfEdge,
    DuplicateEdge,
    AttackSupportOverlap,
    MissingBaseScore,
    BaseScoreOutOfRange,
    OrphanBaseScore,
    Cycle,
    // Debate-level invariants.
    ForecastingOverlap,
    NoForecastingArgument,
    ForecastingSource,
    VoteOnForecasting,
    VoteOnUnknown,
    PredictionOnNonForecasting,
    PredictionOutOfRange,
    UnknownForecaster,
}

impl ViolationKind {
    /// The invariant the violation breaks, in words.
    pub fn invariant(self) -> &'static str {
        match self {
            ViolationKind::DuplicateArgument => "argument ids are unique",
            ViolationKind::UnknownEndpoint => "every edge endpoint names an argument",
            ViolationKind::SelfEdge => "no argument attacks or supports itself",
            ViolationKind::DuplicateEdge => "at most one edge per ordered pair",
            ViolationKind::AttackSupportOverlap => "attacks and supports are disjoint",
            ViolationKind::MissingBaseScore => "every argument has a base score",
            ViolationKind::BaseScoreOutOfRange => "base scores lie in [0, 1]",
            ViolationKind::OrphanBaseScore => "base scores only name known arguments",
            ViolationKind::Cycle => "the edge relation is acyclic",
            ViolationKind::ForecastingOverlap => {
                "forecasting and non-forecasting arguments are disjoint"
            }
            ViolationKind::NoForecastingArgument => "at least one forecasting argument",
            ViolationKind::ForecastingSource => "ℛ ⊆ 𝒟×𝒳: forecasting arguments never attack or support",
            ViolationKind::VoteOnForecasting => "votes attach only to non-forecasting arguments",
            ViolationKind::VoteOnUnknown => "votes name known arguments",
            ViolationKind::PredictionOnNonForecasting => {
                "predictions attach only to forecasting arguments"
            }
            ViolationKind::PredictionOutOfRange => "predictions lie in [0, 1]",
            ViolationKind::UnknownForecaster => "votes and predictions name known forecasters",
        }
    }
}

/// One broken invariant with the identifiers involved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub invariant: String,
    pub ids: Vec<String>,
    pub detail: String,
}

impl Violation {
    pub fn new(kind: ViolationKind, ids: Vec<String>, detail: impl Into<String>) -> Self {
        Self {
            kind,
            invariant: kind.invariant().to_string(),
            ids,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}]", self.invariant, self.ids.join(", "))?;
        if !self.detail.is_empty() {
            write!(f, ": {}", self.detail)?;
        }
        Ok(())
    }
}

/// Arguments, base scores and bipolar edges.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Qbaf {
    arguments: Vec<Argument>,
    base_scores: BTreeMap<ArgumentId, f64>,
    edges: Vec<Edge>,
}

impl Qbaf {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds an argument with its base score. Nothing is checked here; see
    /// [`validate`].
    pub fn add_argument(&mut self, argument: Argument, base_score: f64) -> &mut Self {
        self.base_scores.insert(argument.id.clone(), base_score);
        self.arguments.push(argument);
        self
    }

    pub fn set_base_score(&mut self, id: ArgumentId, base_score: f64) -> &mut Self {
        self.base_scores.insert(id, base_score);
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

    pub fn arguments(&self) -> &[Argument] {
        &self.arguments
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn base_score(&self, id: &ArgumentId) -> Option<f64> {
        self.base_scores.get(id).copied()
    }

    pub fn base_scores(&self) -> &BTreeMap<ArgumentId, f64> {
        &self.base_scores
    }

    pub fn contains(&self, id: &ArgumentId) -> bool {
        self.arguments.iter().any(|a| &a.id == id)
    }

    pub fn attacks(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(|e| e.polarity == Polarity::Attack)
    }

    pub fn supports(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(|e| e.polarity == Polarity::Support)
    }
}

/// Final strengths, one per argument of the evaluated graph.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StrengthMap(BTreeMap<ArgumentId, f64>);

impl StrengthMap {
    pub fn get(&self, id: &ArgumentId) -> Option<f64> {
        self.0.get(id).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ArgumentId, f64)> {
        self.0.iter().map(|(k, v)| (k, *v))
    }
}

/// DF-QuAD aggregation: `0` for no children, else `1 - Π(1 - v)`.
pub fn aggregate(strengths: &[f64]) -> Result<f64> {
    let mut remaining = 1.0;
    for (i, &v) in strengths.iter().enumerate() {
        check_unit(format!("child strength #{i}"), v)?;
        remaining *= 1.0 - v;
    }
    Ok((1.0 - remaining).clamp(0.0, 1.0))
}

/// DF-QuAD combination of a base score with aggregated attack and support.
pub fn combine(base: f64, attack: f64, support: f64) -> Result<f64> {
    check_unit("base score", base)?;
    check_unit("aggregated attack", attack)?;
    check_unit("aggregated support", support)?;
    let value = if attack == support {
        base
    } else if attack > support {
        base - base * (support - attack).abs()
    } else {
        base + (1.0 - base) * (support - attack).abs()
    };
    Ok(value.clamp(0.0, 1.0))
}

/// Lists every invariant the graph breaks; empty when the graph is valid.
pub fn validate(qbaf: &Qbaf) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut known = BTreeSet::new();
    for arg in &qbaf.arguments {
        if !known.insert(&arg.id) {
            out.push(Violation::new(
                ViolationKind::DuplicateArgument,
                vec![arg.id.to_string()],
                "",
            ));
        }
    }
    for arg in &qbaf.arguments {
        match qbaf.base_scores.get(&arg.id) {
            None => out.push(Violation::new(
                ViolationKind::MissingBaseScore,
                vec![arg.id.to_string()],
                "",
            )),
            Some(&v) if !(0.0..=1.0).contains(&v) => out.push(Violation::new(
                ViolationKind::BaseScoreOutOfRange,
                vec![arg.id.to_string()],
                format!("base score {v} is outside [0, 1]"),
            )),
            Some(_) => {}
        }
    }
    for id in qbaf.base_scores.keys() {
        if !known.contains(id) {
            out.push(Violation::new(
                ViolationKind::OrphanBaseScore,
                vec![id.to_string()],
                "",
            ));
        }
    }
    out.extend(validate_edges(&known, &qbaf.edges));
    if out.is_empty() {
        if let Some(cycle) = find_cycle(qbaf.arguments.iter().map(|a| &a.id), &qbaf.edges) {
            out.push(Violation::new(
                ViolationKind::Cycle,
                cycle.iter().map(ToString::to_string).collect(),
                "",
            ));
        }
    }
    out
}

/// Edge-level checks shared by graph and debate validation.
pub(crate) fn validate_edges(known: &BTreeSet<&ArgumentId>, edges: &[Edge]) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen: HashMap<(&ArgumentId, &ArgumentId), Polarity> = HashMap::new();
    for edge in edges {
        for end in [&edge.src, &edge.dst] {
            if !known.contains(end) {
                out.push(Violation::new(
                    ViolationKind::UnknownEndpoint,
                    vec![end.to_string()],
                    format!("edge {} -> {}", edge.src, edge.dst),
                ));
            }
        }
        if edge.src == edge.dst {
            out.push(Violation::new(
                ViolationKind::SelfEdge,
                vec![edge.src.to_string()],
                "",
            ));
        }
        match seen.get(&(&edge.src, &edge.dst)) {
            Some(&p) if p == edge.polarity => out.push(Violation::new(
                ViolationKind::DuplicateEdge,
                vec![edge.src.to_string(), edge.dst.to_string()],
                format!("repeated {}", edge.polarity),
            )),
            Some(_) => out.push(Violation::new(
                ViolationKind::AttackSupportOverlap,
                vec![edge.src.to_string(), edge.dst.to_string()],
                "",
            )),
            None => {
                seen.insert((&edge.src, &edge.dst), edge.polarity);
            }
        }
    }
    out
}

/// Topological order over `ids` (sources before targets), or the ids of one
/// cycle. Edges touching unknown ids are ignored.
pub(crate) fn topological_order<'a>(
    ids: impl IntoIterator<Item = &'a ArgumentId>,
    edges: &'a [Edge],
) -> std::result::Result<Vec<&'a ArgumentId>, Vec<ArgumentId>> {
    let ids: Vec<&ArgumentId> = ids.into_iter().collect();
    let index: HashMap<&ArgumentId, usize> = ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
    let mut indegree = vec![0usize; ids.len()];
    let mut outgoing: Vec<Vec<usize>> = vec![Vec::new(); ids.len()];
    let mut incoming: Vec<Vec<usize>> = vec![Vec::new(); ids.len()];
    for edge in edges {
        if let (Some(&s), Some(&d)) = (index.get(&edge.src), index.get(&edge.dst)) {
            outgoing[s].push(d);
            incoming[d].push(s);
            indegree[d] += 1;
        }
    }
    let mut queue: VecDeque<usize> = (0..ids.len()).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(ids.len());
    while let Some(i) = queue.pop_front() {
        order.push(ids[i]);
        for &d in &outgoing[i] {
            indegree[d] -= 1;
            if indegree[d] == 0 {
                queue.push_back(d);
            }
        }
    }
    if order.len() == ids.len() {
        return Ok(order);
    }
    // Every unprocessed node has an unprocessed predecessor, so walking
    // predecessors must revisit a node.
    let mut visited: HashMap<usize, usize> = HashMap::new();
    let mut path = Vec::new();
    let mut current = (0..ids.len()).find(|&i| indegree[i] > 0).expect("unprocessed node");
    loop {
        if let Some(&pos) = visited.get(&current) {
            let mut cycle: Vec<ArgumentId> = path[pos..].iter().map(|&i: &usize| ids[i].clone()).collect();
            cycle.reverse();
            cycle.push(cycle[0].clone());
            return Err(cycle);
        }
        visited.insert(current, path.len());
        path.push(current);
        current = *incoming[current]
            .iter()
            .find(|&&p| indegree[p] > 0)
            .expect("unprocessed predecessor");
    }
}

pub(crate) fn find_cycle<'a>(
    ids: impl IntoIterator<Item = &'a ArgumentId>,
    edges: &'a [Edge],
) -> Option<Vec<ArgumentId>> {
    topological_order(ids, edges).err()
}

/// Computes every argument's DF-QuAD strength.
pub fn evaluate(qbaf: &Qbaf) -> Result<StrengthMap> {
    let violations: Vec<Violation> = validate(qbaf)
        .into_iter()
        .filter(|v| v.kind != ViolationKind::Cycle)
        .collect();
    if !violations.is_empty() {
        return Err(Error::Invalid(violations));
    }
    let order = topological_order(qbaf.arguments.iter().map(|a| &a.id), &qbaf.edges)
        .map_err(|cycle| Error::Cycle(cycle.iter().map(ToString::to_string).collect()))?;

    let mut children: HashMap<&ArgumentId, (Vec<&ArgumentId>, Vec<&ArgumentId>)> = HashMap::new();
    for edge in &qbaf.edges {
        let entry = children.entry(&edge.dst).or_default();
        match edge.polarity {
            Polarity::Attack => entry.0.push(&edge.src),
            Polarity::Support => entry.1.push(&edge.src),
        }
    }

    let mut strengths: BTreeMap<ArgumentId, f64> = BTreeMap::new();
    for id in order {
        let base = qbaf.base_scores[id];
        let sigma = match children.get(id) {
            None => base,
            Some((attackers, supporters)) => {
                let collect = |xs: &[&ArgumentId]| -> Vec<f64> {
                    xs.iter().map(|x| strengths[*x]).collect()
                };
                let attack = aggregate(&collect(attackers))?;
                let support = aggregate(&collect(supporters))?;
                combine(base, attack, support)?
            }
        };
        strengths.insert(id.clone(), sigma);
    }
    Ok(StrengthMap(strengths))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: &str) -> ArgumentId {
        ArgumentId::new(s).unwrap()
    }

    fn two_child_graph() -> Qbaf {
        let mut q = Qbaf::new();
        q.add_argument(Argument::new(id("a"), ""), 0.5)
            .add_argument(Argument::new(id("b"), ""), 0.1)
            .add_argument(Argument::new(id("c"), ""), 0.7)
            .add_support(id("b"), id("a"))
            .add_attack(id("c"), id("a"));
        q
    }

    #[test]
    fn aggregate_examples() {
        assert_eq!(aggregate(&[]).unwrap(), 0.0);
        assert!((aggregate(&[0.7]).unwrap() - 0.7).abs() < 1e-15);
        assert_eq!(aggregate(&[0.5, 0.5]).unwrap(), 0.75);
    }

    #[test]
    fn aggregate_rejects_out_of_range() {
        assert!(matches!(aggregate(&[0.2, 1.1]), Err(Error::OutOfRange { .. })));
        assert!(aggregate(&[f64::NAN]).is_err());
    }

    #[test]
    fn combine_examples() {
        assert!((combine(0.5, 0.7, 0.1).unwrap() - 0.2).abs() < 1e-12);
        assert!((combine(0.5, 0.4, 0.6).unwrap() - 0.6).abs() < 1e-12);
        assert_eq!(combine(0.9, 0.3, 0.3).unwrap(), 0.9);
    }

    #[test]
    fn combine_rejects_out_of_range() {
        assert!(combine(-0.1, 0.0, 0.0).is_err());
        assert!(combine(0.5, 2.0, 0.0).is_err());
        assert!(combine(0.5, 0.0, -1e-9).is_err());
    }

    #[test]
    fn evaluate_two_child_graph() {
        let s = evaluate(&two_child_graph()).unwrap();
        assert!((s.get(&id("a")).unwrap() - 0.2).abs() < 1e-12);
        assert_eq!(s.get(&id("b")), Some(0.1));
        assert_eq!(s.get(&id("c")), Some(0.7));
        assert_eq!(s.len(), 3);
    }

    #[test]
    fn evaluate_leaf() {
        let mut q = Qbaf::new();
        q.add_argument(Argument::new(id("x"), ""), 0.42);
        assert_eq!(evaluate(&q).unwrap().get(&id("x")), Some(0.42));
    }

    #[test]
    fn evaluate_support_chain() {
        let mut q = Qbaf::new();
        q.add_argument(Argument::new(id("g"), ""), 0.5)
            .add_argument(Argument::new(id("s"), ""), 0.5)
            .add_argument(Argument::new(id("f"), ""), 0.5)
            .add_support(id("g"), id("s"))
            .add_support(id("s"), id("f"));
        let s = evaluate(&q).unwrap();
        assert!((s.get(&id("s")).unwrap() - 0.75).abs() < 1e-12);
        assert!((s.get(&id("f")).unwrap() - 0.875).abs() < 1e-12);
    }

    #[test]
    fn evaluate_diamond_dag() {
        // d feeds both b and c, which both feed a.
        let mut q = Qbaf::new();
        for (n, t) in [("a", 0.5), ("b", 0.5), ("c", 0.5), ("d", 0.8)] {
            q.add_argument(Argument::new(id(n), ""), t);
        }
        q.add_support(id("d"), id("b"))
            .add_attack(id("d"), id("c"))
            .add_support(id("b"), id("a"))
            .add_support(id("c"), id("a"));
        let s = evaluate(&q).unwrap();
        // b = 0.5 + 0.5*0.8 = 0.9, c = 0.5 - 0.5*0.8 = 0.1
        // a: support agg = 1 - 0.1*0.9 = 0.91 -> 0.5 + 0.5*0.91 = 0.955
        assert!((s.get(&id("a")).unwrap() - 0.955).abs() < 1e-12);
    }

    #[test]
    fn evaluate_rejects_cycle() {
        let mut q = Qbaf::new();
        for n in ["x", "y", "z"] {
            q.add_argument(Argument::new(id(n), ""), 0.5);
        }
        q.add_attack(id("x"), id("y"))
            .add_attack(id("y"), id("z"))
            .add_support(id("z"), id("x"));
        match evaluate(&q) {
            Err(Error::Cycle(ids)) => {
                assert_eq!(ids.len(), 4);
                assert_eq!(ids.first(), ids.last());
                for n in ["x", "y", "z"] {
                    assert!(ids.iter().any(|i| i == n));
                }
            }
            other => panic!("expected cycle error, got {other:?}"),
        }
    }

    #[test]
    fn validate_examples() {
        assert!(validate(&two_child_graph()).is_empty());

        let mut q = two_child_graph();
        q.add_attack(id("b"), id("z"));
        let v = validate(&q);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::UnknownEndpoint);
        assert_eq!(v[0].ids, vec!["z".to_string()]);

        let mut q = two_child_graph();
        q.set_base_score(id("a"), 1.5);
        let v = validate(&q);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::BaseScoreOutOfRange);
        assert_eq!(v[0].ids, vec!["a".to_string()]);
        assert!(v[0].invariant.contains("[0, 1]"));
    }

    #[test]
    fn validate_duplicates_and_self_edges() {
        let mut q = two_child_graph();
        q.add_support(id("b"), id("a"));
        assert_eq!(validate(&q)[0].kind, ViolationKind::DuplicateEdge);

        let mut q = two_child_graph();
        q.add_attack(id("b"), id("a"));
        assert_eq!(validate(&q)[0].kind, ViolationKind::AttackSupportOverlap);

        let mut q = two_child_graph();
        q.add_attack(id("c"), id("c"));
        assert_eq!(validate(&q)[0].kind, ViolationKind::SelfEdge);

        let mut q = two_child_graph();
        q.add_argument(Argument::new(id("a"), "again"), 0.3);
        assert_eq!(validate(&q)[0].kind, ViolationKind::DuplicateArgument);
    }

    #[test]
    fn validate_reports_cycle() {
        let mut q = two_child_graph();
        q.add_support(id("a"), id("b"));
        let v = validate(&q);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::Cycle);
    }

    #[test]
    fn argument_id_rules() {
        assert!(ArgumentId::new("").is_err());
        assert!(ArgumentId::new("a\nb").is_err());
        assert!(ArgumentId::new("ok id").is_ok());
        let parsed: std::result::Result<ArgumentId, _> = serde_json::from_str("\"\"");
        assert!(parsed.is_err());
    }
}
