//! Debate variants along the vote, breadth and depth complexity axes.
//!
//! [`classify`] reads the complexity flags off a single-question debate for
//! one forecaster; [`generate`] builds a debate with a requested shape from a
//! question template, and the two round-trip.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::acf::{validate_acf, Acf, ForecastBase, ForecasterId, Vote};
use crate::coherence::{check_coherence, forecaster_is_coherent, ThresholdConfig};
use crate::error::{Error, Result};
use crate::qbaf::{Argument, ArgumentId, Edge, Polarity};

/// Name of the fictitious forecaster in generated variants.
pub const VARIANT_FORECASTER: &str = "alex";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ComplexityProfile {
    pub simple: bool,
    pub vote_complex: bool,
    pub breadth_complex: bool,
    pub depth_complex: bool,
}

impl ComplexityProfile {
    pub fn shape(&self) -> Option<Shape> {
        Shape::ALL.into_iter().find(|s| s.profile() == *self)
    }
}

impl fmt::Display for ComplexityProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.shape() {
            Some(s) => f.write_str(s.label()),
            None => f.write_str("unclassified"),
        }
    }
}

/// The eight debate shapes used in alignment studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Shape {
    #[serde(rename = "s")]
    Simple,
    #[serde(rename = "v")]
    Vote,
    #[serde(rename = "b")]
    Breadth,
    #[serde(rename = "d")]
    Depth,
    #[serde(rename = "vb")]
    VoteBreadth,
    #[serde(rename = "vd")]
    VoteDepth,
    #[serde(rename = "db")]
    DepthBreadth,
    #[serde(rename = "vdb")]
    VoteDepthBreadth,
}

impl Shape {
    pub const ALL: [Shape; 8] = [
        Shape::Simple,
        Shape::Vote,
        Shape::Breadth,
        Shape::Depth,
        Shape::VoteBreadth,
        Shape::VoteDepth,
        Shape::DepthBreadth,
        Shape::VoteDepthBreadth,
    ];

    pub fn profile(&self) -> ComplexityProfile {
        let (v, b, d) = match self {
            Shape::Simple => {
                return ComplexityProfile {
                    simple: true,
                    ..Default::default()
                }
            }
            Shape::Vote => (true, false, false),
            Shape::Breadth => (false, true, false),
            Shape::Depth => (false, false, true),
            Shape::VoteBreadth => (true, true, false),
            Shape::VoteDepth => (true, false, true),
            Shape::DepthBreadth => (false, true, true),
            Shape::VoteDepthBreadth => (true, true, true),
        };
        ComplexityProfile {
            simple: false,
            vote_complex: v,
            breadth_complex: b,
            depth_complex: d,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            Shape::Simple => "s",
            Shape::Vote => "v",
            Shape::Breadth => "b",
            Shape::Depth => "d",
            Shape::VoteBreadth => "vb",
            Shape::VoteDepth => "vd",
            Shape::DepthBreadth => "db",
            Shape::VoteDepthBreadth => "vdb",
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Shape::Simple => "simple",
            Shape::Vote => "vote",
            Shape::Breadth => "breadth",
            Shape::Depth => "depth",
            Shape::VoteBreadth => "vote/breadth",
            Shape::VoteDepth => "vote/depth",
            Shape::DepthBreadth => "depth/breadth",
            Shape::VoteDepthBreadth => "vote/depth/breadth",
        }
    }
}

impl FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Shape::ALL
            .into_iter()
            .find(|shape| shape.code() == s || shape.label() == s)
            .ok_or_else(|| Error::Domain(format!("unknown shape `{s}`; expected one of s, v, b, d, vb, vd, db, vdb")))
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PredictionBand {
    #[serde(rename = "lt50")]
    Below50,
    #[serde(rename = "eq50")]
    At50,
    #[serde(rename = "gt50")]
    Above50,
}

impl PredictionBand {
    pub const ALL: [PredictionBand; 3] = [PredictionBand::Below50, PredictionBand::At50, PredictionBand::Above50];

    pub fn code(&self) -> &'static str {
        match self {
            PredictionBand::Below50 => "lt50",
            PredictionBand::At50 => "eq50",
            PredictionBand::Above50 => "gt50",
        }
    }

    /// Whole-percent prediction drawn from the band.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let percent: u32 = match self {
            PredictionBand::Below50 => rng.random_range(1..=49),
            PredictionBand::At50 => 50,
            PredictionBand::Above50 => rng.random_range(51..=99),
        };
        f64::from(percent) / 100.0
    }

    pub fn contains(&self, p: f64) -> bool {
        match self {
            PredictionBand::Below50 => (0.0..0.5).contains(&p),
            PredictionBand::At50 => p == 0.5,
            PredictionBand::Above50 => p > 0.5 && p <= 1.0,
        }
    }
}

impl FromStr for PredictionBand {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PredictionBand::ALL
            .into_iter()
            .find(|b| b.code() == s)
            .ok_or_else(|| Error::Domain(format!("unknown band `{s}`; expected lt50, eq50 or gt50")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantSpec {
    pub question_id: String,
    pub profile: ComplexityProfile,
    pub band: PredictionBand,
}

/// Argument texts for each structural slot of a question's debates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DebateTemplate {
    pub question_id: String,
    pub question: String,
    pub claim: String,
    pub supporter: String,
    pub attacker: String,
    pub extra_supporter: String,
    pub extra_attacker: String,
    pub grandchild_support: String,
    pub grandchild_attack: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TemplateStore(BTreeMap<String, DebateTemplate>);

impl TemplateStore {
    pub fn new(templates: impl IntoIterator<Item = DebateTemplate>) -> Self {
        Self(templates.into_iter().map(|t| (t.question_id.clone(), t)).collect())
    }

    pub fn get(&self, question_id: &str) -> Option<&DebateTemplate> {
        self.0.get(question_id)
    }

    pub fn templates(&self) -> impl Iterator<Item = &DebateTemplate> {
        self.0.values()
    }

    /// The two abstract-entity questions used for alignment studies.
    pub fn builtin() -> Self {
        Self::new([
            DebateTemplate {
                question_id: "tennis".into(),
                question: "Will X win their next tennis match against Y?".into(),
                claim: "X will win their next tennis match against Y.".into(),
                supporter: "X has won their last five matches on this surface.".into(),
                attacker: "Y beat X in their last two meetings.".into(),
                extra_supporter: "X's serve has been the strongest on tour this season.".into(),
                extra_attacker: "X is returning from a wrist injury.".into(),
                grandchild_support: "Those results came against top-ten opponents.".into(),
                grandchild_attack: "Those results came in a different season.".into(),
            },
            DebateTemplate {
                question_id: "election".into(),
                question: "Will Party A win the next election against Party B?".into(),
                claim: "Party A will win the next election against Party B.".into(),
                supporter: "Party A leads in most recent national polls.".into(),
                attacker: "Party B gained seats in the latest local elections.".into(),
                extra_supporter: "Party A has the larger campaign budget.".into(),
                extra_attacker: "Turnout among Party A's base is historically low.".into(),
                grandchild_support: "The polling lead has held for six months.".into(),
                grandchild_attack: "The polls undersampled rural voters.".into(),
            },
        ])
    }
}

/// Unsure and undefined votes compare equal: both express no opinion.
fn same_stance(a: Option<Vote>, b: Option<Vote>) -> bool {
    let norm = |v: Option<Vote>| match v {
        Some(Vote::Unsure) => None,
        other => other,
    };
    norm(a) == norm(b)
}

/// Complexity flags of a single-question debate as seen by forecaster `u`.
pub fn classify(acf: &Acf, u: &ForecasterId) -> Result<ComplexityProfile> {
    let forecasting: Vec<&Argument> = acf.forecasting_args().collect();
    let [f] = forecasting.as_slice() else {
        return Err(Error::UnsupportedShape(format!(
            "expected one forecasting argument, found {}",
            forecasting.len()
        )));
    };
    let violations = validate_acf(acf);
    if !violations.is_empty() {
        return Err(Error::Invalid(violations));
    }
    if !acf.has_forecaster(u) {
        return Err(Error::NotFound {
            kind: "forecaster",
            id: u.to_string(),
        });
    }

    let regular: Vec<&ArgumentId> = acf.regular_args().map(|a| &a.id).collect();
    let is_regular = |id: &ArgumentId| acf.kind_of(id) == Some(crate::acf::ArgumentKind::Regular);
    let (attackers, supporters) = acf.children_of(&f.id);
    let vote = |id: &ArgumentId| acf.vote(u, id);

    let attacks: Vec<&Edge> = acf.edges().iter().filter(|e| e.polarity == Polarity::Attack).collect();
    let supports: Vec<&Edge> = acf.edges().iter().filter(|e| e.polarity == Polarity::Support).collect();
    let simple = regular.len() == 2
        && attacks.len() == 1
        && supports.len() == 1
        && attacks[0].dst == f.id
        && supports[0].dst == f.id
        && vote(&attacks[0].src) == Some(Vote::Agree)
        && vote(&supports[0].src) == Some(Vote::Disagree);

    let vote_complex = attackers.iter().any(|b| vote(b) == Some(Vote::Disagree))
        || attackers
            .iter()
            .any(|c| supporters.iter().any(|d| same_stance(vote(c), vote(d))));

    let unfed = regular
        .iter()
        .filter(|a| !acf.edges().iter().any(|e| &&e.dst == *a && is_regular(&e.src)))
        .count();
    let breadth_complex = unfed == 3;

    let feeding_regular = regular
        .iter()
        .filter(|a| acf.edges().iter().any(|e| &&e.src == *a && is_regular(&e.dst)))
        .count();
    let depth_complex = feeding_regular == 1;

    Ok(ComplexityProfile {
        simple,
        vote_complex,
        breadth_complex,
        depth_complex,
    })
}

/// Builds a debate of the requested shape for the template's question,
/// with one fictitious forecaster whose prediction falls in the band.
pub fn generate<R: Rng + ?Sized>(
    spec: &VariantSpec,
    templates: &TemplateStore,
    rng: &mut R,
) -> Result<(Acf, ForecasterId)> {
    let template = templates.get(&spec.question_id).ok_or_else(|| Error::NotFound {
        kind: "question template",
        id: spec.question_id.clone(),
    })?;
    let shape = spec.profile.shape().ok_or_else(|| {
        Error::Generation(format!("profile {:?} is not one of the eight variant shapes", spec.profile))
    })?;
    let profile = shape.profile();
    let arg = |s: &str| ArgumentId::new(s).expect("static id");
    let (f, s, a) = (arg("f"), arg("s1"), arg("a1"));
    let u = ForecasterId::new(VARIANT_FORECASTER).expect("static id");

    let mut acf = Acf::new();
    acf.add_forecasting(Argument::new(f.clone(), &template.claim))
        .add_regular(Argument::new(s.clone(), &template.supporter))
        .add_regular(Argument::new(a.clone(), &template.attacker))
        .add_support(s.clone(), f.clone())
        .add_attack(a.clone(), f.clone());

    let (attacker_vote, supporter_vote) = if profile.vote_complex {
        if rng.random_bool(0.5) {
            // double negative
            (Vote::Disagree, Vote::Disagree)
        } else {
            // conflicting
            (Vote::Agree, Vote::Agree)
        }
    } else {
        (Vote::Agree, Vote::Disagree)
    };
    acf.set_vote(u.clone(), a.clone(), Some(attacker_vote))
        .set_vote(u.clone(), s.clone(), Some(supporter_vote));

    if profile.breadth_complex {
        // Outside vote variants a new agreed supporter would pair with the
        // agreed attacker, so the third child must attack.
        let polarity = if profile.vote_complex && rng.random_bool(0.5) {
            Polarity::Support
        } else {
            Polarity::Attack
        };
        let (id, text) = match polarity {
            Polarity::Support => (arg("s2"), &template.extra_supporter),
            Polarity::Attack => (arg("a2"), &template.extra_attacker),
        };
        acf.add_regular(Argument::new(id.clone(), text))
            .add_edge(Edge::new(id.clone(), f.clone(), polarity))
            .set_vote(u.clone(), id, Some(Vote::Agree));
    }

    if profile.depth_complex {
        let target = if rng.random_bool(0.5) { s.clone() } else { a.clone() };
        let polarity = if rng.random_bool(0.5) {
            Polarity::Support
        } else {
            Polarity::Attack
        };
        let text = match polarity {
            Polarity::Support => &template.grandchild_support,
            Polarity::Attack => &template.grandchild_attack,
        };
        let g = arg("g1");
        acf.add_regular(Argument::new(g.clone(), text))
            .add_edge(Edge::new(g.clone(), target, polarity))
            .set_vote(u.clone(), g, Some(Vote::Agree));
    }

    acf.set_prediction(u.clone(), f, Some(spec.band.sample(rng)));
    Ok((acf, u))
}

/// The model's coherence verdict paired with a human label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignmentSample {
    pub model_coherent: bool,
    pub user_coherent: bool,
}

impl AlignmentSample {
    pub fn aligned(&self) -> bool {
        self.model_coherent == self.user_coherent
    }
}

pub fn alignment_sample(
    acf: &Acf,
    u: &ForecasterId,
    cfg: &ThresholdConfig,
    forecast_base: &ForecastBase,
    user_says_coherent: bool,
) -> Result<AlignmentSample> {
    let verdicts = check_coherence(acf, u, cfg, forecast_base)?;
    Ok(AlignmentSample {
        model_coherent: forecaster_is_coherent(&verdicts)?,
        user_coherent: user_says_coherent,
    })
}
