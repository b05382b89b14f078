use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{read_json, write_json};
use crate::acf::{validate_acf, Acf, ArgumentKind, ForecasterId, Vote};
use crate::coherence::CoherenceVerdict;
use crate::error::{Error, Result};
use crate::qbaf::{Argument, ArgumentId, Edge};
use crate::variants::{DebateTemplate, TemplateStore};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArgumentRecord {
    pub id: ArgumentId,
    #[serde(default)]
    pub text: String,
    pub kind: ArgumentKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoteRecord {
    pub user: ForecasterId,
    pub arg: ArgumentId,
    pub vote: Vote,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub user: ForecasterId,
    pub arg: ArgumentId,
    pub p: f64,
}

/// On-disk form of a debate.
///
/// `forecasters` may be omitted; it then defaults to everyone who voted or
/// predicted.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DebateDocument {
    pub arguments: Vec<ArgumentRecord>,
    #[serde(default)]
    pub edges: Vec<Edge>,
    #[serde(default)]
    pub forecasters: Vec<ForecasterId>,
    #[serde(default)]
    pub votes: Vec<VoteRecord>,
    #[serde(default)]
    pub predictions: Vec<PredictionRecord>,
}

impl From<&Acf> for DebateDocument {
    fn from(acf: &Acf) -> Self {
        DebateDocument {
            arguments: acf
                .arguments()
                .map(|(a, kind)| ArgumentRecord {
                    id: a.id.clone(),
                    text: a.text.clone(),
                    kind,
                })
                .collect(),
            edges: acf.edges().to_vec(),
            forecasters: acf.forecasters().iter().cloned().collect(),
            votes: acf
                .votes()
                .map(|(u, a, v)| VoteRecord {
                    user: u.clone(),
                    arg: a.clone(),
                    vote: v,
                })
                .collect(),
            predictions: acf
                .predictions()
                .map(|(u, a, p)| PredictionRecord {
                    user: u.clone(),
                    arg: a.clone(),
                    p,
                })
                .collect(),
        }
    }
}

impl DebateDocument {
    /// Builds the debate without validating it. Repeated vote or prediction
    /// records resolve to the last one.
    pub fn to_acf(&self) -> Acf {
        let mut acf = Acf::new();
        for rec in &self.arguments {
            let arg = Argument::new(rec.id.clone(), &rec.text);
            match rec.kind {
                ArgumentKind::Forecasting => acf.add_forecasting(arg),
                ArgumentKind::Regular => acf.add_regular(arg),
            };
        }
        for e in &self.edges {
            acf.add_edge(e.clone());
        }
        for u in &self.forecasters {
            acf.add_forecaster(u.clone());
        }
        for v in &self.votes {
            acf.set_vote(v.user.clone(), v.arg.clone(), Some(v.vote));
        }
        for p in &self.predictions {
            acf.set_prediction(p.user.clone(), p.arg.clone(), Some(p.p));
        }
        acf
    }
}

/// Loads a debate and rejects it if it breaks any debate invariant.
pub fn load_acf(path: &Path) -> Result<Acf> {
    let doc: DebateDocument = read_json(path)?;
    let acf = doc.to_acf();
    let violations = validate_acf(&acf);
    if violations.is_empty() {
        Ok(acf)
    } else {
        Err(Error::Schema {
            path: path.to_path_buf(),
            message: Error::Invalid(violations).to_string(),
        })
    }
}

pub fn save_acf(path: &Path, acf: &Acf) -> Result<()> {
    write_json(path, &DebateDocument::from(acf))
}

pub fn load_templates(path: &Path) -> Result<TemplateStore> {
    let list: Vec<DebateTemplate> = read_json(path)?;
    Ok(TemplateStore::new(list))
}

pub fn save_templates(path: &Path, store: &TemplateStore) -> Result<()> {
    write_json(path, &store.templates().collect::<Vec<_>>())
}

pub fn load_verdicts(path: &Path) -> Result<Vec<CoherenceVerdict>> {
    read_json(path)
}

pub fn save_verdicts(path: &Path, verdicts: &[CoherenceVerdict]) -> Result<()> {
    write_json(path, &verdicts)
}
