//! Text completion behind a trait, so argument generation can be replayed
//! from recorded transcripts.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::read_json;
use crate::error::{Error, Result};

pub trait TextCompletionClient {
    fn complete(&self, prompt: &str) -> Result<String>;
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Exchange {
    prompt: String,
    response: String,
}

/// Answers each prompt with its recorded response, byte for byte.
#[derive(Debug, Clone, Default)]
pub struct ReplayClient {
    responses: HashMap<String, String>,
}

impl ReplayClient {
    pub fn from_pairs<I, P, R>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (P, R)>,
        P: Into<String>,
        R: Into<String>,
    {
        Self {
            responses: pairs.into_iter().map(|(p, r)| (p.into(), r.into())).collect(),
        }
    }

    /// Loads `[{"prompt": ..., "response": ...}]`.
    pub fn from_file(path: &Path) -> Result<Self> {
        let exchanges: Vec<Exchange> = read_json(path)?;
        Ok(Self::from_pairs(exchanges.into_iter().map(|e| (e.prompt, e.response))))
    }
}

impl TextCompletionClient for ReplayClient {
    fn complete(&self, prompt: &str) -> Result<String> {
        self.responses
            .get(prompt)
            .cloned()
            .ok_or_else(|| Error::Client(format!("no recorded response for prompt {prompt:?}")))
    }
}

/// Returns the same response to every prompt.
#[derive(Debug, Clone)]
pub struct MockClient {
    response: String,
}

impl MockClient {
    pub fn new(response: impl Into<String>) -> Self {
        Self {
            response: response.into(),
        }
    }
}

impl TextCompletionClient for MockClient {
    fn complete(&self, _prompt: &str) -> Result<String> {
        Ok(self.response.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn replay_is_exact() {
        let recorded = "Supporting: X won\u{00e9} 5 of 6 \n\n";
        let c = ReplayClient::from_pairs([("argue for f", recorded)]);
        assert_eq!(c.complete("argue for f").unwrap().as_bytes(), recorded.as_bytes());
        assert!(matches!(c.complete("argue against f"), Err(Error::Client(_))));
    }

    #[test]
    fn replay_from_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.json");
        std::fs::write(&path, r#"[{"prompt":"p","response":"0.7"}]"#).unwrap();
        let c = ReplayClient::from_file(&path).unwrap();
        assert_eq!(c.complete("p").unwrap(), "0.7");
    }

    #[test]
    fn mock_is_constant() {
        let c: Box<dyn TextCompletionClient> = Box::new(MockClient::new("0.5"));
        assert_eq!(c.complete("a").unwrap(), "0.5");
        assert_eq!(c.complete("b").unwrap(), "0.5");
    }
}
