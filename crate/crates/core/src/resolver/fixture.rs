use std::collections::HashMap;
use std::path::Path;

use super::{LookupOutcome, Provider, Query};
use crate::error::ConfigError;
use crate::model::UnavailableCause;
use crate::text::normalize_text;

/// Offline provider answering from a JSON document that maps canonical
/// query keys to outcomes. Keys starting with `_` are ignored, so the file
/// can carry notes. Queries with no entry are `Unavailable(Offline)`;
/// title queries equal to the normalized title of any `found` record
/// resolve to that record.
#[derive(Debug, Clone, Default)]
pub struct FixtureProvider {
    name: String,
    answers: HashMap<String, LookupOutcome>,
    by_title: HashMap<String, LookupOutcome>,
}

impl FixtureProvider {
    pub fn from_json(json: &str) -> Result<Self, ConfigError> {
        let raw: HashMap<String, serde_json::Value> = serde_json::from_str(json)?;
        let mut answers = HashMap::new();
        for (key, value) in raw {
            if key.starts_with('_') {
                continue;
            }
            let outcome: LookupOutcome = serde_json::from_value(value)?;
            answers.insert(key, outcome);
        }
        Ok(Self::from_answers(answers))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn from_answers(answers: HashMap<String, LookupOutcome>) -> Self {
        let mut by_title = HashMap::new();
        let mut keys: Vec<&String> = answers.keys().collect();
        keys.sort();
        for key in keys {
            if let LookupOutcome::Found { record } = &answers[key] {
                by_title
                    .entry(format!("title:{}", normalize_text(&record.title)))
                    .or_insert_with(|| LookupOutcome::Candidates {
                        records: vec![record.clone()],
                    });
            }
        }
        Self {
            name: "fixture".into(),
            answers,
            by_title,
        }
    }

    pub fn len(&self) -> usize {
        self.answers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.answers.is_empty()
    }
}

impl Provider for FixtureProvider {
    fn name(&self) -> &str {
        &self.name
    }

    fn supports(&self, _query: &Query) -> bool {
        true
    }

    fn execute(&self, query: &Query) -> LookupOutcome {
        let key = query.key();
        self.answers
            .get(&key)
            .or_else(|| self.by_title.get(&key))
            .cloned()
            .unwrap_or(LookupOutcome::Unavailable {
                cause: UnavailableCause::Offline,
            })
    }
}

/// A provider that never answers; stands in for an outage.
#[derive(Debug, Clone, Copy)]
pub struct UnavailableProvider {
    pub cause: UnavailableCause,
}

impl Provider for UnavailableProvider {
    fn name(&self) -> &str {
        "unavailable"
    }

    fn supports(&self, _query: &Query) -> bool {
        true
    }

    fn execute(&self, _query: &Query) -> LookupOutcome {
        LookupOutcome::unavailable(self.cause)
    }
}
