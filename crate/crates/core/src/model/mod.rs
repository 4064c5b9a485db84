//! Domain types shared by every stage of the pipeline.

mod name;
mod verdict;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::identifiers::{analyze, SyntaxStatus};

pub use name::{normalize_name, normalize_name_with, AuthorName, PlaceholderTokens};
pub use verdict::{parse_verdict, serialize_verdict, Outcome, Verdict, VerdictStatus};

/// The five failure modes of a hallucinated citation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FailureMode {
    /// Total Fabrication
    #[serde(rename = "TF")]
    TotalFabrication,
    /// Partial Attribute Corruption
    #[serde(rename = "PAC")]
    PartialAttributeCorruption,
    /// Identifier Hijacking
    #[serde(rename = "IH")]
    IdentifierHijacking,
    /// Semantic Hallucination
    #[serde(rename = "SH")]
    SemanticHallucination,
    /// Placeholder Hallucination
    #[serde(rename = "PH")]
    PlaceholderHallucination,
}

impl FailureMode {
    pub const ALL: [FailureMode; 5] = [
        FailureMode::TotalFabrication,
        FailureMode::PartialAttributeCorruption,
        FailureMode::IdentifierHijacking,
        FailureMode::SemanticHallucination,
        FailureMode::PlaceholderHallucination,
    ];

    pub fn code(self) -> &'static str {
        match self {
            FailureMode::TotalFabrication => "TF",
            FailureMode::PartialAttributeCorruption => "PAC",
            FailureMode::IdentifierHijacking => "IH",
            FailureMode::SemanticHallucination => "SH",
            FailureMode::PlaceholderHallucination => "PH",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            FailureMode::TotalFabrication => "Total Fabrication",
            FailureMode::PartialAttributeCorruption => "Partial Attribute Corruption",
            FailureMode::IdentifierHijacking => "Identifier Hijacking",
            FailureMode::SemanticHallucination => "Semantic Hallucination",
            FailureMode::PlaceholderHallucination => "Placeholder Hallucination",
        }
    }
}

impl fmt::Display for FailureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for FailureMode {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FailureMode::ALL
            .into_iter()
            .find(|m| m.code() == s.trim())
            .ok_or_else(|| ModelError::UnknownCode(s.to_owned()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentifierKind {
    Doi,
    ArxivId,
    Url,
}

impl fmt::Display for IdentifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IdentifierKind::Doi => "doi",
            IdentifierKind::ArxivId => "arXiv",
            IdentifierKind::Url => "url",
        })
    }
}

#[derive(Serialize, Deserialize)]
struct IdentifierWire {
    kind: IdentifierKind,
    value: String,
}

/// A DOI, arXiv id or URL as it appears in a reference.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "IdentifierWire", into = "IdentifierWire")]
pub struct Identifier {
    pub kind: IdentifierKind,
    pub value: String,
    pub syntactically_valid: bool,
}

impl Identifier {
    pub fn new(kind: IdentifierKind, value: impl Into<String>) -> Self {
        let value = value.into();
        let syntactically_valid = analyze(kind, &value).0 == SyntaxStatus::Valid;
        Self {
            kind,
            value,
            syntactically_valid,
        }
    }

    pub fn doi(value: impl Into<String>) -> Self {
        Self::new(IdentifierKind::Doi, value)
    }

    pub fn arxiv(value: impl Into<String>) -> Self {
        Self::new(IdentifierKind::ArxivId, value)
    }

    pub fn url(value: impl Into<String>) -> Self {
        Self::new(IdentifierKind::Url, value)
    }
}

impl From<IdentifierWire> for Identifier {
    fn from(w: IdentifierWire) -> Self {
        Identifier::new(w.kind, w.value)
    }
}

impl From<Identifier> for IdentifierWire {
    fn from(id: Identifier) -> Self {
        IdentifierWire {
            kind: id.kind,
            value: id.value,
        }
    }
}

impl fmt::Display for Identifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            IdentifierKind::Url => f.write_str(&self.value),
            kind => write!(f, "{}:{}", kind, self.value),
        }
    }
}

/// A line/column region of the parsed input. Lines and columns are 1-based,
/// columns count characters; byte offsets are half-open.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceSpan {
    pub start_line: usize,
    pub start_col: usize,
    pub end_line: usize,
    pub end_col: usize,
    pub byte_start: usize,
    pub byte_end: usize,
}

impl SourceSpan {
    /// Build a span for `input[byte_start..byte_end]`.
    pub fn from_bytes(input: &str, byte_start: usize, byte_end: usize) -> Self {
        let (start_line, start_col) = line_col(input, byte_start);
        let (end_line, end_col) = line_col(input, byte_end);
        Self {
            start_line,
            start_col,
            end_line,
            end_col,
            byte_start,
            byte_end,
        }
    }

    pub fn is_within(&self, input: &str) -> bool {
        self.byte_start <= self.byte_end
            && self.byte_end <= input.len()
            && input.is_char_boundary(self.byte_start)
            && input.is_char_boundary(self.byte_end)
    }
}

fn line_col(input: &str, byte: usize) -> (usize, usize) {
    let before = &input[..byte.min(input.len())];
    let line = before.matches('\n').count() + 1;
    let line_start = before.rfind('\n').map_or(0, |i| i + 1);
    let col = before[line_start..].chars().count() + 1;
    (line, col)
}

/// One reference as claimed by a manuscript.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParsedCitation {
    pub source_key: String,
    pub raw_text: String,
    pub authors: Vec<AuthorName>,
    /// The author list ended in "et al." / "and others".
    #[serde(default)]
    pub authors_truncated: bool,
    pub title: String,
    pub venue: String,
    pub year: Option<i32>,
    pub volume: Option<String>,
    pub issue: Option<String>,
    pub pages: Option<String>,
    pub identifiers: Vec<Identifier>,
    pub source_span: SourceSpan,
}

impl ParsedCitation {
    /// A citation holding only its text; fields are filled by the caller.
    pub fn new(source_key: impl Into<String>, raw_text: impl Into<String>) -> Self {
        Self {
            source_key: source_key.into(),
            raw_text: raw_text.into(),
            authors: Vec::new(),
            authors_truncated: false,
            title: String::new(),
            venue: String::new(),
            year: None,
            volume: None,
            issue: None,
            pages: None,
            identifiers: Vec::new(),
            source_span: SourceSpan::default(),
        }
    }

    /// First author surname that is not a template placeholder.
    pub fn first_real_surname(&self) -> Option<&str> {
        self.authors
            .iter()
            .find(|a| !a.is_placeholder && !a.surname.is_empty())
            .map(|a| a.surname.as_str())
    }
}

/// One authoritative bibliographic record returned by a provider.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedRecord {
    pub provider: String,
    pub authors: Vec<AuthorName>,
    pub title: String,
    #[serde(default)]
    pub venue: String,
    #[serde(default)]
    pub year: Option<i32>,
    #[serde(default)]
    pub volume: Option<String>,
    #[serde(default)]
    pub pages: Option<String>,
    #[serde(default)]
    pub identifiers: Vec<Identifier>,
    #[serde(default)]
    pub provenance_query: String,
}

impl ResolvedRecord {
    /// "Surname et al. (year). Title" for evidence messages.
    pub fn short_description(&self) -> String {
        let lead = match self.authors.as_slice() {
            [] => String::from("unknown authors"),
            [one] => one.raw.clone(),
            [first, ..] => format!("{} et al.", first.raw),
        };
        match self.year {
            Some(y) => format!("{lead} ({y}). {}", self.title),
            None => format!("{lead}. {}", self.title),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldMatch {
    Match,
    Mismatch,
    Missing,
}

/// Per-field agreement between a claimed citation and a resolved record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldMatchProfile {
    pub author_match: FieldMatch,
    pub title_match: FieldMatch,
    pub venue_match: FieldMatch,
    pub year_match: FieldMatch,
    pub pages_match: FieldMatch,
    pub title_similarity: f64,
    pub author_similarity: f64,
}

impl FieldMatchProfile {
    fn fields(&self) -> [FieldMatch; 5] {
        [
            self.author_match,
            self.title_match,
            self.venue_match,
            self.year_match,
            self.pages_match,
        ]
    }

    /// Author or title matched: the record is anchored to something real.
    pub fn has_strong_match(&self) -> bool {
        self.author_match == FieldMatch::Match || self.title_match == FieldMatch::Match
    }

    pub fn has_mismatch(&self) -> bool {
        self.fields().contains(&FieldMatch::Mismatch)
    }

    /// Author, title and year agree. An absent claimed year does not block.
    pub fn confirms_identity(&self) -> bool {
        self.author_match == FieldMatch::Match
            && self.title_match == FieldMatch::Match
            && matches!(self.year_match, FieldMatch::Match | FieldMatch::Missing)
    }

    pub fn mismatched_fields(&self) -> Vec<&'static str> {
        ["authors", "title", "venue", "year", "pages"]
            .into_iter()
            .zip(self.fields())
            .filter(|(_, m)| *m == FieldMatch::Mismatch)
            .map(|(name, _)| name)
            .collect()
    }
}

/// Why a provider could not answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnavailableCause {
    Timeout,
    ServerError,
    RateLimited,
    Offline,
    ProviderUnavailable,
}

impl fmt::Display for UnavailableCause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UnavailableCause::Timeout => "timeout",
            UnavailableCause::ServerError => "server_error",
            UnavailableCause::RateLimited => "rate_limited",
            UnavailableCause::Offline => "offline",
            UnavailableCause::ProviderUnavailable => "provider_unavailable",
        })
    }
}

/// A single observation supporting a failure mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceItem {
    pub mode: FailureMode,
    pub detail: String,
    pub field: Option<String>,
    pub score: Option<f64>,
}

impl EvidenceItem {
    pub fn new(mode: FailureMode, field: Option<&str>, detail: impl Into<String>) -> Self {
        Self {
            mode,
            detail: detail.into(),
            field: field.map(str::to_owned),
            score: None,
        }
    }

    pub fn scored(mode: FailureMode, field: Option<&str>, detail: impl Into<String>, score: f64) -> Self {
        Self {
            score: Some(score),
            ..Self::new(mode, field, detail)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failure_mode_codes_round_trip() {
        for mode in FailureMode::ALL {
            assert_eq!(mode.code().parse::<FailureMode>().unwrap(), mode);
            let json = serde_json::to_string(&mode).unwrap();
            assert_eq!(json, format!("\"{}\"", mode.code()));
            assert_eq!(serde_json::from_str::<FailureMode>(&json).unwrap(), mode);
        }
        assert!("XX".parse::<FailureMode>().is_err());
    }

    #[test]
    fn identifier_validity_is_computed() {
        assert!(Identifier::arxiv("2107.13586").syntactically_valid);
        assert!(!Identifier::arxiv("2305.XXXX").syntactically_valid);
        assert!(!Identifier::doi("10.1109/").syntactically_valid);
        let json = serde_json::to_string(&Identifier::doi("10.1145/3560815")).unwrap();
        assert_eq!(json, r#"{"kind":"doi","value":"10.1145/3560815"}"#);
        let back: Identifier = serde_json::from_str(&json).unwrap();
        assert!(back.syntactically_valid);
    }

    #[test]
    fn spans_track_lines_and_columns() {
        let input = "ab\ncdé\nf";
        let start = input.find('c').unwrap();
        let span = SourceSpan::from_bytes(input, start, input.len());
        assert_eq!((span.start_line, span.start_col), (2, 1));
        assert_eq!((span.end_line, span.end_col), (3, 2));
        assert!(span.is_within(input));
    }
}
