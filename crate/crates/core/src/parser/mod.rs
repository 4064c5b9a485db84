//! Reference-list parsing for BibTeX files and plain-text bibliographies.

mod bibtex;
pub mod latex;
mod plaintext;
mod render;

use std::path::Path;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::ParseError;
use crate::identifiers::check_identifier;
use crate::model::{Identifier, ParsedCitation, SourceSpan};

pub use bibtex::{count_entry_delimiters, parse_bibtex};
pub use plaintext::{parse_plaintext, scan_identifiers};
pub use render::render_bibtex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Bibtex,
    Plaintext,
}

impl InputFormat {
    /// `.bib` files are BibTeX; everything else is read as plain text.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("bib") => InputFormat::Bibtex,
            _ => InputFormat::Plaintext,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WarningKind {
    /// The whole entry was dropped.
    SkippedEntry,
    /// The entry was kept but a field could not be read.
    Field,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseWarning {
    pub span: SourceSpan,
    pub kind: WarningKind,
    pub message: String,
}

impl ParseWarning {
    pub(crate) fn new(input: &str, start: usize, end: usize, kind: WarningKind, message: impl Into<String>) -> Self {
        Self {
            span: SourceSpan::from_bytes(input, start, end),
            kind,
            message: message.into(),
        }
    }
}

/// Citations in input order plus the problems met along the way.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParseReport {
    pub citations: Vec<ParsedCitation>,
    pub warnings: Vec<ParseWarning>,
    pub format: InputFormat,
}

impl ParseReport {
    pub(crate) fn empty(format: InputFormat) -> Self {
        Self {
            citations: Vec::new(),
            warnings: Vec::new(),
            format,
        }
    }
}

pub fn parse(input: &str, format: InputFormat) -> ParseReport {
    match format {
        InputFormat::Bibtex => parse_bibtex(input),
        InputFormat::Plaintext => parse_plaintext(input),
    }
}

pub fn parse_bytes(input: &[u8], format: InputFormat) -> Result<ParseReport, ParseError> {
    let text = std::str::from_utf8(input).map_err(|_| ParseError::NotUtf8)?;
    Ok(parse(text, format))
}

/// Read and parse a file, choosing the format from its extension unless
/// one is given.
pub fn parse_file(path: &Path, format: Option<InputFormat>) -> Result<ParseReport, ParseError> {
    let bytes = std::fs::read(path)?;
    parse_bytes(&bytes, format.unwrap_or_else(|| InputFormat::from_path(path)))
}

/// Append `id` unless an identifier of the same kind and normalized value
/// is already present.
pub(crate) fn push_identifier(ids: &mut Vec<Identifier>, id: Identifier) {
    let key = identity_key(&id);
    if !ids.iter().any(|existing| identity_key(existing) == key) {
        ids.push(id);
    }
}

fn identity_key(id: &Identifier) -> (crate::model::IdentifierKind, String) {
    let check = check_identifier(id);
    let value = check.normalized.unwrap_or_else(|| id.value.trim().to_lowercase());
    (id.kind, value)
}

/// NFC-compose and collapse runs of whitespace to single spaces.
pub(crate) fn collapse_whitespace(s: &str) -> String {
    let composed: String = s.nfc().collect();
    composed.split_whitespace().collect::<Vec<_>>().join(" ")
}
