//! Syntax checks for DOIs, arXiv ids and URLs, and placeholder detection.

use once_cell::sync::Lazy;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::model::{EvidenceItem, FailureMode, Identifier, IdentifierKind, ParsedCitation, PlaceholderTokens};

static DOI: Lazy<Regex> = Lazy::new(|| Regex::new(r"^10\.[0-9]{4,9}(?:\.[0-9]+)*/\S+$").unwrap());
static DOI_PREFIX: Lazy<Regex> =
    Lazy::new(|| Regex::new(r"(?i)^(?:doi:\s*|(?:https?://)?(?:dx\.)?doi\.org/)").unwrap());
static ARXIV_NEW: Lazy<Regex> = Lazy::new(|| Regex::new(r"^([0-9]{4}\.[0-9]{4,5})(?:v([0-9]+))?$").unwrap());
static ARXIV_OLD: Lazy<Regex> =
    Lazy::new(|| Regex::new(r"^([a-z]+(?:-[a-z]+)*(?:\.[A-Z]{2})?/[0-9]{7})(?:v([0-9]+))?$").unwrap());
static ARXIV_PREFIX: Lazy<Regex> =
    Lazy::new(|| Regex::new(r"(?i)^(?:arxiv:\s*|(?:https?://)?(?:www\.)?arxiv\.org/(?:abs|pdf)/)").unwrap());
static PLACEHOLDER: Lazy<Regex> = Lazy::new(|| Regex::new(r"(?:[Xx]{3,}|N{4,}|\bTODO\b|(?i:to be updated))").unwrap());
static TEXT_PLACEHOLDER: Lazy<Regex> = Lazy::new(|| Regex::new(r"(?:(?i:to be updated)|\bTODO\b|\bTBD\b)").unwrap());
static TO_APPEAR: Lazy<Regex> = Lazy::new(|| Regex::new(r"(?i)\bto appear\b").unwrap());

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyntaxStatus {
    Valid,
    Invalid,
    Placeholder,
}

/// Result of checking one identifier's syntax.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentifierCheck {
    pub identifier: Identifier,
    pub syntax: SyntaxStatus,
    /// Canonical form, present iff `syntax` is `Valid`.
    pub normalized: Option<String>,
    /// arXiv version suffix, split off the normalized id.
    pub version: Option<u32>,
}

impl IdentifierCheck {
    /// The DOI or arXiv id this identifier can be looked up as, if any.
    /// DOI and arXiv URLs resolve to their underlying identifier.
    pub fn lookup_target(&self) -> Option<(IdentifierKind, String)> {
        let normalized = self.normalized.as_ref()?;
        match self.identifier.kind {
            IdentifierKind::Url => url_target(normalized),
            kind => Some((kind, normalized.clone())),
        }
    }
}

pub fn has_placeholder_pattern(value: &str) -> bool {
    PLACEHOLDER.is_match(value)
}

/// Canonical lowercase DOI without resolver prefixes.
pub fn normalize_doi(value: &str) -> Option<String> {
    let stripped = DOI_PREFIX.replace(value.trim(), "");
    DOI.is_match(&stripped).then(|| stripped.to_lowercase())
}

/// arXiv id without prefix and version, plus the version if one was given.
pub fn parse_arxiv(value: &str) -> Option<(String, Option<u32>)> {
    let trimmed = value.trim();
    let stripped = ARXIV_PREFIX.replace(trimmed, "");
    let stripped = stripped.strip_suffix(".pdf").unwrap_or(&stripped);
    let caps = ARXIV_NEW.captures(stripped).or_else(|| ARXIV_OLD.captures(stripped))?;
    let version = caps.get(2).and_then(|v| v.as_str().parse().ok());
    Some((caps[1].to_owned(), version))
}

fn normalize_url(value: &str) -> Option<String> {
    let parsed = url::Url::parse(value.trim()).ok()?;
    let scheme_ok = matches!(parsed.scheme(), "http" | "https");
    let host_ok = parsed.host_str().is_some_and(|h| !h.is_empty());
    (scheme_ok && host_ok).then(|| parsed.to_string())
}

/// Map a DOI-resolver or arXiv URL to the identifier it points at.
pub fn url_target(url: &str) -> Option<(IdentifierKind, String)> {
    let parsed = url::Url::parse(url).ok()?;
    let host = parsed.host_str()?.trim_start_matches("www.");
    let path = parsed.path().trim_start_matches('/');
    match host {
        "doi.org" | "dx.doi.org" => {
            let decoded = percent_decode(path);
            normalize_doi(&decoded).map(|d| (IdentifierKind::Doi, d))
        }
        "arxiv.org" | "export.arxiv.org" => {
            let rest = path.strip_prefix("abs/").or_else(|| path.strip_prefix("pdf/"))?;
            parse_arxiv(rest).map(|(id, _)| (IdentifierKind::ArxivId, id))
        }
        _ => None,
    }
}

fn percent_decode(s: &str) -> String {
    let bytes = s.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%' && i + 2 < bytes.len() {
            if let Ok(b) = u8::from_str_radix(&s[i + 1..i + 3], 16) {
                out.push(b);
                i += 3;
                continue;
            }
        }
        out.push(bytes[i]);
        i += 1;
    }
    String::from_utf8_lossy(&out).into_owned()
}

/// Syntax status, normalized form and arXiv version for a raw value.
pub(crate) fn analyze(kind: IdentifierKind, value: &str) -> (SyntaxStatus, Option<String>, Option<u32>) {
    if has_placeholder_pattern(value) {
        return (SyntaxStatus::Placeholder, None, None);
    }
    let parsed = match kind {
        IdentifierKind::Doi => normalize_doi(value).map(|d| (d, None)),
        IdentifierKind::ArxivId => parse_arxiv(value),
        IdentifierKind::Url => normalize_url(value).map(|u| (u, None)),
    };
    match parsed {
        Some((normalized, version)) => (SyntaxStatus::Valid, Some(normalized), version),
        None => (SyntaxStatus::Invalid, None, None),
    }
}

pub fn check_identifier(id: &Identifier) -> IdentifierCheck {
    let (syntax, normalized, version) = analyze(id.kind, &id.value);
    IdentifierCheck {
        identifier: id.clone(),
        syntax,
        normalized,
        version,
    }
}

/// Placeholder (PH) evidence across authors, title, raw text and identifiers.
pub fn scan_placeholders(citation: &ParsedCitation) -> Vec<EvidenceItem> {
    scan_placeholders_with(citation, &PlaceholderTokens::default())
}

pub fn scan_placeholders_with(citation: &ParsedCitation, tokens: &PlaceholderTokens) -> Vec<EvidenceItem> {
    let mut evidence = Vec::new();
    let ph = FailureMode::PlaceholderHallucination;

    let placeholder_authors: Vec<&str> = citation
        .authors
        .iter()
        .filter(|a| {
            a.is_placeholder
                || a.surname.split(' ').any(|t| tokens.contains(t))
                || a.given_tokens.iter().any(|t| tokens.contains(t))
        })
        .map(|a| a.raw.as_str())
        .collect();
    if !placeholder_authors.is_empty() {
        evidence.push(EvidenceItem::new(
            ph,
            Some("authors"),
            format!("template author names: {}", placeholder_authors.join(", ")),
        ));
    }

    let title = citation.title.trim();
    if title.is_empty() {
        evidence.push(EvidenceItem::new(ph, Some("title"), "entry has no title"));
    } else if has_placeholder_pattern(title) {
        evidence.push(EvidenceItem::new(
            ph,
            Some("title"),
            format!("placeholder text in title: {title:?}"),
        ));
    }

    for hit in TEXT_PLACEHOLDER.find_iter(&citation.raw_text) {
        evidence.push(EvidenceItem::new(
            ph,
            Some("raw_text"),
            format!("placeholder text {:?}", hit.as_str()),
        ));
    }

    let checks: Vec<IdentifierCheck> = citation.identifiers.iter().map(check_identifier).collect();
    let has_valid_identifier = checks.iter().any(|c| c.syntax == SyntaxStatus::Valid);
    if !has_valid_identifier {
        if let Some(hit) = TO_APPEAR.find(&citation.raw_text) {
            evidence.push(EvidenceItem::new(
                ph,
                Some("raw_text"),
                format!("{:?} without any identifier", hit.as_str()),
            ));
        }
    }

    for check in checks.iter().filter(|c| c.syntax == SyntaxStatus::Placeholder) {
        evidence.push(EvidenceItem::new(
            ph,
            Some("identifiers"),
            format!("incomplete identifier {}", check.identifier),
        ));
    }
    evidence
}
