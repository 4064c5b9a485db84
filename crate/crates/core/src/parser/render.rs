use std::fmt::Write;

use super::latex::escape_latex;
use crate::model::{IdentifierKind, ParsedCitation};

/// Render citations as canonical BibTeX. Parsing the output yields the
/// same field values.
pub fn render_bibtex(citations: &[ParsedCitation]) -> String {
    let mut out = String::new();
    for c in citations {
        render_entry(&mut out, c);
    }
    out
}

fn render_entry(out: &mut String, c: &ParsedCitation) {
    let key: String = c
        .source_key
        .chars()
        .map(|ch| {
            if ch.is_ascii_alphanumeric() || "_-:.+/".contains(ch) {
                ch
            } else {
                '_'
            }
        })
        .collect();
    let key = if key.is_empty() { "entry".to_owned() } else { key };
    let _ = writeln!(out, "@misc{{{key},");

    if !c.authors.is_empty() {
        let mut names: Vec<&str> = c.authors.iter().map(|a| a.raw.as_str()).collect();
        if c.authors_truncated {
            names.push("others");
        }
        field(out, "author", &names.join(" and "));
    }
    field(out, "title", &c.title);
    field(out, "journal", &c.venue);
    if let Some(year) = c.year {
        field(out, "year", &year.to_string());
    }
    for (name, value) in [("volume", &c.volume), ("number", &c.issue), ("pages", &c.pages)] {
        if let Some(v) = value {
            field(out, name, v);
        }
    }
    for id in &c.identifiers {
        let name = match id.kind {
            IdentifierKind::Doi => "doi",
            IdentifierKind::ArxivId => "eprint",
            IdentifierKind::Url => "url",
        };
        field(out, name, &id.value);
    }
    out.push_str("}\n\n");
}

fn field(out: &mut String, name: &str, value: &str) {
    if !value.is_empty() {
        let _ = writeln!(out, "  {name} = {{{}}},", escape_latex(value));
    }
}
