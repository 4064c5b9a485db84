use std::collections::HashMap;

use once_cell::sync::Lazy;
use regex::Regex;

use super::latex::fold_latex;
use super::plaintext::scan_identifiers;
use super::InputFormat;
use super::{collapse_whitespace, push_identifier, ParseReport, ParseWarning, WarningKind};
use crate::model::{normalize_name, Identifier, ParsedCitation, SourceSpan};

static ENTRY_START: Lazy<Regex> = Lazy::new(|| Regex::new(r"(?m)^[ \t]*@").unwrap());
static AND: Lazy<Regex> = Lazy::new(|| Regex::new(r"(?i)\s+and\s+").unwrap());
static YEAR4: Lazy<Regex> = Lazy::new(|| Regex::new(r"\b(1[5-9]\d{2}|20\d{2})\b").unwrap());
static YEAR2: Lazy<Regex> = Lazy::new(|| Regex::new(r"^'?\d{2}$").unwrap());

/// Entry types that hold no reference.
const NON_ENTRIES: &[&str] = &["string", "comment", "preamble"];

struct Field {
    name: String,
    value: Option<String>,
    start: usize,
    end: usize,
}

struct Entry {
    kind: String,
    key: String,
    fields: Vec<Field>,
    /// Byte offset just past the closing delimiter.
    end: usize,
}

/// Recursive-descent reader over one `@...` chunk.
struct Reader<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    end: usize,
}

impl<'a> Reader<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.end && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        (self.pos < self.end).then(|| self.bytes[self.pos])
    }

    fn ident(&mut self) -> Option<&'a str> {
        let start = self.pos;
        while self.pos < self.end {
            let b = self.bytes[self.pos];
            if b.is_ascii_alphanumeric() || b"_-:.+/'".contains(&b) {
                self.pos += 1;
            } else {
                break;
            }
        }
        (self.pos > start).then(|| &self.src[start..self.pos])
    }

    /// Contents of a brace group starting at the current `{`.
    fn braced(&mut self) -> Result<&'a str, String> {
        let start = self.pos + 1;
        let mut depth = 0usize;
        while self.pos < self.end {
            match self.bytes[self.pos] {
                b'\\' => self.pos += 1,
                b'{' => depth += 1,
                b'}' => {
                    depth -= 1;
                    if depth == 0 {
                        self.pos += 1;
                        return Ok(&self.src[start..self.pos - 1]);
                    }
                }
                _ => {}
            }
            self.pos += 1;
        }
        Err("unbalanced braces".into())
    }

    /// Contents of a quoted value; braces inside protect quotes.
    fn quoted(&mut self) -> Result<&'a str, String> {
        let start = self.pos + 1;
        self.pos += 1;
        let mut depth = 0usize;
        while self.pos < self.end {
            match self.bytes[self.pos] {
                b'\\' => self.pos += 1,
                b'{' => depth += 1,
                b'}' => depth = depth.saturating_sub(1),
                b'"' if depth == 0 => {
                    self.pos += 1;
                    return Ok(&self.src[start..self.pos - 1]);
                }
                _ => {}
            }
            self.pos += 1;
        }
        Err("unterminated quoted value".into())
    }

    /// One value piece: braced, quoted, number or macro name.
    fn piece(&mut self, strings: &HashMap<String, String>) -> Result<String, String> {
        match self.peek() {
            Some(b'{') => self.braced().map(str::to_owned),
            Some(b'"') => self.quoted().map(str::to_owned),
            Some(_) => {
                let name = self.ident().ok_or("expected a field value")?;
                if name.bytes().all(|b| b.is_ascii_digit()) {
                    Ok(name.to_owned())
                } else {
                    strings
                        .get(&name.to_lowercase())
                        .cloned()
                        .ok_or_else(|| format!("undefined string macro {name:?}"))
                }
            }
            None => Err("missing field value".into()),
        }
    }

    /// Skip to the next top-level comma or the closing delimiter.
    fn skip_value_rest(&mut self, close: u8) {
        let mut depth = 0usize;
        while self.pos < self.end {
            match self.bytes[self.pos] {
                b'\\' => self.pos += 1,
                b'{' => depth += 1,
                b'}' if depth > 0 => depth -= 1,
                b',' if depth == 0 => return,
                c if c == close && depth == 0 => return,
                _ => {}
            }
            self.pos += 1;
        }
    }
}

/// Parse a BibTeX file. Malformed entries are skipped with a warning.
pub fn parse_bibtex(input: &str) -> ParseReport {
    let mut report = ParseReport::empty(InputFormat::Bibtex);
    let mut strings: HashMap<String, String> = HashMap::new();
    let starts: Vec<usize> = ENTRY_START.find_iter(input).map(|m| m.end() - 1).collect();

    for (i, &start) in starts.iter().enumerate() {
        let chunk_end = starts.get(i + 1).copied().unwrap_or(input.len());
        let mut reader = Reader {
            src: input,
            bytes: input.as_bytes(),
            pos: start + 1,
            end: chunk_end,
        };
        let kind = reader.ident().unwrap_or("").to_lowercase();
        if kind == "comment" || kind == "preamble" {
            continue;
        }
        match read_entry(&mut reader, kind, &strings, input, &mut report.warnings) {
            Ok(entry) if entry.kind == "string" => {
                for f in entry.fields {
                    if let Some(v) = f.value {
                        strings.insert(f.name, v);
                    }
                }
            }
            Ok(entry) => {
                let raw = &input[start..entry.end];
                let mut citation = ParsedCitation::new(entry.key.clone(), raw.trim_end());
                citation.source_span = SourceSpan::from_bytes(input, start, start + raw.trim_end().len());
                fill_citation(&mut citation, &entry, input, &mut report.warnings);
                report.citations.push(citation);
            }
            Err(message) => {
                let end = input[start..chunk_end].trim_end().len() + start;
                report
                    .warnings
                    .push(ParseWarning::new(input, start, end, WarningKind::SkippedEntry, message));
            }
        }
    }
    report
}

fn read_entry(
    r: &mut Reader<'_>,
    kind: String,
    strings: &HashMap<String, String>,
    input: &str,
    warnings: &mut Vec<ParseWarning>,
) -> Result<Entry, String> {
    if kind.is_empty() {
        return Err("entry type missing after '@'".into());
    }
    r.skip_ws();
    let close = match r.peek() {
        Some(b'{') => b'}',
        Some(b'(') => b')',
        _ => return Err(format!("@{kind} entry has no opening brace")),
    };
    r.pos += 1;
    r.skip_ws();

    let key = if kind == "string" {
        String::new()
    } else {
        let key = r.ident().ok_or_else(|| format!("@{kind} entry has no citation key"))?;
        r.skip_ws();
        match r.peek() {
            Some(b',') => r.pos += 1,
            Some(c) if c == close => {}
            _ => return Err(format!("expected ',' after key {key:?}")),
        }
        key.to_owned()
    };

    let mut fields = Vec::new();
    loop {
        r.skip_ws();
        match r.peek() {
            None => return Err(format!("@{kind} entry is not closed")),
            Some(c) if c == close => {
                r.pos += 1;
                return Ok(Entry {
                    kind,
                    key,
                    fields,
                    end: r.pos,
                });
            }
            Some(b',') => {
                r.pos += 1;
                continue;
            }
            _ => {}
        }
        let field_start = r.pos;
        let name = r
            .ident()
            .ok_or_else(|| format!("unexpected character in @{kind} entry"))?
            .to_lowercase();
        r.skip_ws();
        if r.peek() != Some(b'=') {
            return Err(format!("field {name:?} has no '='"));
        }
        r.pos += 1;
        r.skip_ws();
        let value = r.piece(strings);
        r.skip_ws();
        let value = match value {
            Ok(_) if r.peek() == Some(b'#') => {
                r.skip_value_rest(close);
                warnings.push(ParseWarning::new(
                    input,
                    field_start,
                    r.pos,
                    WarningKind::Field,
                    format!("field {name:?} uses '#' concatenation, which is not supported; field dropped"),
                ));
                None
            }
            Ok(v) => Some(v),
            Err(message) if message.starts_with("undefined") => {
                r.skip_value_rest(close);
                warnings.push(ParseWarning::new(
                    input,
                    field_start,
                    r.pos,
                    WarningKind::Field,
                    message,
                ));
                None
            }
            Err(message) => return Err(message),
        };
        fields.push(Field {
            name,
            value,
            start: field_start,
            end: r.pos,
        });
        r.skip_ws();
        match r.peek() {
            Some(b',') => r.pos += 1,
            Some(c) if c == close => {}
            None => return Err(format!("@{kind} entry is not closed")),
            _ => return Err("expected ',' between fields".into()),
        }
    }
}

fn fill_citation(c: &mut ParsedCitation, entry: &Entry, input: &str, warnings: &mut Vec<ParseWarning>) {
    let mut values: HashMap<&str, String> = HashMap::new();
    for f in &entry.fields {
        let Some(raw) = &f.value else { continue };
        let folded = fold_latex(raw);
        match f.name.as_str() {
            "doi" => push_identifier(&mut c.identifiers, Identifier::doi(folded.clone())),
            "eprint" => push_identifier(&mut c.identifiers, Identifier::arxiv(folded.clone())),
            "url" => push_identifier(&mut c.identifiers, Identifier::url(folded.clone())),
            _ => {}
        }
        if f.name == "year" {
            c.year = parse_year(&folded, input, f, warnings);
        }
        values.insert(f.name.as_str(), folded);
    }

    if let Some(authors) = values.get("author").or_else(|| values.get("editor")) {
        let (list, truncated) = split_authors(authors);
        c.authors = list.iter().map(|a| normalize_name(a)).collect();
        c.authors_truncated = truncated;
    }
    c.title = values.get("title").cloned().unwrap_or_default();
    c.venue = ["journal", "booktitle", "publisher", "institution", "school"]
        .iter()
        .find_map(|k| values.get(k).filter(|v| !v.is_empty()).cloned())
        .unwrap_or_default();
    c.volume = values.get("volume").cloned().filter(|v| !v.is_empty());
    c.issue = values.get("number").cloned().filter(|v| !v.is_empty());
    c.pages = values.get("pages").cloned().filter(|v| !v.is_empty());
    for free_text in ["note", "howpublished"] {
        if let Some(text) = values.get(free_text) {
            for (id, _) in scan_identifiers(text) {
                push_identifier(&mut c.identifiers, id);
            }
        }
    }
}

fn parse_year(value: &str, input: &str, field: &Field, warnings: &mut Vec<ParseWarning>) -> Option<i32> {
    if let Some(m) = YEAR4.find(value) {
        return m.as_str().parse().ok();
    }
    let message = if YEAR2.is_match(value.trim()) {
        format!("two-digit year {value:?} is ambiguous; year left empty")
    } else {
        format!("unreadable year {value:?}")
    };
    warnings.push(ParseWarning::new(
        input,
        field.start,
        field.end,
        WarningKind::Field,
        message,
    ));
    None
}

/// Split an author list on " and "; a trailing "others" after at least one
/// named author marks the list as truncated.
pub(crate) fn split_authors(value: &str) -> (Vec<String>, bool) {
    let mut parts: Vec<String> = AND
        .split(value)
        .map(collapse_whitespace)
        .filter(|p| !p.is_empty())
        .collect();
    let truncated = parts.len() > 1 && parts.last().is_some_and(|p| p.eq_ignore_ascii_case("others"));
    if truncated {
        parts.pop();
    }
    (parts, truncated)
}

/// Entry delimiters that should yield a citation or a skipped-entry
/// warning.
pub fn count_entry_delimiters(input: &str) -> usize {
    ENTRY_START
        .find_iter(input)
        .filter(|m| {
            let rest = &input[m.end()..];
            let kind: String = rest.chars().take_while(|c| c.is_ascii_alphanumeric()).collect();
            !NON_ENTRIES.contains(&kind.to_lowercase().as_str())
        })
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::IdentifierKind;

    const THREE: &str = r#"
@article{vaswani2017,
  author = {Ashish Vaswani and Noam Shazeer and others},
  title = {Attention Is All You Need},
  journal = {Advances in Neural Information Processing Systems},
  volume = {30},
  pages = {5998--6008},
  year = {2017},
}

@inproceedings{broken,
  author = {Someone},
  title = {Never closed

@misc{drivlme,
  author = "Firstname Lastname and Others",
  title = "Drivlme: A large-scale multi-agent driving benchmark",
  year = 2023,
  note = {URL or arXiv ID to be updated}
}
"#;

    #[test]
    fn full_article_fields() {
        let r = parse_bibtex(THREE);
        let c = &r.citations[0];
        assert_eq!(c.source_key, "vaswani2017");
        assert_eq!(c.authors.len(), 2);
        assert!(c.authors_truncated);
        assert_eq!(c.authors[1].surname, "shazeer");
        assert_eq!(c.title, "Attention Is All You Need");
        assert_eq!(c.venue, "Advances in Neural Information Processing Systems");
        assert_eq!(c.volume.as_deref(), Some("30"));
        assert_eq!(c.pages.as_deref(), Some("5998--6008"));
        assert_eq!(c.year, Some(2017));
        assert!(c.raw_text.starts_with("@article{vaswani2017"));
        assert!(c.raw_text.ends_with('}'));
    }

    #[test]
    fn malformed_entry_is_skipped_with_warning() {
        let r = parse_bibtex(THREE);
        assert_eq!(r.citations.len(), 2);
        let skipped: Vec<_> = r
            .warnings
            .iter()
            .filter(|w| w.kind == WarningKind::SkippedEntry)
            .collect();
        assert_eq!(skipped.len(), 1);
        assert!(THREE[skipped[0].span.byte_start..].starts_with("@inproceedings{broken"));
    }

    #[test]
    fn note_is_kept_in_raw_text() {
        let r = parse_bibtex(THREE);
        let c = &r.citations[1];
        assert!(c.raw_text.contains("URL or arXiv ID to be updated"));
        assert!(c.authors[0].is_placeholder);
        assert_eq!(c.year, Some(2023));
        assert!(c.identifiers.is_empty());
    }

    #[test]
    fn string_macros_and_concatenation() {
        let src = r#"@string{nips = "Neural Information Processing Systems"}
@inproceedings{a, title = {T}, booktitle = nips, year = 2020}
@inproceedings{b, title = {U}, booktitle = "Proc. " # nips, year = 2020}
"#;
        let r = parse_bibtex(src);
        assert_eq!(r.citations.len(), 2);
        assert_eq!(r.citations[0].venue, "Neural Information Processing Systems");
        assert_eq!(r.citations[1].venue, "");
        assert_eq!(r.warnings.len(), 1);
        assert!(r.warnings[0].message.contains('#'));
    }

    #[test]
    fn two_digit_year_is_absent() {
        let r = parse_bibtex("@article{k, title={T}, year={17}}");
        assert_eq!(r.citations[0].year, None);
        assert_eq!(r.warnings.len(), 1);
        assert!(r.warnings[0].message.contains("two-digit"));
    }

    #[test]
    fn identifiers_from_fields() {
        let src = r#"@article{k,
  title = {T},
  doi = {10.1016/j.epsr.2020.106811},
  eprint = {2107.13586},
  url = {https://doi.org/10.1016/j.epsr.2020.106811},
  note = {arXiv:2107.13586}
}"#;
        let c = &parse_bibtex(src).citations[0];
        let kinds: Vec<_> = c.identifiers.iter().map(|i| i.kind).collect();
        assert_eq!(
            kinds,
            vec![IdentifierKind::Doi, IdentifierKind::ArxivId, IdentifierKind::Url]
        );
    }

    #[test]
    fn unknown_types_and_parens() {
        let r =
            parse_bibtex("@techreport(tr1, title = {Report}, institution = {MIT}, year = {1999})\n@comment{ignored}");
        assert_eq!(r.citations.len(), 1);
        assert_eq!(r.citations[0].venue, "MIT");
        assert_eq!(count_entry_delimiters("@techreport(x)\n@comment{y}\n@string{a={b}}"), 1);
    }

    #[test]
    fn accents_are_folded() {
        let c = &parse_bibtex(r#"@article{k, author = {M{\"u}ller, J{\"u}rgen and Van Cutsem, Thierry}}"#).citations[0];
        assert_eq!(c.authors[0].raw, "Müller, Jürgen");
        assert_eq!(c.authors[1].surname, "van cutsem");
    }
}
