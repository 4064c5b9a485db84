use std::ops::Range;

use once_cell::sync::Lazy;
use regex::Regex;

use super::{collapse_whitespace, push_identifier, InputFormat, ParseReport, ParseWarning, WarningKind};
use crate::model::{normalize_name, Identifier, ParsedCitation, SourceSpan};

static BRACKET_MARKER: Lazy<Regex> = Lazy::new(|| Regex::new(r"(?m)^[ \t]*\[(\d+)\][ \t]*").unwrap());
static DOT_MARKER: Lazy<Regex> = Lazy::new(|| Regex::new(r"(?m)^[ \t]*(\d+)[.)][ \t]+").unwrap());
static BLANK_LINE: Lazy<Regex> = Lazy::new(|| Regex::new(r"\n[ \t]*\n").unwrap());

static DOI_TEXT: Lazy<Regex> = Lazy::new(|| Regex::new(r"(?i)\bdoi:?\s*(10\.\d{4,9}(?:\.\d+)*/[^\s,;]+)").unwrap());
static BARE_DOI: Lazy<Regex> = Lazy::new(|| Regex::new(r"\b10\.\d{4,9}(?:\.\d+)*/[^\s,;]+").unwrap());
static ARXIV_TEXT: Lazy<Regex> = Lazy::new(|| {
    Regex::new(
        r"(?i)\barxiv(?:\s*:\s*|\s+(?:preprint\s+)?)((?:\d{4}\.[\dX]{4,5}|[\dX]{4}\.[\dX]{3,5}|[a-z]+(?:-[a-z]+)*(?:\.[a-z]{2})?/\d{7})(?:v\d+)?)",
    )
    .unwrap()
});
static URL_TEXT: Lazy<Regex> = Lazy::new(|| Regex::new(r#"https?://[^\s<>"]+"#).unwrap());

static YEAR: Lazy<Regex> = Lazy::new(|| Regex::new(r"\b(19\d{2}|20\d{2})\b").unwrap());
static PAREN_YEAR: Lazy<Regex> = Lazy::new(|| Regex::new(r"^\s*\(((?:19|20)\d{2})[a-z]?\)\s*[.,:]?\s*").unwrap());
static TRAILING_YEAR: Lazy<Regex> = Lazy::new(|| Regex::new(r",?\s*\(?(?:19|20)\d{2}\)?$").unwrap());
static VOLUME_PAGES: Lazy<Regex> =
    Lazy::new(|| Regex::new(r"(\d+)\s*(?:\((\d+)\))?\s*:\s*(\d+(?:\s*[-–—]+\s*\d+)?)").unwrap());
static PP_PAGES: Lazy<Regex> = Lazy::new(|| Regex::new(r"(?i)\b(?:pp?\.|pages)\s*(\d+(?:\s*[-–—]+\s*\d+)?)").unwrap());
static ET_AL: Lazy<Regex> = Lazy::new(|| Regex::new(r"(?i),?\s*\bet\s+al\.?").unwrap());
static AUTHOR_SEP: Lazy<Regex> = Lazy::new(|| Regex::new(r"(?i)\s*,\s*and\s+|\s+and\s+|\s*&\s*|\s*;\s*").unwrap());
static INITIALS_ONLY: Lazy<Regex> = Lazy::new(|| Regex::new(r"^(?:[A-Z]\.?(?:\s*-\s*[A-Z]\.?)?\s*)+$").unwrap());
static IN_PREFIX: Lazy<Regex> = Lazy::new(|| Regex::new(r"^(?i:in:?\s+)").unwrap());

/// DOIs, arXiv ids and URLs mentioned in free text, with the byte range
/// each was found at, in order of appearance.
pub fn scan_identifiers(text: &str) -> Vec<(Identifier, Range<usize>)> {
    let mut found: Vec<(Identifier, Range<usize>)> = Vec::new();
    let mut taken: Vec<Range<usize>> = Vec::new();
    let overlaps = |taken: &[Range<usize>], r: &Range<usize>| taken.iter().any(|t| t.start < r.end && r.start < t.end);

    for m in URL_TEXT.find_iter(text) {
        let url = trim_trailing_punct(m.as_str());
        let range = m.start()..m.start() + url.len();
        taken.push(range.clone());
        found.push((Identifier::url(url), range));
    }
    for caps in DOI_TEXT.captures_iter(text) {
        let whole = caps.get(0).unwrap();
        let doi = trim_trailing_punct(&caps[1]);
        let range = whole.start()..caps.get(1).unwrap().start() + doi.len();
        if !overlaps(&taken, &range) {
            taken.push(range.clone());
            found.push((Identifier::doi(doi), range));
        }
    }
    for m in BARE_DOI.find_iter(text) {
        let doi = trim_trailing_punct(m.as_str());
        let range = m.start()..m.start() + doi.len();
        if !overlaps(&taken, &range) {
            taken.push(range.clone());
            found.push((Identifier::doi(doi), range));
        }
    }
    for caps in ARXIV_TEXT.captures_iter(text) {
        let whole = caps.get(0).unwrap();
        let range = whole.start()..whole.end();
        if !overlaps(&taken, &range) {
            taken.push(range.clone());
            found.push((Identifier::arxiv(&caps[1]), range));
        }
    }
    found.sort_by_key(|(_, r)| r.start);
    found
}

fn trim_trailing_punct(s: &str) -> &str {
    let mut s = s.trim_end_matches(['.', ',', ';', ':']);
    // drop a closing paren only when it is unbalanced
    while s.ends_with(')') && s.matches('(').count() < s.matches(')').count() {
        s = s[..s.len() - 1].trim_end_matches(['.', ',', ';', ':']);
    }
    s
}

/// Split the input into entries: numbered markers if present, else blank
/// lines, else one entry per line. Returns (number, byte range) pairs with
/// markers excluded from the range.
fn split_entries(input: &str) -> Vec<(Option<usize>, Range<usize>)> {
    for marker in [&*BRACKET_MARKER, &*DOT_MARKER] {
        let mut starts: Vec<(usize, usize, usize)> = Vec::new();
        for caps in marker.captures_iter(input) {
            let n: usize = caps[1].parse().unwrap_or(0);
            let expected = starts.last().map_or(1, |(prev, _, _)| prev + 1);
            // only a sequential run counts; stray "2021." lines are text
            let first_ok = starts.is_empty() && input[..caps.get(0).unwrap().start()].trim().is_empty();
            if n == expected && (first_ok || !starts.is_empty()) {
                let whole = caps.get(0).unwrap();
                starts.push((n, whole.start(), whole.end()));
            }
        }
        if !starts.is_empty() {
            return starts
                .iter()
                .enumerate()
                .map(|(i, &(n, _, body))| {
                    let end = starts.get(i + 1).map_or(input.len(), |s| s.1);
                    (Some(n), trimmed(input, body..end))
                })
                .collect();
        }
    }
    let mut ranges = Vec::new();
    if BLANK_LINE.is_match(input.trim()) {
        let mut start = 0;
        for m in BLANK_LINE.find_iter(input) {
            ranges.push(start..m.start());
            start = m.end();
        }
        ranges.push(start..input.len());
    } else {
        let mut start = 0;
        for line in input.split_inclusive('\n') {
            ranges.push(start..start + line.len());
            start += line.len();
        }
    }
    ranges
        .into_iter()
        .map(|r| trimmed(input, r))
        .filter(|r| !r.is_empty())
        .map(|r| (None, r))
        .collect()
}

fn trimmed(input: &str, r: Range<usize>) -> Range<usize> {
    let s = &input[r.clone()];
    let lead = s.len() - s.trim_start().len();
    let trail = s.len() - s.trim_end().len();
    if lead == s.len() {
        return r.start..r.start;
    }
    r.start + lead..r.end - trail
}

/// Parse a numbered or line-separated bibliography with heuristic field
/// extraction.
pub fn parse_plaintext(input: &str) -> ParseReport {
    let mut report = ParseReport::empty(InputFormat::Plaintext);
    for (i, (number, range)) in split_entries(input).into_iter().enumerate() {
        let raw = &input[range.clone()];
        let key = format!("ref{}", number.unwrap_or(i + 1));
        let mut citation = ParsedCitation::new(key, raw);
        citation.source_span = SourceSpan::from_bytes(input, range.start, range.end);
        let extracted = extract_fields(&mut citation);
        if !extracted {
            report.warnings.push(ParseWarning::new(
                input,
                range.start,
                range.end,
                WarningKind::Field,
                "no bibliographic fields recognized; kept raw text only",
            ));
        }
        report.citations.push(citation);
    }
    report
}

/// Returns false when nothing beyond the raw text could be recognized.
fn extract_fields(c: &mut ParsedCitation) -> bool {
    let text = collapse_whitespace(&c.raw_text);

    let ids = scan_identifiers(&text);
    for (id, _) in &ids {
        push_identifier(&mut c.identifiers, id.clone());
    }
    let mut masked = text.clone();
    for (_, r) in &ids {
        masked.replace_range(r.clone(), &" ".repeat(r.len()));
    }

    let mut rest_start = 0;
    if let Some(author_end) = find_author_end(&masked) {
        let segment = &masked[..author_end];
        let (segment, apa_year) = match segment.rfind('(') {
            Some(p) if PAREN_YEAR.is_match(&segment[p..]) => (&segment[..p], PAREN_YEAR.captures(&segment[p..])),
            _ => (segment, None),
        };
        if let Some(caps) = apa_year {
            c.year = caps[1].parse().ok();
        }
        let (authors, truncated) = split_author_segment(segment);
        c.authors = authors.iter().map(|a| normalize_name(a)).collect();
        c.authors_truncated = truncated && !c.authors.is_empty();
        rest_start = author_end + 1;
    }

    let mut rest = &masked[rest_start.min(masked.len())..];
    if let Some(caps) = PAREN_YEAR.captures(rest) {
        c.year = caps[1].parse().ok();
        rest = &rest[caps.get(0).unwrap().end()..];
    }
    let rest_offset = masked.len() - rest.len();

    let title_end = find_sentence_end(rest).unwrap_or(rest.len());
    let title = rest[..title_end].trim();
    let title = TRAILING_YEAR.replace(title, "");
    if title.chars().any(char::is_alphanumeric) {
        c.title = title.trim().to_owned();
    }

    let tail_offset = (rest_offset + title_end + 1).min(masked.len());
    let tail = &masked[tail_offset..];
    extract_venue_details(c, tail);

    if c.year.is_none() {
        c.year = YEAR.find_iter(&masked).last().and_then(|m| m.as_str().parse().ok());
    }

    !c.authors.is_empty() || !c.title.is_empty() || c.year.is_some() || !c.identifiers.is_empty()
}

/// Index of the first period that ends the author list: one followed by
/// whitespace (or the end) and not closing an initial.
fn find_author_end(text: &str) -> Option<usize> {
    let bytes = text.as_bytes();
    for (i, _) in text.match_indices('.') {
        let followed_by_space = bytes.get(i + 1).is_none_or(|b| b.is_ascii_whitespace());
        if !followed_by_space {
            continue;
        }
        let word_start = text[..i]
            .rfind(|ch: char| ch.is_whitespace() || ch == ',' || ch == '.' || ch == '-' || ch == '(')
            .map_or(0, |p| p + 1);
        let word = &text[word_start..i];
        let is_initial = word.chars().count() == 1 && word.chars().all(char::is_alphabetic);
        let is_suffix = matches!(word.to_ascii_lowercase().as_str(), "jr" | "sr");
        if !is_initial && !is_suffix {
            return Some(i);
        }
    }
    None
}

/// End of the first sentence: a period followed by whitespace or the end.
fn find_sentence_end(text: &str) -> Option<usize> {
    let bytes = text.as_bytes();
    (0..bytes.len()).find(|&i| bytes[i] == b'.' && bytes.get(i + 1).is_none_or(|b| b.is_ascii_whitespace()) && i > 0)
}

fn extract_venue_details(c: &mut ParsedCitation, tail: &str) {
    let tail = tail.trim();
    let tail = IN_PREFIX.replace(tail, "");
    let mut venue_end = tail.len();

    if let Some(caps) = VOLUME_PAGES.captures(&tail) {
        c.volume = Some(caps[1].to_owned());
        c.issue = caps.get(2).map(|m| m.as_str().to_owned());
        c.pages = Some(caps[3].split_whitespace().collect());
        venue_end = venue_end.min(caps.get(0).unwrap().start());
    } else if let Some(caps) = PP_PAGES.captures(&tail) {
        c.pages = Some(caps[1].split_whitespace().collect());
        venue_end = venue_end.min(caps.get(0).unwrap().start());
    }
    if let Some(m) = YEAR.find(&tail) {
        venue_end = venue_end.min(m.start());
    }
    if let Some(p) = find_sentence_end(&tail) {
        venue_end = venue_end.min(p);
    }
    // masked identifiers leave runs of spaces; stop the venue there
    if let Some(p) = tail.find("  ") {
        venue_end = venue_end.min(p);
    }
    let venue = tail[..venue_end].trim().trim_end_matches([',', '.', ';', ':']).trim();
    c.venue = venue.to_owned();
}

/// Split the author segment into individual names, merging initials-only
/// pieces back onto the preceding surname ("Nanda, N.").
fn split_author_segment(segment: &str) -> (Vec<String>, bool) {
    let truncated_by_et_al = ET_AL.is_match(segment);
    let segment = ET_AL.replace_all(segment, "");
    let mut names: Vec<String> = Vec::new();
    for group in AUTHOR_SEP.split(segment.trim()) {
        let mut pieces = group.split(',').map(str::trim).filter(|p| !p.is_empty()).peekable();
        while let Some(piece) = pieces.next() {
            let mut name = piece.to_owned();
            if let Some(next) = pieces.peek() {
                if INITIALS_ONLY.is_match(next) {
                    name = format!("{name}, {next}");
                    pieces.next();
                }
            }
            names.push(name);
        }
    }
    let trailing_others = names.len() > 1 && names.last().is_some_and(|n| n.eq_ignore_ascii_case("others"));
    if trailing_others {
        names.pop();
    }
    (names, truncated_by_et_al || trailing_others)
}
