//! Text normalization shared by name, title and venue comparison.

use std::collections::HashSet;

use once_cell::sync::Lazy;

const STOPWORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "all", "an", "and", "any", "are", "as", "at", "be", "been", "before",
    "being", "below", "between", "both", "but", "by", "can", "do", "does", "down", "during", "each", "for", "from",
    "further", "had", "has", "have", "here", "how", "if", "in", "into", "is", "it", "its", "more", "most", "no", "nor",
    "not", "of", "off", "on", "once", "only", "onto", "or", "other", "our", "out", "over", "own", "same", "so", "some",
    "such", "than", "that", "the", "their", "them", "then", "there", "these", "they", "this", "those", "through", "to",
    "too", "under", "up", "very", "via", "was", "we", "were", "what", "when", "where", "which", "while", "who", "why",
    "will", "with", "without", "you", "your",
];

const BIBLIOGRAPHIC_FILLERS: &[&str] = &["proceedings", "conference", "journal", "international"];

static STOPWORD_SET: Lazy<HashSet<&'static str>> =
    Lazy::new(|| STOPWORDS.iter().chain(BIBLIOGRAPHIC_FILLERS).copied().collect());

/// English stopword or bibliographic filler.
pub fn is_stopword(token: &str) -> bool {
    STOPWORD_SET.contains(token)
}

pub fn is_english_stopword(token: &str) -> bool {
    STOPWORDS.contains(&token)
}

/// Transliterate to ASCII, folding diacritics to their base letters.
pub fn fold(s: &str) -> String {
    deunicode::deunicode(s)
}

/// Fold, lowercase, drop apostrophes, turn every other non-alphanumeric
/// character into a space and collapse runs of whitespace.
pub fn normalize_text(s: &str) -> String {
    let folded = fold(s);
    let mut out = String::with_capacity(folded.len());
    let mut pending_space = false;
    for ch in folded.chars() {
        if ch == '\'' || ch == '`' {
            continue;
        }
        if ch.is_ascii_alphanumeric() {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.push(ch.to_ascii_lowercase());
        } else {
            pending_space = true;
        }
    }
    out
}

/// Normalized tokens with stopwords and single-character tokens removed.
pub fn content_tokens(s: &str) -> Vec<String> {
    normalize_text(s)
        .split(' ')
        .filter(|t| t.len() >= 2 && !is_stopword(t))
        .map(str::to_owned)
        .collect()
}
