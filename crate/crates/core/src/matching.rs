//! Fuzzy record linkage between a claimed citation and resolved records.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::MatchError;
use crate::model::{AuthorName, FieldMatch, FieldMatchProfile, ParsedCitation, ResolvedRecord};
use crate::text::{content_tokens, is_english_stopword, normalize_text};

/// Decision thresholds for field matching and title plausibility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MatchThresholds {
    pub title_strong: f64,
    pub title_moderate: f64,
    pub author_strong: f64,
    pub year_slack: i32,
    pub plausibility: f64,
}

impl Default for MatchThresholds {
    fn default() -> Self {
        Self {
            title_strong: 0.90,
            title_moderate: 0.60,
            author_strong: 0.80,
            year_slack: 1,
            plausibility: 0.70,
        }
    }
}

impl MatchThresholds {
    pub fn validate(&self) -> Result<(), MatchError> {
        let bad = |msg: String| Err(MatchError::InvalidThresholds(msg));
        if !(0.0 < self.title_moderate && self.title_moderate < self.title_strong && self.title_strong <= 1.0) {
            return bad(format!(
                "need 0 < title_moderate ({}) < title_strong ({}) <= 1",
                self.title_moderate, self.title_strong
            ));
        }
        if !(0.0 < self.author_strong && self.author_strong <= 1.0) {
            return bad(format!("need 0 < author_strong ({}) <= 1", self.author_strong));
        }
        if self.year_slack < 0 {
            return bad(format!("year_slack must be non-negative, got {}", self.year_slack));
        }
        if !(0.0..=1.0).contains(&self.plausibility) {
            return bad(format!("plausibility must lie in [0, 1], got {}", self.plausibility));
        }
        Ok(())
    }
}

/// `1 - levenshtein(a, b) / max(|a|, |b|)` over characters; 1.0 for two empty strings.
pub fn edit_similarity(a: &str, b: &str) -> f64 {
    let longest = a.chars().count().max(b.chars().count());
    if longest == 0 {
        return 1.0;
    }
    1.0 - strsim::levenshtein(a, b) as f64 / longest as f64
}

/// Jaccard index of two token sets; 0.0 when both are empty.
pub fn jaccard<T: Eq + std::hash::Hash>(a: &HashSet<T>, b: &HashSet<T>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 0.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

/// The two components of [`title_similarity`] and their blend.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TitleSimilarity {
    pub token_jaccard: f64,
    pub edit: f64,
    pub score: f64,
}

pub fn title_similarity_components(a: &str, b: &str) -> TitleSimilarity {
    let na = normalize_text(a);
    let nb = normalize_text(b);
    let ta: HashSet<String> = content_tokens(&na).into_iter().collect();
    let tb: HashSet<String> = content_tokens(&nb).into_iter().collect();
    let token_jaccard = jaccard(&ta, &tb);
    let edit = edit_similarity(&na, &nb);
    TitleSimilarity {
        token_jaccard,
        edit,
        score: token_jaccard.max(edit),
    }
}

/// Blend of content-token Jaccard and normalized edit similarity.
pub fn title_similarity(a: &str, b: &str) -> f64 {
    title_similarity_components(a, b).score
}

/// One-to-one surname alignment score between two author lists.
///
/// Aligned pairs score 1 when surnames are equal and first initials are
/// compatible, 0.5 when only surnames agree. Placeholders never align. The
/// alignment maximizes the total, which is divided by the longer list length.
pub fn author_similarity(claimed: &[AuthorName], resolved: &[AuthorName]) -> f64 {
    let denom = claimed.len().max(resolved.len());
    if denom == 0 {
        return 0.0;
    }
    aligned_author_score(claimed, resolved) / denom as f64
}

/// Like [`author_similarity`] but a truncated claimed list ("et al.") is
/// only compared over its listed prefix.
pub fn citation_author_similarity(citation: &ParsedCitation, record: &ResolvedRecord) -> f64 {
    if citation.authors_truncated && !citation.authors.is_empty() {
        let denom = citation.authors.len();
        return (aligned_author_score(&citation.authors, &record.authors) / denom as f64).min(1.0);
    }
    author_similarity(&citation.authors, &record.authors)
}

fn aligned_author_score(claimed: &[AuthorName], resolved: &[AuthorName]) -> f64 {
    // Every same-surname pair is an edge, so per surname group the best
    // alignment pairs min(n, m) authors, of which a maximum matching on
    // initial compatibility score 1 and the rest 0.5.
    let mut groups: BTreeMap<&str, (Vec<&AuthorName>, Vec<&AuthorName>)> = BTreeMap::new();
    for a in claimed.iter().filter(|a| !a.is_placeholder && !a.surname.is_empty()) {
        groups.entry(a.surname.as_str()).or_default().0.push(a);
    }
    for a in resolved.iter().filter(|a| !a.is_placeholder && !a.surname.is_empty()) {
        groups.entry(a.surname.as_str()).or_default().1.push(a);
    }
    groups
        .values()
        .map(|(left, right)| {
            let paired = left.len().min(right.len());
            let compatible =
                max_bipartite_matching(left.len(), right.len(), |i, j| left[i].initials_compatible(right[j]));
            0.5 * paired as f64 + 0.5 * compatible as f64
        })
        .sum()
}

fn max_bipartite_matching(n: usize, m: usize, edge: impl Fn(usize, usize) -> bool) -> usize {
    fn augment(
        i: usize,
        m: usize,
        edge: &dyn Fn(usize, usize) -> bool,
        seen: &mut [bool],
        owner: &mut [Option<usize>],
    ) -> bool {
        for j in 0..m {
            if edge(i, j) && !seen[j] {
                seen[j] = true;
                if owner[j].is_none_or(|k| augment(k, m, edge, seen, owner)) {
                    owner[j] = Some(i);
                    return true;
                }
            }
        }
        false
    }
    let mut owner = vec![None; m];
    (0..n)
        .filter(|&i| {
            let mut seen = vec![false; m];
            augment(i, m, &edge, &mut seen, &mut owner)
        })
        .count()
}

fn venue_tokens(s: &str) -> Vec<String> {
    normalize_text(s)
        .split(' ')
        .filter(|t| !t.is_empty() && !t.bytes().all(|b| b.is_ascii_digit()))
        .map(str::to_owned)
        .collect()
}

/// Venue agreement by normalized containment, with acronym expansion
/// ("ICLR" matches "International Conference on Learning Representations").
pub fn venue_matches(claimed: &str, resolved: &str) -> bool {
    let a: Vec<String> = venue_tokens(claimed)
        .into_iter()
        .filter(|t| !crate::text::is_stopword(t))
        .collect();
    let b: Vec<String> = venue_tokens(resolved)
        .into_iter()
        .filter(|t| !crate::text::is_stopword(t))
        .collect();
    if a.is_empty() || b.is_empty() {
        return a.is_empty() && b.is_empty();
    }
    let (short, long) = if a.len() <= b.len() { (&a, &b) } else { (&b, &a) };
    if long.windows(short.len()).any(|w| w == short.as_slice()) {
        return true;
    }
    let acronym = |s: &str| -> String {
        venue_tokens(s)
            .iter()
            .filter(|t| !is_english_stopword(t))
            .filter_map(|t| t.chars().next())
            .collect()
    };
    let (ac, ar) = (acronym(claimed), acronym(resolved));
    a.iter().any(|t| t.len() >= 3 && *t == ar) || b.iter().any(|t| t.len() >= 3 && *t == ac)
}

fn normalize_pages(p: &str) -> String {
    let folded = p.replace(['\u{2013}', '\u{2014}'], "-");
    let compact: String = folded
        .chars()
        .filter(|c| !c.is_whitespace())
        .collect::<String>()
        .to_lowercase();
    let mut out = String::with_capacity(compact.len());
    for ch in compact.chars() {
        if ch == '-' && out.ends_with('-') {
            continue;
        }
        out.push(ch);
    }
    out.trim_start_matches("pp.").trim_start_matches("pages").to_owned()
}

fn compare_optional(claimed: Option<&str>, resolved: Option<&str>) -> Option<bool> {
    match (claimed, resolved) {
        (Some(c), Some(r)) => Some(normalize_pages(c) == normalize_pages(r)),
        _ => None,
    }
}

/// Field-by-field comparison of a claimed citation with one record.
pub fn profile_match(citation: &ParsedCitation, record: &ResolvedRecord, t: &MatchThresholds) -> FieldMatchProfile {
    let title_similarity = if citation.title.trim().is_empty() {
        0.0
    } else {
        title_similarity(&citation.title, &record.title)
    };
    let title_match = if citation.title.trim().is_empty() {
        FieldMatch::Missing
    } else if title_similarity >= t.title_strong {
        FieldMatch::Match
    } else {
        FieldMatch::Mismatch
    };

    let author_similarity = citation_author_similarity(citation, record);
    let author_match = if citation.authors.is_empty() {
        FieldMatch::Missing
    } else if author_similarity >= t.author_strong {
        FieldMatch::Match
    } else {
        FieldMatch::Mismatch
    };

    let year_match = match (citation.year, record.year) {
        (None, _) => FieldMatch::Missing,
        (Some(_), None) => FieldMatch::Match,
        (Some(c), Some(r)) if (c - r).abs() <= t.year_slack => FieldMatch::Match,
        _ => FieldMatch::Mismatch,
    };

    let venue_match = if citation.venue.trim().is_empty() {
        FieldMatch::Missing
    } else if record.venue.trim().is_empty() || venue_matches(&citation.venue, &record.venue) {
        FieldMatch::Match
    } else {
        FieldMatch::Mismatch
    };

    let pages_match = if citation.pages.is_none() && citation.volume.is_none() {
        FieldMatch::Missing
    } else {
        let checks = [
            compare_optional(citation.pages.as_deref(), record.pages.as_deref()),
            compare_optional(citation.volume.as_deref(), record.volume.as_deref()),
        ];
        if checks.contains(&Some(false)) {
            FieldMatch::Mismatch
        } else {
            FieldMatch::Match
        }
    };

    FieldMatchProfile {
        author_match,
        title_match,
        venue_match,
        year_match,
        pages_match,
        title_similarity,
        author_similarity,
    }
}

/// Highest (title similarity, author similarity) candidate; ties keep the
/// earlier candidate.
pub fn best_candidate(
    citation: &ParsedCitation,
    candidates: &[ResolvedRecord],
    t: &MatchThresholds,
) -> Option<(ResolvedRecord, FieldMatchProfile)> {
    let mut best: Option<(&ResolvedRecord, FieldMatchProfile)> = None;
    for record in candidates {
        let profile = profile_match(citation, record, t);
        let better = match &best {
            None => true,
            Some((_, top)) => {
                (profile.title_similarity, profile.author_similarity) > (top.title_similarity, top.author_similarity)
            }
        };
        if better {
            best = Some((record, profile));
        }
    }
    best.map(|(r, p)| (r.clone(), p))
}

/// Domain vocabulary used to judge whether a title sounds in-field.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary(HashSet<String>);

impl Vocabulary {
    pub fn contains(&self, token: &str) -> bool {
        self.0.contains(token)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Parse the newline-delimited token file format.
    pub fn from_lines(text: &str) -> Self {
        Self(corpus_lines(text).into_iter().map(str::to_owned).collect())
    }

    /// Sorted, newline-delimited tokens.
    pub fn to_lines(&self) -> String {
        let mut tokens: Vec<&String> = self.0.iter().collect();
        tokens.sort();
        tokens.into_iter().fold(String::new(), |mut out, t| {
            out.push_str(t);
            out.push('\n');
            out
        })
    }

    /// The vocabulary built from the bundled machine-learning title corpus.
    pub fn bundled() -> Self {
        Self::from_lines(include_str!("../data/vocab.txt"))
    }
}

impl FromIterator<String> for Vocabulary {
    fn from_iter<I: IntoIterator<Item = String>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// Titles in the bundled corpus, one per non-comment line.
pub fn bundled_titles() -> Vec<&'static str> {
    corpus_lines(include_str!("../data/titles.txt"))
}

/// Non-empty lines that are not `#` comments.
pub fn corpus_lines(text: &str) -> Vec<&str> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect()
}

/// Content tokens that occur at least twice across the corpus titles.
pub fn build_vocab<S: AsRef<str>>(corpus_titles: &[S]) -> Result<Vocabulary, MatchError> {
    if corpus_titles.is_empty() {
        return Err(MatchError::EmptyCorpus);
    }
    let mut counts: HashMap<String, usize> = HashMap::new();
    for title in corpus_titles {
        for token in content_tokens(title.as_ref()) {
            *counts.entry(token).or_default() += 1;
        }
    }
    Ok(counts.into_iter().filter(|(_, n)| *n >= 2).map(|(t, _)| t).collect())
}

/// Fraction of the title's content tokens found in the vocabulary.
pub fn title_plausibility(title: &str, vocab: &Vocabulary) -> f64 {
    let tokens = content_tokens(title);
    if tokens.is_empty() {
        return 0.0;
    }
    tokens.iter().filter(|t| vocab.contains(t)).count() as f64 / tokens.len() as f64
}
