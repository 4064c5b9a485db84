use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::text::{fold, normalize_text};

/// Surname particles that belong to the family name ("Van Cutsem", "de Souza").
const PARTICLES: &[&str] = &[
    "van", "von", "de", "der", "den", "del", "della", "di", "da", "du", "dos", "das", "la", "le", "ter", "ten", "zu",
    "bin", "ibn",
];

const SUFFIXES: &[&str] = &["jr", "sr", "ii", "iii", "iv"];

/// Tokens that mark an author slot the generator never filled in.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaceholderTokens(Vec<String>);

impl Default for PlaceholderTokens {
    fn default() -> Self {
        Self::new(["Firstname", "Lastname", "Others", "Anonymous", "Author", "TBD"])
    }
}

impl PlaceholderTokens {
    pub fn new<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self(
            tokens
                .into_iter()
                .map(|t| normalize_text(t.as_ref()))
                .filter(|t| !t.is_empty())
                .collect(),
        )
    }

    pub fn contains(&self, token: &str) -> bool {
        self.0.iter().any(|t| t == token)
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }
}

/// An author as written in a reference, with a normalized comparison key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuthorName {
    pub raw: String,
    pub surname: String,
    pub given_tokens: Vec<String>,
    pub is_placeholder: bool,
}

impl AuthorName {
    /// Comma form `surname, given...` built from the normalized parts.
    /// Normalizing it again yields the same parts.
    pub fn reassembled(&self) -> String {
        match (self.surname.is_empty(), self.given_tokens.is_empty()) {
            (true, _) => self.given_tokens.join(" "),
            // keep multi-word surnames together
            (false, true) if self.surname.contains(' ') => format!("{},", self.surname),
            (false, true) => self.surname.clone(),
            (false, false) => format!("{}, {}", self.surname, self.given_tokens.join(" ")),
        }
    }

    pub fn first_initial(&self) -> Option<char> {
        self.given_tokens.first().and_then(|t| t.chars().next())
    }

    /// Given names agree when either side has none or the first initials match.
    pub fn initials_compatible(&self, other: &AuthorName) -> bool {
        match (self.first_initial(), other.first_initial()) {
            (Some(a), Some(b)) => a == b,
            _ => true,
        }
    }

    /// The normalized parts, ignoring the raw spelling.
    pub fn key(&self) -> (&str, &[String], bool) {
        (&self.surname, &self.given_tokens, self.is_placeholder)
    }
}

impl Serialize for AuthorName {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.raw)
    }
}

impl<'de> Deserialize<'de> for AuthorName {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        Ok(normalize_name(&raw))
    }
}

/// Normalize with the default placeholder token list.
pub fn normalize_name(raw: &str) -> AuthorName {
    normalize_name_with(raw, &PlaceholderTokens::default())
}

pub fn normalize_name_with(raw: &str, placeholders: &PlaceholderTokens) -> AuthorName {
    let folded = fold(raw);
    let (surname_part, given_part) = split_name(&folded);

    let mut surname = normalize_text(&surname_part);
    let mut given_tokens: Vec<String> = normalize_text(&given_part)
        .split(' ')
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect();
    if surname.is_empty() {
        if let Some(last) = given_tokens.pop() {
            surname = last;
        }
    }

    let is_placeholder = surname.is_empty()
        || surname.split(' ').any(|t| placeholders.contains(t))
        || given_tokens.iter().any(|t| placeholders.contains(t));

    AuthorName {
        raw: raw.trim().to_owned(),
        surname,
        given_tokens,
        is_placeholder,
    }
}

fn is_suffix(word: &str) -> bool {
    SUFFIXES.contains(&normalize_text(word).as_str())
}

fn is_particle(word: &str) -> bool {
    PARTICLES.contains(&normalize_text(word).as_str())
}

/// Returns (surname words, given words) as strings.
fn split_name(folded: &str) -> (String, String) {
    if folded.contains(',') {
        let parts: Vec<&str> = folded.split(',').map(str::trim).collect();
        let surname = parts[0].to_owned();
        // "Last, Jr, First" keeps First; suffix parts are dropped
        let given: Vec<&str> = parts[1..]
            .iter()
            .flat_map(|p| p.split_whitespace())
            .filter(|w| !is_suffix(w))
            .collect();
        if !normalize_text(&surname).is_empty() {
            return (surname, given.join(" "));
        }
        return split_plain(&given.join(" "));
    }
    split_plain(folded)
}

fn split_plain(s: &str) -> (String, String) {
    let mut words: Vec<&str> = s.split_whitespace().filter(|w| !normalize_text(w).is_empty()).collect();
    while words.len() > 1 && is_suffix(words[words.len() - 1]) {
        words.pop();
    }
    match words.len() {
        0 => (String::new(), String::new()),
        1 => (words[0].to_owned(), String::new()),
        n => {
            let split_at = (1..n - 1).find(|&i| is_particle(words[i])).unwrap_or(n - 1);
            let given: Vec<&str> = words[..split_at].iter().copied().filter(|w| !is_suffix(w)).collect();
            (words[split_at..].join(" "), given.join(" "))
        }
    }
}
