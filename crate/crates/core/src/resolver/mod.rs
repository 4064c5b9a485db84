//! Metadata resolution against scholarly providers, with caching and
//! per-provider rate limiting.

mod cache;
pub mod config;
mod fixture;
mod http;
mod rate_limit;

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::identifiers::{check_identifier, SyntaxStatus};
use crate::matching::{best_candidate, profile_match, MatchThresholds};
use crate::model::{Identifier, IdentifierKind, ParsedCitation, ResolvedRecord, UnavailableCause};
use crate::text::normalize_text;

pub use cache::{Cache, CacheEntry};
pub use config::{CacheConfig, Config, ProviderConfig, ProviderKind, ResolverOptions};
pub use fixture::{FixtureProvider, UnavailableProvider};
pub use http::{ArxivProvider, CrossrefProvider, OpenAlexProvider};
pub use rate_limit::RateLimiter;

/// Default number of candidates requested from search endpoints.
pub const DEFAULT_SEARCH_LIMIT: usize = 5;

/// One question asked of a provider.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Query {
    Doi(String),
    Arxiv(String),
    Title { normalized: String, limit: usize },
    AuthorYear { surname: String, year: i32, limit: usize },
}

impl Query {
    /// Build a title query; the title is normalized so style variants share
    /// one cache key.
    pub fn title(title: &str, limit: usize) -> Self {
        Query::Title {
            normalized: normalize_text(title),
            limit,
        }
    }

    pub fn author_year(surname: &str, year: i32, limit: usize) -> Self {
        Query::AuthorYear {
            surname: normalize_text(surname),
            year,
            limit,
        }
    }

    /// Canonical text used as cache and fixture key.
    pub fn key(&self) -> String {
        match self {
            Query::Doi(doi) => format!("doi:{}", doi.to_lowercase()),
            Query::Arxiv(id) => format!("arxiv:{id}"),
            Query::Title { normalized, .. } => format!("title:{normalized}"),
            Query::AuthorYear { surname, year, .. } => format!("author:{surname}:{year}"),
        }
    }

    pub fn is_search(&self) -> bool {
        matches!(self, Query::Title { .. } | Query::AuthorYear { .. })
    }
}

/// A provider's answer. Searches answer with `Candidates` (possibly
/// empty); identifier lookups with `Found` or `NotFound`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum LookupOutcome {
    Found { record: ResolvedRecord },
    Candidates { records: Vec<ResolvedRecord> },
    NotFound,
    Unavailable { cause: UnavailableCause },
}

impl LookupOutcome {
    pub fn unavailable(cause: UnavailableCause) -> Self {
        LookupOutcome::Unavailable { cause }
    }

    pub fn is_unavailable(&self) -> bool {
        matches!(self, LookupOutcome::Unavailable { .. })
    }

    pub fn cause(&self) -> Option<UnavailableCause> {
        match self {
            LookupOutcome::Unavailable { cause } => Some(*cause),
            _ => None,
        }
    }

    /// Records carried by the answer, in provider order.
    pub fn records(&self) -> &[ResolvedRecord] {
        match self {
            LookupOutcome::Found { record } => std::slice::from_ref(record),
            LookupOutcome::Candidates { records } => records,
            _ => &[],
        }
    }
}

/// A metadata source. Implementations must be safe to call from many
/// threads at once.
pub trait Provider: Send + Sync {
    fn name(&self) -> &str;
    fn supports(&self, query: &Query) -> bool;
    fn execute(&self, query: &Query) -> LookupOutcome;
}

/// Result of one search step in a resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SearchOutcome {
    /// Not attempted: nothing to search for, or an earlier step already
    /// confirmed the citation.
    Skipped,
    Candidates {
        records: Vec<ResolvedRecord>,
    },
    Unavailable {
        cause: UnavailableCause,
    },
}

impl SearchOutcome {
    pub fn records(&self) -> &[ResolvedRecord] {
        match self {
            SearchOutcome::Candidates { records } => records,
            _ => &[],
        }
    }

    fn from_lookup(outcome: LookupOutcome) -> Self {
        match outcome {
            LookupOutcome::Unavailable { cause } => SearchOutcome::Unavailable { cause },
            other => SearchOutcome::Candidates {
                records: other.records().to_vec(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentifierLookup {
    pub identifier: Identifier,
    /// The query key the identifier resolved to.
    pub query: String,
    pub outcome: LookupOutcome,
}

/// Everything learned about one citation from the providers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolutionBundle {
    pub citation_key: String,
    pub identifier_outcomes: Vec<IdentifierLookup>,
    pub title_search: SearchOutcome,
    pub author_search: SearchOutcome,
}

impl ResolutionBundle {
    pub fn empty(citation_key: impl Into<String>) -> Self {
        Self {
            citation_key: citation_key.into(),
            identifier_outcomes: Vec::new(),
            title_search: SearchOutcome::Skipped,
            author_search: SearchOutcome::Skipped,
        }
    }

    pub fn title_candidates(&self) -> &[ResolvedRecord] {
        self.title_search.records()
    }

    pub fn author_candidates(&self) -> &[ResolvedRecord] {
        self.author_search.records()
    }

    /// Causes of every attempted sub-lookup that went unanswered, in order.
    fn attempts(&self) -> Vec<Option<UnavailableCause>> {
        let ids = self.identifier_outcomes.iter().map(|l| l.outcome.cause());
        let searches = [&self.title_search, &self.author_search]
            .into_iter()
            .filter_map(|s| match s {
                SearchOutcome::Skipped => None,
                SearchOutcome::Candidates { .. } => Some(None),
                SearchOutcome::Unavailable { cause } => Some(Some(*cause)),
            });
        ids.chain(searches).collect()
    }

    /// When at least one lookup was attempted and none was answered, the
    /// cause of the first failure.
    pub fn outage_cause(&self) -> Option<UnavailableCause> {
        let attempts = self.attempts();
        if attempts.is_empty() || attempts.iter().any(Option::is_none) {
            return None;
        }
        attempts[0]
    }
}

struct Slot {
    provider: Box<dyn Provider>,
    limiter: Option<RateLimiter>,
    max_wait: Duration,
}

/// Queries providers in configured order, consulting the cache first.
pub struct Resolver {
    slots: Vec<Slot>,
    cache: Option<Cache>,
    requests: AtomicU64,
    search_limit: usize,
}

impl Default for Resolver {
    fn default() -> Self {
        Self::new()
    }
}

impl Resolver {
    pub fn new() -> Self {
        Self {
            slots: Vec::new(),
            cache: None,
            requests: AtomicU64::new(0),
            search_limit: DEFAULT_SEARCH_LIMIT,
        }
    }

    /// Add a provider without rate limiting.
    pub fn with_provider(mut self, provider: impl Provider + 'static) -> Self {
        self.slots.push(Slot {
            provider: Box::new(provider),
            limiter: None,
            max_wait: Duration::ZERO,
        });
        self
    }

    /// Add a provider limited to `rate` requests per second. A request that
    /// would wait longer than `max_wait` for its turn is answered with
    /// `Unavailable(RateLimited)`.
    pub fn with_limited_provider(mut self, provider: Box<dyn Provider>, rate: f64, max_wait: Duration) -> Self {
        self.slots.push(Slot {
            provider,
            limiter: Some(RateLimiter::new(rate)),
            max_wait,
        });
        self
    }

    pub fn with_cache(mut self, cache: Cache) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn with_search_limit(mut self, limit: usize) -> Self {
        self.search_limit = limit.max(1);
        self
    }

    pub fn cache(&self) -> Option<&Cache> {
        self.cache.as_ref()
    }

    pub fn provider_names(&self) -> Vec<&str> {
        self.slots.iter().map(|s| s.provider.name()).collect()
    }

    /// Provider calls made so far (cache hits excluded).
    pub fn request_count(&self) -> u64 {
        self.requests.load(Ordering::SeqCst)
    }

    /// Answer a query from the cache or the first provider that answers.
    /// All providers failing yields the first failure's cause.
    pub fn lookup(&self, query: &Query) -> LookupOutcome {
        let key = query.key();
        if let Some(hit) = self.cache.as_ref().and_then(|c| c.get(&key)) {
            return hit;
        }
        let mut first_failure = None;
        for slot in self.slots.iter().filter(|s| s.provider.supports(query)) {
            if let Some(limiter) = &slot.limiter {
                if limiter.acquire(slot.max_wait).is_err() {
                    first_failure.get_or_insert(UnavailableCause::RateLimited);
                    continue;
                }
            }
            self.requests.fetch_add(1, Ordering::SeqCst);
            let outcome = slot.provider.execute(query);
            match outcome.cause() {
                Some(cause) => {
                    tracing::debug!(provider = slot.provider.name(), %key, ?cause, "lookup unavailable");
                    first_failure.get_or_insert(cause);
                }
                None => {
                    let outcome = post_filter(query, outcome);
                    if let Some(cache) = &self.cache {
                        cache.put(&key, &outcome);
                    }
                    return outcome;
                }
            }
        }
        LookupOutcome::unavailable(first_failure.unwrap_or(UnavailableCause::ProviderUnavailable))
    }

    pub fn lookup_doi(&self, doi: &str) -> LookupOutcome {
        self.lookup(&Query::Doi(doi.to_lowercase()))
    }

    pub fn lookup_arxiv(&self, id: &str) -> LookupOutcome {
        self.lookup(&Query::Arxiv(id.to_owned()))
    }

    /// Candidate records for a title; `Err` carries the outage cause.
    pub fn search_title(&self, title: &str, limit: usize) -> Result<Vec<ResolvedRecord>, UnavailableCause> {
        let outcome = self.lookup(&Query::title(title, limit));
        search_result(outcome, limit)
    }

    /// Records with an author of this surname published within a year of
    /// `year`.
    pub fn search_author_year(
        &self,
        surname: &str,
        year: i32,
        limit: usize,
    ) -> Result<Vec<ResolvedRecord>, UnavailableCause> {
        let outcome = self.lookup(&Query::author_year(surname, year, limit));
        search_result(outcome, limit)
    }

    /// Run identifier lookups, then title search, then author/year search,
    /// stopping as soon as a record confirms the citation.
    pub fn resolve_citation(&self, citation: &ParsedCitation, thresholds: &MatchThresholds) -> ResolutionBundle {
        let mut bundle = ResolutionBundle::empty(&citation.source_key);

        for id in &citation.identifiers {
            let check = check_identifier(id);
            if check.syntax != SyntaxStatus::Valid {
                continue;
            }
            let Some((kind, target)) = check.lookup_target() else {
                continue;
            };
            let query = match kind {
                IdentifierKind::Doi => Query::Doi(target),
                IdentifierKind::ArxivId => Query::Arxiv(target),
                IdentifierKind::Url => continue,
            };
            let key = query.key();
            if bundle.identifier_outcomes.iter().any(|l| l.query == key) {
                continue;
            }
            let outcome = self.lookup(&query);
            bundle.identifier_outcomes.push(IdentifierLookup {
                identifier: id.clone(),
                query: key,
                outcome,
            });
        }
        let confirmed_by_id = bundle
            .identifier_outcomes
            .iter()
            .flat_map(|l| l.outcome.records())
            .any(|r| profile_match(citation, r, thresholds).confirms_identity());
        if confirmed_by_id {
            return bundle;
        }

        if !normalize_text(&citation.title).is_empty() {
            let outcome = self.lookup(&Query::title(&citation.title, self.search_limit));
            bundle.title_search = SearchOutcome::from_lookup(truncate(outcome, self.search_limit));
            let confirmed = best_candidate(citation, bundle.title_candidates(), thresholds)
                .is_some_and(|(_, p)| p.confirms_identity());
            if confirmed {
                return bundle;
            }
        }

        if let (Some(surname), Some(year)) = (citation.first_real_surname(), citation.year) {
            let outcome = self.lookup(&Query::author_year(surname, year, self.search_limit));
            bundle.author_search = SearchOutcome::from_lookup(truncate(outcome, self.search_limit));
        }
        bundle
    }
}

fn search_result(outcome: LookupOutcome, limit: usize) -> Result<Vec<ResolvedRecord>, UnavailableCause> {
    match truncate(outcome, limit) {
        LookupOutcome::Unavailable { cause } => Err(cause),
        other => Ok(other.records().to_vec()),
    }
}

fn truncate(outcome: LookupOutcome, limit: usize) -> LookupOutcome {
    match outcome {
        LookupOutcome::Candidates { mut records } => {
            records.truncate(limit);
            LookupOutcome::Candidates { records }
        }
        other => other,
    }
}

/// Author/year answers keep only records with a matching surname and a
/// year within one of the query year.
fn post_filter(query: &Query, outcome: LookupOutcome) -> LookupOutcome {
    let Query::AuthorYear { surname, year, .. } = query else {
        return outcome;
    };
    let keep = |r: &ResolvedRecord| {
        r.year.is_some_and(|y| (y - year).abs() <= 1) && r.authors.iter().any(|a| &a.surname == surname)
    };
    match outcome {
        LookupOutcome::Candidates { records } => LookupOutcome::Candidates {
            records: records.into_iter().filter(keep).collect(),
        },
        LookupOutcome::Found { record } if keep(&record) => LookupOutcome::Candidates { records: vec![record] },
        LookupOutcome::Found { .. } | LookupOutcome::NotFound => LookupOutcome::Candidates { records: vec![] },
        other => other,
    }
}
