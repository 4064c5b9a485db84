//! Networked providers: Crossref for DOIs and bibliographic search, the
//! arXiv export API for arXiv ids, OpenAlex for title and author search.

use std::time::Duration;

use quick_xml::events::Event;
use serde_json::Value;

use super::{LookupOutcome, Provider, Query};
use crate::model::{normalize_name, Identifier, ResolvedRecord, UnavailableCause};

const USER_AGENT: &str = concat!("cite-audit/", env!("CARGO_PKG_VERSION"));

/// Blocking HTTP client shared by the networked providers.
#[derive(Debug, Clone)]
struct Client {
    base: String,
    agent: ureq::Agent,
}

enum Body {
    Ok(String),
    Missing,
}

impl Client {
    fn new(base: &str, timeout: Duration, contact: Option<&str>) -> Self {
        let user_agent = match contact {
            Some(mail) => format!("{USER_AGENT} (mailto:{mail})"),
            None => USER_AGENT.to_owned(),
        };
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .user_agent(user_agent)
            .build();
        Self {
            base: base.trim_end_matches('/').to_owned(),
            agent: config.into(),
        }
    }

    fn get(&self, path: &str, params: &[(&str, &str)]) -> Result<Body, UnavailableCause> {
        let url = format!("{}{}", self.base, path);
        let mut request = self.agent.get(&url);
        for (k, v) in params {
            request = request.query(*k, *v);
        }
        let mut response = request.call().map_err(transport_cause)?;
        match response.status().as_u16() {
            200..=299 => response
                .body_mut()
                .read_to_string()
                .map(Body::Ok)
                .map_err(transport_cause),
            404 | 410 => Ok(Body::Missing),
            429 => Err(UnavailableCause::RateLimited),
            500..=599 => Err(UnavailableCause::ServerError),
            _ => Err(UnavailableCause::ProviderUnavailable),
        }
    }

    fn get_json(&self, path: &str, params: &[(&str, &str)]) -> Result<Option<Value>, UnavailableCause> {
        match self.get(path, params)? {
            Body::Missing => Ok(None),
            Body::Ok(text) => serde_json::from_str(&text)
                .map(Some)
                .map_err(|_| UnavailableCause::ServerError),
        }
    }
}

fn transport_cause(err: ureq::Error) -> UnavailableCause {
    match err {
        ureq::Error::Timeout(_) => UnavailableCause::Timeout,
        ureq::Error::Io(e) if e.kind() == std::io::ErrorKind::TimedOut => UnavailableCause::Timeout,
        ureq::Error::StatusCode(429) => UnavailableCause::RateLimited,
        ureq::Error::StatusCode(s) if s >= 500 => UnavailableCause::ServerError,
        _ => UnavailableCause::ProviderUnavailable,
    }
}

fn outcome(result: Result<LookupOutcome, UnavailableCause>) -> LookupOutcome {
    result.unwrap_or_else(LookupOutcome::unavailable)
}

fn str_at<'a>(v: &'a Value, path: &[&str]) -> Option<&'a str> {
    path.iter().try_fold(v, |v, k| v.get(k))?.as_str()
}

fn first_str(v: Option<&Value>) -> Option<&str> {
    match v? {
        Value::String(s) => Some(s),
        Value::Array(a) => a.first()?.as_str(),
        _ => None,
    }
}

pub struct CrossrefProvider {
    client: Client,
}

impl CrossrefProvider {
    pub fn new(base: &str, timeout: Duration, contact: Option<&str>) -> Self {
        Self {
            client: Client::new(base, timeout, contact),
        }
    }
}

/// Convert one Crossref work message into a record.
pub fn parse_crossref_work(work: &Value, query: &str) -> Option<ResolvedRecord> {
    let title = first_str(work.get("title"))?.to_owned();
    let authors = work
        .get("author")
        .and_then(Value::as_array)
        .map(|list| {
            list.iter()
                .filter_map(|a| {
                    match (
                        a.get("given").and_then(Value::as_str),
                        a.get("family").and_then(Value::as_str),
                    ) {
                        (Some(g), Some(f)) => Some(format!("{f}, {g}")),
                        (None, Some(f)) => Some(f.to_owned()),
                        _ => a.get("name").and_then(Value::as_str).map(str::to_owned),
                    }
                })
                .map(|n| normalize_name(&n))
                .collect()
        })
        .unwrap_or_default();
    let year = ["published-print", "published-online", "issued", "published"]
        .iter()
        .find_map(|k| work.get(k)?.get("date-parts")?.get(0)?.get(0)?.as_i64())
        .map(|y| y as i32);
    let mut identifiers = Vec::new();
    if let Some(doi) = work.get("DOI").and_then(Value::as_str) {
        identifiers.push(Identifier::doi(doi));
    }
    Some(ResolvedRecord {
        provider: "crossref".into(),
        authors,
        title,
        venue: first_str(work.get("container-title")).unwrap_or_default().to_owned(),
        year,
        volume: work.get("volume").and_then(Value::as_str).map(str::to_owned),
        pages: work.get("page").and_then(Value::as_str).map(str::to_owned),
        identifiers,
        provenance_query: query.to_owned(),
    })
}

impl Provider for CrossrefProvider {
    fn name(&self) -> &str {
        "crossref"
    }

    fn supports(&self, query: &Query) -> bool {
        matches!(query, Query::Doi(_) | Query::Title { .. })
    }

    fn execute(&self, query: &Query) -> LookupOutcome {
        let key = query.key();
        outcome(match query {
            Query::Doi(doi) => self.client.get_json(&format!("/works/{doi}"), &[]).map(|body| {
                match body.as_ref().and_then(|b| parse_crossref_work(b.get("message")?, &key)) {
                    Some(record) => LookupOutcome::Found { record },
                    None => LookupOutcome::NotFound,
                }
            }),
            Query::Title { normalized, limit } => {
                let rows = limit.to_string();
                self.client
                    .get_json("/works", &[("query.bibliographic", normalized), ("rows", &rows)])
                    .map(|body| {
                        let records = body
                            .as_ref()
                            .and_then(|b| b.get("message")?.get("items")?.as_array().cloned())
                            .unwrap_or_default()
                            .iter()
                            .filter_map(|w| parse_crossref_work(w, &key))
                            .collect();
                        LookupOutcome::Candidates { records }
                    })
            }
            _ => Err(UnavailableCause::ProviderUnavailable),
        })
    }
}

pub struct ArxivProvider {
    client: Client,
}

impl ArxivProvider {
    pub fn new(base: &str, timeout: Duration) -> Self {
        Self {
            client: Client::new(base, timeout, None),
        }
    }
}

#[derive(Default)]
struct AtomEntry {
    id: String,
    title: String,
    published: String,
    authors: Vec<String>,
    journal_ref: String,
    doi: String,
}

/// Records from an arXiv Atom feed. Error entries are dropped.
pub fn parse_arxiv_feed(xml: &str, query: &str) -> Result<Vec<ResolvedRecord>, quick_xml::Error> {
    let mut reader = quick_xml::Reader::from_str(xml);
    reader.config_mut().trim_text(true);
    let mut entries = Vec::new();
    let mut current: Option<AtomEntry> = None;
    let mut path: Vec<String> = Vec::new();
    loop {
        match reader.read_event()? {
            Event::Start(e) => {
                let name = String::from_utf8_lossy(e.name().as_ref()).into_owned();
                if name == "entry" {
                    current = Some(AtomEntry::default());
                }
                path.push(name);
            }
            Event::End(_) => {
                if path.pop().as_deref() == Some("entry") {
                    entries.extend(current.take());
                }
            }
            Event::Text(t) => {
                let text = t.unescape()?.into_owned();
                if let (Some(entry), Some(tag)) = (current.as_mut(), path.last()) {
                    let parent = path.len().checked_sub(2).map(|i| path[i].as_str());
                    match (parent, tag.as_str()) {
                        (Some("entry"), "id") => entry.id.push_str(&text),
                        (Some("entry"), "title") => entry.title.push_str(&text),
                        (Some("entry"), "published") => entry.published.push_str(&text),
                        (Some("author"), "name") => entry.authors.push(text),
                        (Some("entry"), "arxiv:journal_ref") => entry.journal_ref.push_str(&text),
                        (Some("entry"), "arxiv:doi") => entry.doi.push_str(&text),
                        _ => {}
                    }
                }
            }
            Event::Eof => break,
            _ => {}
        }
    }
    Ok(entries
        .into_iter()
        .filter(|e| !e.title.trim().is_empty() && !e.id.contains("/api/errors"))
        .map(|e| {
            let mut identifiers = Vec::new();
            if let Some(id) = e.id.rsplit("/abs/").next().filter(|_| e.id.contains("/abs/")) {
                identifiers.push(Identifier::arxiv(id));
            }
            if !e.doi.is_empty() {
                identifiers.push(Identifier::doi(e.doi.trim()));
            }
            ResolvedRecord {
                provider: "arxiv".into(),
                authors: e.authors.iter().map(|a| normalize_name(a)).collect(),
                title: e.title.split_whitespace().collect::<Vec<_>>().join(" "),
                venue: e.journal_ref.trim().to_owned(),
                year: e.published.get(..4).and_then(|y| y.parse().ok()),
                volume: None,
                pages: None,
                identifiers,
                provenance_query: query.to_owned(),
            }
        })
        .collect())
}

impl Provider for ArxivProvider {
    fn name(&self) -> &str {
        "arxiv"
    }

    fn supports(&self, query: &Query) -> bool {
        matches!(query, Query::Arxiv(_))
    }

    fn execute(&self, query: &Query) -> LookupOutcome {
        let Query::Arxiv(id) = query else {
            return LookupOutcome::unavailable(UnavailableCause::ProviderUnavailable);
        };
        let key = query.key();
        outcome(
            self.client
                .get("/query", &[("id_list", id)])
                .and_then(|body| match body {
                    Body::Missing => Ok(LookupOutcome::NotFound),
                    Body::Ok(xml) => {
                        let records = parse_arxiv_feed(&xml, &key).map_err(|_| UnavailableCause::ServerError)?;
                        Ok(match records.into_iter().next() {
                            Some(record) => LookupOutcome::Found { record },
                            None => LookupOutcome::NotFound,
                        })
                    }
                }),
        )
    }
}

pub struct OpenAlexProvider {
    client: Client,
}

impl OpenAlexProvider {
    pub fn new(base: &str, timeout: Duration, contact: Option<&str>) -> Self {
        Self {
            client: Client::new(base, timeout, contact),
        }
    }
}

/// Convert one OpenAlex work object into a record.
pub fn parse_openalex_work(work: &Value, query: &str) -> Option<ResolvedRecord> {
    let title = work
        .get("title")
        .or_else(|| work.get("display_name"))
        .and_then(Value::as_str)?
        .to_owned();
    let authors = work
        .get("authorships")
        .and_then(Value::as_array)
        .map(|list| {
            list.iter()
                .filter_map(|a| str_at(a, &["author", "display_name"]).or_else(|| str_at(a, &["raw_author_name"])))
                .map(normalize_name)
                .collect()
        })
        .unwrap_or_default();
    let pages = match (
        str_at(work, &["biblio", "first_page"]),
        str_at(work, &["biblio", "last_page"]),
    ) {
        (Some(f), Some(l)) if f != l => Some(format!("{f}-{l}")),
        (Some(f), _) => Some(f.to_owned()),
        _ => None,
    };
    let mut identifiers = Vec::new();
    if let Some(doi) = work.get("doi").and_then(Value::as_str) {
        identifiers.push(Identifier::url(doi));
    }
    Some(ResolvedRecord {
        provider: "openalex".into(),
        authors,
        title,
        venue: str_at(work, &["primary_location", "source", "display_name"])
            .unwrap_or_default()
            .to_owned(),
        year: work.get("publication_year").and_then(Value::as_i64).map(|y| y as i32),
        volume: str_at(work, &["biblio", "volume"]).map(str::to_owned),
        pages,
        identifiers,
        provenance_query: query.to_owned(),
    })
}

impl Provider for OpenAlexProvider {
    fn name(&self) -> &str {
        "openalex"
    }

    fn supports(&self, query: &Query) -> bool {
        matches!(query, Query::Title { .. } | Query::AuthorYear { .. } | Query::Doi(_))
    }

    fn execute(&self, query: &Query) -> LookupOutcome {
        let key = query.key();
        let search = |params: &[(&str, &str)]| {
            self.client.get_json("/works", params).map(|body| {
                let records = body
                    .as_ref()
                    .and_then(|b| b.get("results")?.as_array().cloned())
                    .unwrap_or_default()
                    .iter()
                    .filter_map(|w| parse_openalex_work(w, &key))
                    .collect();
                LookupOutcome::Candidates { records }
            })
        };
        outcome(match query {
            Query::Doi(doi) => self.client.get_json(&format!("/works/doi:{doi}"), &[]).map(|body| {
                match body.as_ref().and_then(|w| parse_openalex_work(w, &key)) {
                    Some(record) => LookupOutcome::Found { record },
                    None => LookupOutcome::NotFound,
                }
            }),
            Query::Title { normalized, limit } => {
                let per_page = limit.to_string();
                search(&[("search", normalized), ("per-page", &per_page)])
            }
            Query::AuthorYear { surname, year, limit } => {
                let filter = format!(
                    "raw_author_name.search:{surname},publication_year:{}-{}",
                    year - 1,
                    year + 1
                );
                let per_page = limit.to_string();
                search(&[("filter", &filter), ("per-page", &per_page)])
            }
            Query::Arxiv(_) => Err(UnavailableCause::ProviderUnavailable),
        })
    }
}
