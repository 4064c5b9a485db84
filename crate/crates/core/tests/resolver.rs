mod common;

use std::path::PathBuf;
use std::time::Duration;

use cite_audit_core::classifier::{Classifier, ClassifierConfig};
use cite_audit_core::model::{UnavailableCause, Verdict, VerdictStatus};
use cite_audit_core::parser::{parse_file, parse_plaintext, InputFormat};
use cite_audit_core::resolver::{
    Cache, Config, FixtureProvider, LookupOutcome, ProviderConfig, ProviderKind, Query, Resolver, ResolverOptions,
    UnavailableProvider,
};
use common::stub_server::{max_in_window, stub_bibliography, Mode, StubServer};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn exemplars() -> Vec<cite_audit_core::model::ParsedCitation> {
    parse_file(&fixtures().join("exemplars.txt"), Some(InputFormat::Plaintext))
        .unwrap()
        .citations
}

fn classify_all(resolver: &Resolver, citations: &[cite_audit_core::model::ParsedCitation]) -> Vec<Verdict> {
    Classifier::new(ClassifierConfig::default())
        .classify_batch(resolver, citations)
        .into_iter()
        .map(Result::unwrap)
        .collect()
}

fn stub_config(base: &str, rate_limit: f64) -> Config {
    Config {
        providers: vec![ProviderConfig {
            name: "stub".into(),
            kind: ProviderKind::Crossref,
            base_endpoint: base.into(),
            rate_limit,
            timeout_ms: 30_000,
            enabled: true,
            contact: None,
        }],
        ..Config::default()
    }
}

#[test]
fn second_run_is_served_from_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cache_path = dir.path().join("lookups.jsonl");
    let ttl = Duration::from_secs(3600);
    let citations = exemplars();
    let make = || {
        Resolver::new()
            .with_provider(FixtureProvider::load(&fixtures().join("exemplars.json")).unwrap())
            .with_cache(Cache::open(&cache_path, ttl).unwrap())
    };

    let first = make();
    let before = classify_all(&first, &citations);
    assert!(first.request_count() > 0);
    drop(first);

    let second = make();
    let after = classify_all(&second, &citations);
    assert_eq!(second.request_count(), 0);
    assert_eq!(before, after);
}

#[test]
fn dead_provider_yields_only_unverifiable() {
    let resolver = Resolver::new().with_provider(UnavailableProvider {
        cause: UnavailableCause::Timeout,
    });
    let mut citations = exemplars();
    citations.extend(exemplars().into_iter().map(|mut c| {
        c.source_key.push_str("-again");
        c
    }));
    let verdicts = classify_all(&resolver, &citations);
    assert_eq!(verdicts.len(), 20);
    for v in &verdicts {
        assert_eq!(v.status(), VerdictStatus::Unverifiable, "{}", v.citation_key());
        assert_eq!(v.cause(), Some(UnavailableCause::Timeout));
    }
}

#[test]
fn server_errors_are_outages_and_not_cached() {
    let server = StubServer::start(Mode::Down);
    let resolver = stub_config(&server.base, 50.0)
        .build_resolver(&ResolverOptions::default())
        .unwrap()
        .with_cache(Cache::in_memory(Duration::from_secs(60)));
    let outcome = resolver.lookup(&Query::Doi("10.5555/x".into()));
    assert_eq!(outcome, LookupOutcome::unavailable(UnavailableCause::ServerError));
    assert_eq!(resolver.cache().unwrap().len(), 0);

    let citations = parse_plaintext(&stub_bibliography(3)).citations;
    for v in classify_all(&resolver, &citations) {
        assert_eq!(v.status(), VerdictStatus::Unverifiable);
    }
}

#[test]
fn unreachable_host_is_an_outage() {
    // Bind then drop to get a port nothing listens on.
    let port = std::net::TcpListener::bind("127.0.0.1:0")
        .unwrap()
        .local_addr()
        .unwrap()
        .port();
    let resolver = stub_config(&format!("http://127.0.0.1:{port}"), 50.0)
        .build_resolver(&ResolverOptions::default())
        .unwrap();
    assert!(resolver.lookup(&Query::Doi("10.5555/x".into())).is_unavailable());
}

#[test]
fn healthy_stub_verifies_and_respects_rate() {
    let server = StubServer::start(Mode::Healthy);
    let rate = 20.0;
    let resolver = stub_config(&server.base, rate)
        .build_resolver(&ResolverOptions::default())
        .unwrap();
    let citations = parse_plaintext(&stub_bibliography(30)).citations;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(8).build().unwrap();
    let verdicts = pool.install(|| classify_all(&resolver, &citations));
    assert!(verdicts.iter().all(|v| v.status() == VerdictStatus::Verified));
    assert!(server.paths().iter().all(|p| p.starts_with("/works/10.5555/")));
    let arrivals = server.arrivals();
    assert_eq!(arrivals.len(), 30);
    assert!(max_in_window(&arrivals, Duration::from_secs(1)) <= rate as usize + 1);
}
