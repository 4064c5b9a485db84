use std::path::PathBuf;

use cite_audit_core::classifier::{Classifier, ClassifierConfig};
use cite_audit_core::model::{FailureMode, Outcome, Verdict};
use cite_audit_core::parser::{parse_file, InputFormat};
use cite_audit_core::resolver::{FixtureProvider, Resolver};

use FailureMode::{
    IdentifierHijacking as IH, PartialAttributeCorruption as PAC, PlaceholderHallucination as PH,
    SemanticHallucination as SH, TotalFabrication as TF,
};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn run(config: ClassifierConfig) -> Vec<Verdict> {
    let report = parse_file(&fixtures().join("exemplars.txt"), Some(InputFormat::Plaintext)).unwrap();
    assert_eq!(report.citations.len(), 10);
    let resolver = Resolver::new().with_provider(FixtureProvider::load(&fixtures().join("exemplars.json")).unwrap());
    Classifier::new(config)
        .classify_batch(&resolver, &report.citations)
        .into_iter()
        .map(Result::unwrap)
        .collect()
}

fn codes(v: &Verdict) -> Option<(FailureMode, FailureMode)> {
    match v.outcome() {
        Outcome::Hallucinated { primary, secondary } => Some((primary, secondary)),
        _ => None,
    }
}

#[test]
fn exemplar_primary_codes() {
    let verdicts = run(ClassifierConfig::default());
    let primaries: Vec<Option<FailureMode>> = verdicts.iter().map(|v| v.primary()).collect();
    assert_eq!(
        primaries[..6],
        [Some(TF), Some(PAC), Some(IH), Some(SH), Some(PH), Some(PAC)]
    );
    for v in &verdicts[6..] {
        assert_eq!(v.outcome(), Outcome::Verified, "{}", v.citation_key());
    }
}

#[test]
fn exemplar_secondary_codes() {
    let verdicts = run(ClassifierConfig::default());
    assert_eq!(codes(&verdicts[0]), Some((TF, SH)));
    assert_eq!(codes(&verdicts[2]), Some((IH, SH)));
    assert_eq!(codes(&verdicts[3]), Some((SH, TF)));
    assert_eq!(codes(&verdicts[4]), Some((PH, SH)));
}

#[test]
fn hijacked_record_is_named() {
    let verdicts = run(ClassifierConfig::default());
    let ih = &verdicts[2];
    let record = ih.matched_record().expect("hijacked record");
    assert!(record.title.starts_with("Pre-train, Prompt, and Predict"));
    let item = ih.evidence().iter().find(|e| e.mode == IH).unwrap();
    assert!(item.detail.contains("2107.13586"));
    assert!(item.detail.contains("Pre-train, Prompt, and Predict"));
}

#[test]
fn pac_points_at_the_real_paper() {
    let verdicts = run(ClassifierConfig::default());
    let record = verdicts[1].matched_record().unwrap();
    assert_eq!(record.volume.as_deref(), Some("189"));
    let item = verdicts[1].evidence().iter().find(|e| e.mode == PAC).unwrap();
    assert!(item.detail.contains("title"));
    assert!(item.detail.contains("venue"));
}

#[test]
fn plausible_unknown_titles_are_sh_when_author_check_is_off() {
    let verdicts = run(ClassifierConfig {
        sh_requires_real_author: false,
        ..ClassifierConfig::default()
    });
    assert_eq!(codes(&verdicts[0]), Some((SH, TF)));
    assert_eq!(codes(&verdicts[3]), Some((SH, TF)));
}
