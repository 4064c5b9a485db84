//! Turns a citation and its resolution bundle into a verdict.

use once_cell::sync::Lazy;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::ClassifyError;
use crate::identifiers::scan_placeholders_with;
use crate::matching::{best_candidate, profile_match, title_plausibility, MatchThresholds, Vocabulary};
use crate::model::{
    AuthorName, EvidenceItem, FailureMode, FieldMatch, FieldMatchProfile, ParsedCitation, PlaceholderTokens,
    ResolvedRecord, Verdict,
};
use crate::resolver::{LookupOutcome, ResolutionBundle, Resolver};

use FailureMode::{
    IdentifierHijacking as IH, PartialAttributeCorruption as PAC, PlaceholderHallucination as PH,
    SemanticHallucination as SH, TotalFabrication as TF,
};

static BUNDLED_VOCAB: Lazy<Vocabulary> = Lazy::new(Vocabulary::bundled);

/// Order in which leftover evidence is promoted to the secondary code.
const SECONDARY_ORDER: [FailureMode; 5] = [SH, IH, PH, PAC, TF];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierConfig {
    #[serde(flatten)]
    pub thresholds: MatchThresholds,
    /// Name tokens that mark a template author.
    pub placeholder_tokens: Vec<String>,
    /// SH as primary needs at least one claimed author found in a provider.
    pub sh_requires_real_author: bool,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            thresholds: MatchThresholds::default(),
            placeholder_tokens: PlaceholderTokens::default().tokens().to_vec(),
            sh_requires_real_author: true,
        }
    }
}

pub struct Classifier {
    config: ClassifierConfig,
    placeholders: PlaceholderTokens,
    vocab: Option<Vocabulary>,
}

/// One identifier lookup that returned a record, with its match profile.
struct IdentifierHit<'a> {
    label: String,
    record: &'a ResolvedRecord,
    profile: FieldMatchProfile,
}

impl Classifier {
    /// Uses the bundled title vocabulary.
    pub fn new(config: ClassifierConfig) -> Self {
        let placeholders = PlaceholderTokens::new(&config.placeholder_tokens);
        Self {
            config,
            placeholders,
            vocab: None,
        }
    }

    pub fn with_vocabulary(mut self, vocab: Vocabulary) -> Self {
        self.vocab = Some(vocab);
        self
    }

    pub fn config(&self) -> &ClassifierConfig {
        &self.config
    }

    fn vocab(&self) -> &Vocabulary {
        self.vocab.as_ref().unwrap_or(&BUNDLED_VOCAB)
    }

    pub fn classify(&self, citation: &ParsedCitation, bundle: &ResolutionBundle) -> Result<Verdict, ClassifyError> {
        if bundle.citation_key != citation.source_key {
            return Err(ClassifyError::BundleMismatch {
                citation: citation.source_key.clone(),
                bundle: bundle.citation_key.clone(),
            });
        }
        let key = citation.source_key.as_str();
        let raw = citation.raw_text.as_str();
        if let Some(cause) = bundle.outage_cause() {
            return Ok(Verdict::unverifiable(key, raw, cause));
        }
        let t = &self.config.thresholds;

        let id_hits: Vec<IdentifierHit> = bundle
            .identifier_outcomes
            .iter()
            .filter_map(|l| match &l.outcome {
                LookupOutcome::Found { record } => Some(IdentifierHit {
                    label: l.identifier.to_string(),
                    record,
                    profile: profile_match(citation, record, t),
                }),
                _ => None,
            })
            .collect();
        let candidates: Vec<ResolvedRecord> = bundle
            .title_candidates()
            .iter()
            .chain(bundle.author_candidates())
            .cloned()
            .collect();
        let best = best_candidate(citation, &candidates, t);

        if let Some(hit) = id_hits.iter().find(|h| h.profile.confirms_identity()) {
            return Ok(Verdict::verified(key, raw, hit.record.clone(), Vec::new()));
        }
        if let Some((record, _)) = best.as_ref().filter(|(_, p)| verifies(p, citation)) {
            return Ok(Verdict::verified(key, raw, record.clone(), Vec::new()));
        }

        let mut evidence = scan_placeholders_with(citation, &self.placeholders);
        let has_ph = !evidence.is_empty();
        if !has_ph {
            if let Some(cause) = partial_outage(bundle) {
                return Ok(Verdict::unverifiable(key, raw, cause));
            }
        }

        let hijacked: Vec<&IdentifierHit> = id_hits
            .iter()
            .filter(|h| h.profile.title_match == FieldMatch::Mismatch || h.profile.author_match == FieldMatch::Mismatch)
            .collect();
        for hit in &hijacked {
            evidence.push(EvidenceItem::scored(
                IH,
                Some("identifiers"),
                format!(
                    "{} resolves to a different work: {}",
                    hit.label,
                    hit.record.short_description()
                ),
                hit.profile.title_similarity,
            ));
        }

        if let Some((record, profile)) = best.as_ref().filter(|(_, p)| p.has_strong_match() && p.has_mismatch()) {
            let anchored = if profile.author_match == FieldMatch::Match {
                "authors"
            } else {
                "title"
            };
            evidence.push(EvidenceItem::scored(
                PAC,
                Some(anchored),
                format!(
                    "{anchored} match {} but {} differ",
                    record.short_description(),
                    profile.mismatched_fields().join(", ")
                ),
                profile.author_similarity.max(profile.title_similarity),
            ));
        }

        let all_profiles: Vec<&FieldMatchProfile> = id_hits
            .iter()
            .map(|h| &h.profile)
            .chain(best.iter().map(|(_, p)| p))
            .collect();
        let plausibility = title_plausibility(&citation.title, self.vocab());
        let title_found = all_profiles.iter().any(|p| p.title_match == FieldMatch::Match);
        let plausible = !citation.title.trim().is_empty() && plausibility >= t.plausibility;
        if !title_found && plausible {
            evidence.push(EvidenceItem::scored(
                SH,
                Some("title"),
                "title reads as in-field but no provider knows it",
                plausibility,
            ));
        }

        if !all_profiles.iter().any(|p| p.has_strong_match()) {
            evidence.push(EvidenceItem::new(
                TF,
                None,
                "no provider returned a record matching the authors or title",
            ));
        } else if evidence.is_empty() {
            evidence.push(EvidenceItem::new(
                TF,
                None,
                "no single record matches both the authors and the title",
            ));
        }

        let has = |m: FailureMode| evidence.iter().any(|e| e.mode == m);
        let ih_fits = hijacked.iter().any(|h| {
            let year_close = match (citation.year, h.record.year) {
                (Some(a), Some(b)) => (a - b).abs() <= t.year_slack,
                _ => false,
            };
            h.profile.title_similarity >= t.title_moderate || year_close
        });
        let primary = if has(PH) {
            PH
        } else if has(PAC) {
            PAC
        } else if ih_fits {
            IH
        } else if has(SH)
            && (!self.config.sh_requires_real_author || self.author_confirmed(citation, bundle.author_candidates()))
        {
            SH
        } else {
            TF
        };

        let secondary = SECONDARY_ORDER
            .into_iter()
            .find(|m| *m != primary && has(*m))
            .or_else(|| {
                let ladder = [
                    (SH, plausibility >= t.plausibility),
                    (IH, !citation.identifiers.is_empty()),
                    (PAC, true),
                ];
                ladder.into_iter().find(|(m, ok)| *ok && *m != primary).map(|(m, _)| m)
            })
            .or_else(|| SECONDARY_ORDER.into_iter().find(|m| *m != primary))
            .expect("five modes always leave one besides the primary");

        let matched = match primary {
            IH => hijacked.first().map(|h| h.record.clone()),
            _ => best.filter(|(_, p)| p.has_strong_match()).map(|(r, _)| r),
        };
        Ok(Verdict::hallucinated(key, raw, primary, secondary, evidence, matched)
            .expect("secondary is chosen distinct from primary"))
    }

    /// Some author search result lists a claimed, non-template surname.
    fn author_confirmed(&self, citation: &ParsedCitation, found: &[ResolvedRecord]) -> bool {
        let real: Vec<&AuthorName> = citation
            .authors
            .iter()
            .filter(|a| {
                !a.is_placeholder
                    && !a.surname.is_empty()
                    && !a.surname.split(' ').any(|t| self.placeholders.contains(t))
            })
            .collect();
        found
            .iter()
            .flat_map(|r| &r.authors)
            .any(|ra| real.iter().any(|a| a.surname == ra.surname))
    }

    pub fn classify_one(&self, resolver: &Resolver, citation: &ParsedCitation) -> Result<Verdict, ClassifyError> {
        let bundle = resolver.resolve_citation(citation, &self.config.thresholds);
        self.classify(citation, &bundle)
    }

    /// Resolves and classifies in parallel; output order follows input order.
    pub fn classify_batch(
        &self,
        resolver: &Resolver,
        citations: &[ParsedCitation],
    ) -> Vec<Result<Verdict, ClassifyError>> {
        citations.par_iter().map(|c| self.classify_one(resolver, c)).collect()
    }
}

/// Identity confirmed, or the title matches exactly and nothing claimed
/// contradicts the record.
fn verifies(profile: &FieldMatchProfile, citation: &ParsedCitation) -> bool {
    profile.confirms_identity()
        || (citation.authors.is_empty() && profile.title_match == FieldMatch::Match && !profile.has_mismatch())
}

/// Cause of the first unanswered lookup when some, but not all, went unanswered.
fn partial_outage(bundle: &ResolutionBundle) -> Option<crate::model::UnavailableCause> {
    bundle
        .identifier_outcomes
        .iter()
        .filter_map(|l| l.outcome.cause())
        .chain(
            [&bundle.title_search, &bundle.author_search]
                .into_iter()
                .filter_map(|s| match s {
                    crate::resolver::SearchOutcome::Unavailable { cause } => Some(*cause),
                    _ => None,
                }),
        )
        .next()
}

/// Classifies with the default configuration and bundled vocabulary.
pub fn classify(citation: &ParsedCitation, bundle: &ResolutionBundle) -> Result<Verdict, ClassifyError> {
    Classifier::new(ClassifierConfig::default()).classify(citation, bundle)
}
