use serde::{Deserialize, Serialize};

use super::{EvidenceItem, FailureMode, ResolvedRecord, UnavailableCause};
use crate::error::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    Verified,
    Hallucinated,
    Unverifiable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Verified,
    Hallucinated {
        primary: FailureMode,
        secondary: FailureMode,
    },
    Unverifiable {
        cause: UnavailableCause,
    },
}

/// The final judgement on one citation.
///
/// Construction goes through [`Verdict::verified`], [`Verdict::hallucinated`]
/// and [`Verdict::unverifiable`], which uphold the shape rules: verified
/// verdicts carry the record they matched, hallucinated ones carry two
/// distinct codes, unverifiable ones carry only a cause.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    citation_key: String,
    raw_text: String,
    outcome: Outcome,
    evidence: Vec<EvidenceItem>,
    matched_record: Option<ResolvedRecord>,
}

impl Verdict {
    pub fn verified(
        citation_key: impl Into<String>,
        raw_text: impl Into<String>,
        record: ResolvedRecord,
        evidence: Vec<EvidenceItem>,
    ) -> Self {
        Self {
            citation_key: citation_key.into(),
            raw_text: raw_text.into(),
            outcome: Outcome::Verified,
            evidence,
            matched_record: Some(record),
        }
    }

    pub fn hallucinated(
        citation_key: impl Into<String>,
        raw_text: impl Into<String>,
        primary: FailureMode,
        secondary: FailureMode,
        evidence: Vec<EvidenceItem>,
        matched_record: Option<ResolvedRecord>,
    ) -> Result<Self, ModelError> {
        if primary == secondary {
            return Err(ModelError::SameCodes(primary));
        }
        Ok(Self {
            citation_key: citation_key.into(),
            raw_text: raw_text.into(),
            outcome: Outcome::Hallucinated { primary, secondary },
            evidence,
            matched_record,
        })
    }

    pub fn unverifiable(citation_key: impl Into<String>, raw_text: impl Into<String>, cause: UnavailableCause) -> Self {
        Self {
            citation_key: citation_key.into(),
            raw_text: raw_text.into(),
            outcome: Outcome::Unverifiable { cause },
            evidence: Vec::new(),
            matched_record: None,
        }
    }

    pub fn status(&self) -> VerdictStatus {
        match self.outcome {
            Outcome::Verified => VerdictStatus::Verified,
            Outcome::Hallucinated { .. } => VerdictStatus::Hallucinated,
            Outcome::Unverifiable { .. } => VerdictStatus::Unverifiable,
        }
    }

    pub fn outcome(&self) -> Outcome {
        self.outcome
    }

    pub fn primary(&self) -> Option<FailureMode> {
        match self.outcome {
            Outcome::Hallucinated { primary, .. } => Some(primary),
            _ => None,
        }
    }

    pub fn secondary(&self) -> Option<FailureMode> {
        match self.outcome {
            Outcome::Hallucinated { secondary, .. } => Some(secondary),
            _ => None,
        }
    }

    pub fn cause(&self) -> Option<UnavailableCause> {
        match self.outcome {
            Outcome::Unverifiable { cause } => Some(cause),
            _ => None,
        }
    }

    pub fn citation_key(&self) -> &str {
        &self.citation_key
    }

    pub fn raw_text(&self) -> &str {
        &self.raw_text
    }

    pub fn evidence(&self) -> &[EvidenceItem] {
        &self.evidence
    }

    pub fn matched_record(&self) -> Option<&ResolvedRecord> {
        self.matched_record.as_ref()
    }
}

/// Wire form; field order here is the JSON key order.
#[derive(Serialize, Deserialize)]
struct VerdictJson {
    status: VerdictStatus,
    citation_key: String,
    primary: Option<FailureMode>,
    secondary: Option<FailureMode>,
    cause: Option<UnavailableCause>,
    evidence: Vec<EvidenceItem>,
    matched_record: Option<ResolvedRecord>,
    raw_text: String,
}

impl From<&Verdict> for VerdictJson {
    fn from(v: &Verdict) -> Self {
        VerdictJson {
            status: v.status(),
            citation_key: v.citation_key.clone(),
            primary: v.primary(),
            secondary: v.secondary(),
            cause: v.cause(),
            evidence: v.evidence.clone(),
            matched_record: v.matched_record.clone(),
            raw_text: v.raw_text.clone(),
        }
    }
}

impl TryFrom<VerdictJson> for Verdict {
    type Error = ModelError;

    fn try_from(w: VerdictJson) -> Result<Self, Self::Error> {
        let bad = |msg: &str| ModelError::MalformedVerdict(msg.to_owned());
        match w.status {
            VerdictStatus::Verified => {
                if w.primary.is_some() || w.secondary.is_some() || w.cause.is_some() {
                    return Err(bad("verified verdict carries failure codes or a cause"));
                }
                let record = w
                    .matched_record
                    .ok_or_else(|| bad("verified verdict without matched_record"))?;
                Ok(Verdict::verified(w.citation_key, w.raw_text, record, w.evidence))
            }
            VerdictStatus::Hallucinated => {
                let (Some(primary), Some(secondary)) = (w.primary, w.secondary) else {
                    return Err(bad("hallucinated verdict needs primary and secondary"));
                };
                if w.cause.is_some() {
                    return Err(bad("hallucinated verdict carries a cause"));
                }
                Verdict::hallucinated(
                    w.citation_key,
                    w.raw_text,
                    primary,
                    secondary,
                    w.evidence,
                    w.matched_record,
                )
            }
            VerdictStatus::Unverifiable => {
                if w.primary.is_some() || w.secondary.is_some() {
                    return Err(bad("unverifiable verdict carries failure codes"));
                }
                let cause = w.cause.ok_or_else(|| bad("unverifiable verdict without cause"))?;
                let mut v = Verdict::unverifiable(w.citation_key, w.raw_text, cause);
                v.evidence = w.evidence;
                v.matched_record = w.matched_record;
                Ok(v)
            }
        }
    }
}

impl Serialize for Verdict {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        VerdictJson::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Verdict {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let wire = VerdictJson::deserialize(deserializer)?;
        Verdict::try_from(wire).map_err(serde::de::Error::custom)
    }
}

pub fn serialize_verdict(verdict: &Verdict) -> String {
    serde_json::to_string(verdict).expect("verdict serialization is infallible")
}

pub fn parse_verdict(json: &str) -> Result<Verdict, ModelError> {
    let wire: VerdictJson = serde_json::from_str(json)?;
    Verdict::try_from(wire)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{normalize_name, Identifier};
    use proptest::prelude::*;

    fn record() -> ResolvedRecord {
        ResolvedRecord {
            provider: "fixture".into(),
            authors: vec![normalize_name("Ashish Vaswani"), normalize_name("Noam Shazeer")],
            title: "Attention is all you need".into(),
            venue: "NeurIPS".into(),
            year: Some(2017),
            volume: None,
            pages: None,
            identifiers: vec![Identifier::arxiv("1706.03762")],
            provenance_query: "arxiv:1706.03762".into(),
        }
    }

    #[test]
    fn verified_json_has_record() {
        let v = Verdict::verified("vaswani2017", "Vaswani et al. 2017", record(), vec![]);
        let json = serialize_verdict(&v);
        assert!(json.starts_with(r#"{"status":"verified","citation_key":"vaswani2017""#));
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert!(value["matched_record"].is_object());
        assert_eq!(parse_verdict(&json).unwrap(), v);
    }

    #[test]
    fn hallucinated_json_has_codes() {
        let v = Verdict::hallucinated(
            "smith2021",
            "John Smith and Jane Doe. ...",
            FailureMode::TotalFabrication,
            FailureMode::SemanticHallucination,
            vec![EvidenceItem::scored(
                FailureMode::SemanticHallucination,
                Some("title"),
                "plausible title",
                0.875,
            )],
            None,
        )
        .unwrap();
        let json = serialize_verdict(&v);
        assert!(json.contains(r#""primary":"TF","secondary":"SH""#));
        assert_eq!(parse_verdict(&json).unwrap(), v);
    }

    #[test]
    fn unverifiable_json_has_cause() {
        let v = Verdict::unverifiable("k", "text", UnavailableCause::ProviderUnavailable);
        let json = serialize_verdict(&v);
        assert!(json.contains(r#""status":"unverifiable""#));
        assert!(json.contains(r#""cause":"provider_unavailable""#));
        assert_eq!(parse_verdict(&json).unwrap(), v);
    }

    #[test]
    fn malformed_verdicts_rejected() {
        assert!(Verdict::hallucinated(
            "k",
            "t",
            FailureMode::TotalFabrication,
            FailureMode::TotalFabrication,
            vec![],
            None
        )
        .is_err());
        let no_record = r#"{"status":"verified","citation_key":"k","primary":null,"secondary":null,"cause":null,"evidence":[],"matched_record":null,"raw_text":"t"}"#;
        assert!(parse_verdict(no_record).is_err());
        let one_code = r#"{"status":"hallucinated","citation_key":"k","primary":"TF","secondary":null,"cause":null,"evidence":[],"matched_record":null,"raw_text":"t"}"#;
        assert!(parse_verdict(one_code).is_err());
    }

    fn mode() -> impl Strategy<Value = FailureMode> {
        prop::sample::select(FailureMode::ALL.to_vec())
    }

    fn verdict() -> impl Strategy<Value = Verdict> {
        let evidence = prop::collection::vec(
            (mode(), "[a-z ]{1,12}", prop::option::of(0.0f64..1.0)).prop_map(|(m, d, s)| EvidenceItem {
                mode: m,
                detail: d,
                field: Some("title".into()),
                score: s,
            }),
            0..3,
        );
        let cause = prop::sample::select(vec![
            UnavailableCause::Timeout,
            UnavailableCause::ServerError,
            UnavailableCause::RateLimited,
            UnavailableCause::Offline,
            UnavailableCause::ProviderUnavailable,
        ]);
        (0u8..3, mode(), mode(), evidence, cause, "[a-z0-9]{1,8}").prop_map(|(kind, p, s, ev, cause, key)| match kind {
            0 => Verdict::verified(key, "raw", record(), ev),
            1 if p != s => Verdict::hallucinated(key, "raw", p, s, ev, Some(record())).unwrap(),
            _ => Verdict::unverifiable(key, "raw", cause),
        })
    }

    proptest! {
        #[test]
        fn verdict_json_round_trips(v in verdict()) {
            let json = serialize_verdict(&v);
            prop_assert_eq!(parse_verdict(&json).unwrap(), v);
        }
    }
}
