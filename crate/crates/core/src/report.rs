//! Verification reports and the process exit-code contract.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{FailureMode, Outcome, Verdict, VerdictStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Text,
    Json,
    Csv,
}

/// Which verdicts make a run fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FailOn {
    /// Only hallucinations fail the run; outages exit cleanly.
    Hallucinated,
    /// Hallucinations exit 1, outages exit 2.
    #[default]
    Unverifiable,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_HALLUCINATED: i32 = 1;
pub const EXIT_UNVERIFIABLE: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

pub fn exit_code(verdicts: &[Verdict], fail_on: FailOn) -> i32 {
    let has = |s: VerdictStatus| verdicts.iter().any(|v| v.status() == s);
    if has(VerdictStatus::Hallucinated) {
        EXIT_HALLUCINATED
    } else if has(VerdictStatus::Unverifiable) && fail_on == FailOn::Unverifiable {
        EXIT_UNVERIFIABLE
    } else {
        EXIT_OK
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ReportSummary {
    pub verified: usize,
    pub hallucinated: usize,
    pub unverifiable: usize,
    pub by_primary: BTreeMap<FailureMode, usize>,
}

impl ReportSummary {
    pub fn of(verdicts: &[Verdict]) -> Self {
        let mut s = ReportSummary {
            by_primary: FailureMode::ALL.iter().map(|m| (*m, 0)).collect(),
            ..Default::default()
        };
        for v in verdicts {
            match v.outcome() {
                Outcome::Verified => s.verified += 1,
                Outcome::Hallucinated { primary, .. } => {
                    s.hallucinated += 1;
                    *s.by_primary.entry(primary).or_default() += 1;
                }
                Outcome::Unverifiable { .. } => s.unverifiable += 1,
            }
        }
        s
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub input: String,
    pub n_citations: usize,
    pub verdicts: Vec<Verdict>,
    pub summary: ReportSummary,
}

impl Report {
    pub fn new(input: impl Into<String>, verdicts: Vec<Verdict>) -> Self {
        Self {
            input: input.into(),
            n_citations: verdicts.len(),
            summary: ReportSummary::of(&verdicts),
            verdicts,
        }
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Json => serde_json::to_string_pretty(self).expect("report serializes") + "\n",
            ReportFormat::Text => self.render_text(),
            ReportFormat::Csv => self.render_csv(),
        }
    }

    fn render_text(&self) -> String {
        let mut out = String::new();
        for v in &self.verdicts {
            let status = match v.outcome() {
                Outcome::Verified => "VERIFIED".to_owned(),
                Outcome::Hallucinated { primary, secondary } => format!("HALLUCINATED {primary}/{secondary}"),
                Outcome::Unverifiable { cause } => format!("UNVERIFIABLE ({cause})"),
            };
            out.push_str(&format!(
                "[{}] {status}\n    {}\n",
                v.citation_key(),
                v.raw_text().trim()
            ));
            for e in v.evidence() {
                let field = e.field.as_deref().map(|f| format!(" {f}")).unwrap_or_default();
                out.push_str(&format!("    - {}{field}: {}\n", e.mode, e.detail));
            }
            if let Some(r) = v.matched_record() {
                out.push_str(&format!("    record ({}): {}\n", r.provider, r.short_description()));
            }
        }
        let s = &self.summary;
        out.push_str(&format!(
            "\n{} citations: {} verified, {} hallucinated, {} unverifiable\n",
            self.n_citations, s.verified, s.hallucinated, s.unverifiable
        ));
        let codes: Vec<String> = s
            .by_primary
            .iter()
            .filter(|(_, n)| **n > 0)
            .map(|(m, n)| format!("{m} {n}"))
            .collect();
        if !codes.is_empty() {
            out.push_str(&format!("primary codes: {}\n", codes.join(", ")));
        }
        out
    }

    fn render_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "citation_key",
            "status",
            "primary",
            "secondary",
            "cause",
            "matched_record",
            "raw_text",
        ])
        .expect("in-memory write");
        for v in &self.verdicts {
            let (primary, secondary, cause) = match v.outcome() {
                Outcome::Verified => (String::new(), String::new(), String::new()),
                Outcome::Hallucinated { primary, secondary } => {
                    (primary.to_string(), secondary.to_string(), String::new())
                }
                Outcome::Unverifiable { cause } => (String::new(), String::new(), cause.to_string()),
            };
            let status = serde_json::to_value(v.status()).expect("status serializes");
            let matched = v.matched_record().map(|r| r.short_description()).unwrap_or_default();
            w.write_record([
                v.citation_key(),
                status.as_str().unwrap_or_default(),
                &primary,
                &secondary,
                &cause,
                &matched,
                v.raw_text().trim(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv is utf-8")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ResolvedRecord, UnavailableCause};
    use proptest::prelude::*;

    fn record() -> ResolvedRecord {
        ResolvedRecord {
            provider: "p".into(),
            authors: vec![],
            title: "T".into(),
            venue: String::new(),
            year: None,
            volume: None,
            pages: None,
            identifiers: vec![],
            provenance_query: String::new(),
        }
    }

    fn verdict(kind: u8) -> Verdict {
        match kind {
            0 => Verdict::verified("k", "r", record(), vec![]),
            1 => Verdict::hallucinated(
                "k",
                "r",
                FailureMode::TotalFabrication,
                FailureMode::SemanticHallucination,
                vec![],
                None,
            )
            .unwrap(),
            _ => Verdict::unverifiable("k", "r", UnavailableCause::Timeout),
        }
    }

    proptest! {
        #[test]
        fn exit_code_contract(kinds in prop::collection::vec(0u8..3, 0..12)) {
            let verdicts: Vec<Verdict> = kinds.iter().map(|k| verdict(*k)).collect();
            let (h, u) = (kinds.contains(&1), kinds.contains(&2));
            let expected = if h { 1 } else if u { 2 } else { 0 };
            prop_assert_eq!(exit_code(&verdicts, FailOn::Unverifiable), expected);
            prop_assert_eq!(exit_code(&verdicts, FailOn::Hallucinated), if h { 1 } else { 0 });
            let s = ReportSummary::of(&verdicts);
            prop_assert_eq!(s.verified + s.hallucinated + s.unverifiable, verdicts.len());
        }
    }

    #[test]
    fn csv_has_one_row_per_verdict() {
        let report = Report::new("x.bib", vec![verdict(0), verdict(1), verdict(2)]);
        let csv = report.render(ReportFormat::Csv);
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.contains("k,hallucinated,TF,SH,,,r"));
        assert!(csv.contains("k,unverifiable,,,timeout,,r"));
    }
}
