//! Statistics over a coded corpus of hallucinated citations.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CorpusError, RowError};
use crate::model::FailureMode;

pub const CORPUS_HEADER: [&str; 5] = ["paper_id", "citation_text", "primary", "secondary", "notes"];

/// Default per-paper bucket upper bounds: 1-2, 3-6, 7+.
pub const DEFAULT_BUCKETS: [usize; 2] = [2, 6];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodedRow {
    pub paper_id: String,
    pub citation_text: String,
    pub primary: FailureMode,
    pub secondary: FailureMode,
    pub notes: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SummaryFormat {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionSummary {
    pub primary_counts: BTreeMap<FailureMode, usize>,
    pub secondary_counts: BTreeMap<FailureMode, usize>,
    pub n_citations: usize,
    pub n_papers: usize,
    pub per_paper: BTreeMap<String, usize>,
    pub mean: f64,
    pub median: f64,
    pub min: usize,
    pub max: usize,
    /// Paper counts keyed by bucket label, in bucket order.
    pub buckets: Vec<(String, usize)>,
    pub compound_rate: f64,
}

pub fn load_corpus(path: &Path) -> Result<Vec<CodedRow>, CorpusError> {
    read_corpus(std::fs::File::open(path)?)
}

/// Parses CSV with the fixed corpus header. Every bad row is reported, not
/// just the first.
pub fn read_corpus<R: Read>(reader: R) -> Result<Vec<CodedRow>, CorpusError> {
    let mut csv = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let header = match csv.headers() {
        Ok(h) => h.clone(),
        Err(e) => return Err(CorpusError::BadHeader(e.to_string())),
    };
    if header.iter().map(str::trim).ne(CORPUS_HEADER) {
        return Err(CorpusError::BadHeader(header.iter().collect::<Vec<_>>().join(",")));
    }

    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for (index, record) in csv.records().enumerate() {
        let fallback_line = index as u64 + 2;
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(fallback_line, |p| p.line());
                errors.push(RowError {
                    line,
                    column: None,
                    message: e.to_string(),
                });
                continue;
            }
        };
        let line = record.position().map_or(fallback_line, |p| p.line());
        let err = |column: &str, message: String| RowError {
            line,
            column: Some(column.to_owned()),
            message,
        };
        if record.len() != CORPUS_HEADER.len() {
            errors.push(RowError {
                line,
                column: None,
                message: format!("expected {} fields, found {}", CORPUS_HEADER.len(), record.len()),
            });
            continue;
        }
        let paper_id = record[0].trim();
        if paper_id.is_empty() {
            errors.push(err("paper_id", "empty paper id".into()));
        }
        let primary = record[2]
            .parse::<FailureMode>()
            .map_err(|_| err("primary", format!("unknown code {:?}", &record[2])));
        let secondary = record[3]
            .parse::<FailureMode>()
            .map_err(|_| err("secondary", format!("unknown code {:?}", &record[3])));
        match (primary, secondary) {
            (Ok(primary), Ok(secondary)) if !paper_id.is_empty() => rows.push(CodedRow {
                paper_id: paper_id.to_owned(),
                citation_text: record[1].to_owned(),
                primary,
                secondary,
                notes: record[4].to_owned(),
            }),
            (p, s) => errors.extend(p.err().into_iter().chain(s.err())),
        }
    }
    if errors.is_empty() {
        Ok(rows)
    } else {
        Err(CorpusError::Rows(errors))
    }
}

pub fn summarize(rows: &[CodedRow]) -> Result<DistributionSummary, CorpusError> {
    summarize_with_buckets(rows, &DEFAULT_BUCKETS)
}

/// `upper_bounds` are inclusive, ascending bucket ceilings; a final open
/// bucket collects everything above the last one.
pub fn summarize_with_buckets(rows: &[CodedRow], upper_bounds: &[usize]) -> Result<DistributionSummary, CorpusError> {
    if rows.is_empty() {
        return Err(CorpusError::Empty);
    }
    let zeroed = || FailureMode::ALL.iter().map(|m| (*m, 0)).collect::<BTreeMap<_, _>>();
    let mut primary_counts = zeroed();
    let mut secondary_counts = zeroed();
    let mut per_paper: BTreeMap<String, usize> = BTreeMap::new();
    for row in rows {
        *primary_counts.get_mut(&row.primary).unwrap() += 1;
        *secondary_counts.get_mut(&row.secondary).unwrap() += 1;
        *per_paper.entry(row.paper_id.clone()).or_default() += 1;
    }

    let mut counts: Vec<usize> = per_paper.values().copied().collect();
    counts.sort_unstable();
    let n = counts.len();
    let median = if n % 2 == 1 {
        counts[n / 2] as f64
    } else {
        (counts[n / 2 - 1] + counts[n / 2]) as f64 / 2.0
    };

    let mut buckets: Vec<(String, usize)> = Vec::with_capacity(upper_bounds.len() + 1);
    let mut low = 1;
    for &high in upper_bounds {
        buckets.push((
            format!("{low}-{high}"),
            counts.iter().filter(|&&c| (low..=high).contains(&c)).count(),
        ));
        low = high + 1;
    }
    buckets.push((format!("{low}+"), counts.iter().filter(|&&c| c >= low).count()));

    let compound = rows.iter().filter(|r| r.primary != r.secondary).count();
    Ok(DistributionSummary {
        n_citations: rows.len(),
        n_papers: n,
        mean: rows.len() as f64 / n as f64,
        median,
        min: counts[0],
        max: counts[n - 1],
        compound_rate: compound as f64 / rows.len() as f64,
        primary_counts,
        secondary_counts,
        per_paper,
        buckets,
    })
}

/// `100 * count / total` rounded half-up to one decimal, computed in
/// integers so ties never depend on float representation.
pub fn percent(count: usize, total: usize) -> String {
    if total == 0 {
        return "0.0".into();
    }
    let tenths = (count * 2000 + total) / (2 * total);
    format!("{}.{}", tenths / 10, tenths % 10)
}

/// Modes by descending count; ties keep enum order.
fn ranked(counts: &BTreeMap<FailureMode, usize>) -> Vec<(FailureMode, usize)> {
    let mut v: Vec<(FailureMode, usize)> = counts.iter().map(|(m, c)| (*m, *c)).collect();
    v.sort_by_key(|&(_, c)| std::cmp::Reverse(c));
    v
}

fn fmt_real(x: f64) -> String {
    format!("{x:.2}")
}

pub fn render_summary(s: &DistributionSummary, format: SummaryFormat) -> String {
    match format {
        SummaryFormat::Text => render_text(s),
        SummaryFormat::Csv => render_csv(s),
        SummaryFormat::Json => serde_json::to_string_pretty(s).expect("summary serializes") + "\n",
    }
}

pub fn parse_summary_json(json: &str) -> Result<DistributionSummary, CorpusError> {
    Ok(serde_json::from_str(json)?)
}

fn render_text(s: &DistributionSummary) -> String {
    let mut out = String::new();
    let mut table = |title: &str, counts: &BTreeMap<FailureMode, usize>| {
        out.push_str(&format!("{title}\n{:<40}{:>5}  {:>5}\n", "Category", "Count", "Pct"));
        for (mode, count) in ranked(counts) {
            let label = format!("{} ({})", mode.label(), mode.code());
            out.push_str(&format!(
                "{label:<40}{count:>5}  {:>4}%\n",
                percent(count, s.n_citations)
            ));
        }
        let total = counts.values().sum::<usize>();
        out.push_str(&format!(
            "{:<40}{total:>5}  {:>4}%\n\n",
            "Total",
            percent(total, s.n_citations)
        ));
    };
    table("Primary codes", &s.primary_counts);
    table("Secondary codes", &s.secondary_counts);

    out.push_str("Per-paper counts\n");
    out.push_str(&format!("{:<40}{:>5}\n", "Citations", s.n_citations));
    out.push_str(&format!("{:<40}{:>5}\n", "Papers", s.n_papers));
    out.push_str(&format!("{:<40}{:>5}\n", "Mean per paper", fmt_real(s.mean)));
    out.push_str(&format!("{:<40}{:>5}\n", "Median per paper", s.median));
    out.push_str(&format!("{:<40}{:>5}\n", "Range", format!("{}-{}", s.min, s.max)));
    for (label, papers) in &s.buckets {
        let line = format!("Papers with {label} citations");
        out.push_str(&format!(
            "{line:<40}{papers:>5}  {:>4}%\n",
            percent(*papers, s.n_papers)
        ));
    }
    let compound = (s.compound_rate * s.n_citations as f64).round() as usize;
    out.push_str(&format!(
        "{:<40}{compound:>5}  {:>4}%\n",
        "Compound (primary != secondary)",
        percent(compound, s.n_citations)
    ));
    out
}

fn render_csv(s: &DistributionSummary) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut row = |fields: [&str; 4]| w.write_record(fields).expect("in-memory write");
    row(["table", "key", "value", "percent"]);
    for (name, counts) in [("primary", &s.primary_counts), ("secondary", &s.secondary_counts)] {
        for (mode, count) in ranked(counts) {
            row([name, mode.code(), &count.to_string(), &percent(count, s.n_citations)]);
        }
    }
    row(["papers", "n_citations", &s.n_citations.to_string(), ""]);
    row(["papers", "n_papers", &s.n_papers.to_string(), ""]);
    row(["papers", "mean", &fmt_real(s.mean), ""]);
    row(["papers", "median", &s.median.to_string(), ""]);
    row(["papers", "min", &s.min.to_string(), ""]);
    row(["papers", "max", &s.max.to_string(), ""]);
    for (label, papers) in &s.buckets {
        row(["bucket", label, &papers.to_string(), &percent(*papers, s.n_papers)]);
    }
    row(["compound", "rate", &s.compound_rate.to_string(), ""]);
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv is utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(paper: &str, p: FailureMode, s: FailureMode) -> CodedRow {
        CodedRow {
            paper_id: paper.into(),
            citation_text: "x".into(),
            primary: p,
            secondary: s,
            notes: String::new(),
        }
    }

    #[test]
    fn percent_rounds_half_up() {
        assert_eq!(percent(66, 100), "66.0");
        assert_eq!(percent(1, 3), "33.3");
        assert_eq!(percent(2, 3), "66.7");
        // 1/8 = 12.5 exactly; 1/16 = 6.25 rounds to 6.3
        assert_eq!(percent(1, 8), "12.5");
        assert_eq!(percent(1, 16), "6.3");
        assert_eq!(percent(49, 53), "92.5");
    }

    #[test]
    fn singleton_corpus() {
        let s = summarize(&[row(
            "p",
            FailureMode::TotalFabrication,
            FailureMode::SemanticHallucination,
        )])
        .unwrap();
        assert_eq!(s.mean, 1.0);
        assert_eq!(s.median, 1.0);
        assert_eq!(s.buckets[0], ("1-2".into(), 1));
        assert_eq!(s.compound_rate, 1.0);
    }

    #[test]
    fn empty_rejected() {
        assert!(matches!(summarize(&[]), Err(CorpusError::Empty)));
    }

    #[test]
    fn even_median_averages() {
        use FailureMode::TotalFabrication as TF;
        let rows = [row("a", TF, TF), row("b", TF, TF), row("b", TF, TF), row("b", TF, TF)];
        let s = summarize(&rows).unwrap();
        assert_eq!(s.median, 2.0);
        assert_eq!(s.compound_rate, 0.0);
    }

    #[test]
    fn header_and_rows_checked() {
        assert!(matches!(
            read_corpus("a,b\n".as_bytes()),
            Err(CorpusError::BadHeader(_))
        ));
        assert!(
            read_corpus("paper_id,citation_text,primary,secondary,notes\n".as_bytes())
                .unwrap()
                .is_empty()
        );
        let bad =
            "paper_id,citation_text,primary,secondary,notes\np1,\"Smith, J. A title\",TF,SH,\np2,t,XX,SH,\n,t,TF,YY,\n";
        let Err(CorpusError::Rows(errors)) = read_corpus(bad.as_bytes()) else {
            panic!()
        };
        assert_eq!(errors.len(), 3);
        assert_eq!((errors[0].line, errors[0].column.as_deref()), (3, Some("primary")));
        assert_eq!((errors[1].line, errors[1].column.as_deref()), (4, Some("paper_id")));
        assert_eq!((errors[2].line, errors[2].column.as_deref()), (4, Some("secondary")));
    }
}
