use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use cite_audit_core::analytics::{load_corpus, render_summary, summarize, SummaryFormat};
use cite_audit_core::classifier::Classifier;
use cite_audit_core::model::{ParsedCitation, Verdict};
use cite_audit_core::parser::{parse_file, parse_plaintext, InputFormat, ParseReport};
use cite_audit_core::report::{exit_code, FailOn, Report, ReportFormat, EXIT_USAGE};
use cite_audit_core::resolver::{Config, ResolverOptions};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Check reference lists against scholarly metadata providers and flag
/// fabricated citations by failure mode.
#[derive(Debug, Parser)]
#[command(name = "cite-audit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Verify every reference in a .bib or plain-text file.
    Verify {
        input: PathBuf,
        /// Override format detection by extension.
        #[arg(long, value_enum)]
        input_format: Option<InputFormatArg>,
    },
    /// Classify a single plain-text reference.
    Classify { citation: String },
    /// Summarize a coded corpus CSV.
    Stats { corpus: PathBuf },
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Answer only from the fixture file; no network access.
    #[arg(long, requires = "fixtures", global = true)]
    offline: bool,
    /// JSON file of canonical query keys to provider answers.
    #[arg(long, global = true)]
    fixtures: Option<PathBuf>,
    /// Lookup cache file (JSON lines).
    #[arg(long, env = "CITE_AUDIT_CACHE", global = true)]
    cache: Option<PathBuf>,
    /// Disable the lookup cache.
    #[arg(long, global = true)]
    no_cache: bool,
    /// Provider and classifier configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Parallel verification workers.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u16).range(1..), global = true)]
    jobs: u16,
    #[arg(long, value_enum, default_value_t = FailOnArg::Unverifiable, global = true)]
    fail_on: FailOnArg,
    #[command(flatten)]
    thresholds: ThresholdOverrides,
    /// Log provider traffic to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
}

#[derive(Debug, Args)]
struct ThresholdOverrides {
    #[arg(long, global = true)]
    title_strong: Option<f64>,
    #[arg(long, global = true)]
    title_moderate: Option<f64>,
    #[arg(long, global = true)]
    author_strong: Option<f64>,
    #[arg(long, global = true)]
    year_slack: Option<i32>,
    #[arg(long, global = true)]
    plausibility: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum InputFormatArg {
    Bibtex,
    Plaintext,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FailOnArg {
    Hallucinated,
    Unverifiable,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    init_logging(cli.common.verbose);
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE as u8)
        }
    }
}

fn init_logging(verbose: bool) {
    let default = if verbose { "cite_audit_core=debug" } else { "warn" };
    let filter = tracing_subscriber::EnvFilter::try_from_default_env()
        .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new(default));
    tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .init();
}

fn run(cli: Cli) -> Result<i32> {
    let common = &cli.common;
    match &cli.command {
        Command::Verify { input, input_format } => {
            let format = input_format.map(|f| match f {
                InputFormatArg::Bibtex => InputFormat::Bibtex,
                InputFormatArg::Plaintext => InputFormat::Plaintext,
            });
            let parsed = parse_file(input, format).with_context(|| format!("reading {}", input.display()))?;
            report_warnings(&parsed);
            verify(common, &input.display().to_string(), &parsed.citations)
        }
        Command::Classify { citation } => {
            let text = citation.split_whitespace().collect::<Vec<_>>().join(" ");
            if text.is_empty() {
                bail!("citation text is empty");
            }
            let parsed = parse_plaintext(&text);
            report_warnings(&parsed);
            let mut citations = parsed.citations;
            if citations.is_empty() {
                bail!("no reference recognized in the given text");
            }
            // One argument is one reference, even if the splitter saw more.
            citations.truncate(1);
            citations[0].raw_text = text.clone();
            verify(common, "<argument>", &citations)
        }
        Command::Stats { corpus } => {
            let rows = load_corpus(corpus).with_context(|| format!("loading {}", corpus.display()))?;
            let summary = summarize(&rows)?;
            let format = match common.format {
                Format::Text => SummaryFormat::Text,
                Format::Json => SummaryFormat::Json,
                Format::Csv => SummaryFormat::Csv,
            };
            emit(common.out.as_deref(), &render_summary(&summary, format))?;
            Ok(0)
        }
    }
}

fn report_warnings(parsed: &ParseReport) {
    for w in &parsed.warnings {
        eprintln!("warning: line {}: {}", w.span.start_line, w.message);
    }
}

fn load_config(common: &Common) -> Result<Config> {
    let mut config = match &common.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let t = &mut config.classifier.thresholds;
    let o = &common.thresholds;
    t.title_strong = o.title_strong.unwrap_or(t.title_strong);
    t.title_moderate = o.title_moderate.unwrap_or(t.title_moderate);
    t.author_strong = o.author_strong.unwrap_or(t.author_strong);
    t.year_slack = o.year_slack.unwrap_or(t.year_slack);
    t.plausibility = o.plausibility.unwrap_or(t.plausibility);
    config.validate()?;
    Ok(config)
}

fn default_cache_path() -> Option<PathBuf> {
    let base = std::env::var_os("XDG_CACHE_HOME")
        .map(PathBuf::from)
        .or_else(|| std::env::var_os("HOME").map(|h| PathBuf::from(h).join(".cache")))?;
    Some(base.join("cite-audit").join("lookups.jsonl"))
}

fn verify(common: &Common, input: &str, citations: &[ParsedCitation]) -> Result<i32> {
    let config = load_config(common)?;
    let cache = match (common.no_cache, &common.cache, common.offline) {
        (true, _, _) => None,
        (false, Some(path), _) => Some(path.clone()),
        // Offline runs stay hermetic unless a cache is named explicitly.
        (false, None, true) => None,
        (false, None, false) => default_cache_path(),
    };
    let resolver = config.build_resolver(&ResolverOptions {
        fixtures: common.fixtures.clone(),
        offline: common.offline,
        cache,
    })?;
    let classifier = Classifier::new(config.classifier.clone());
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(common.jobs as usize)
        .build()
        .context("starting worker pool")?;
    let results = pool.install(|| classifier.classify_batch(&resolver, citations));
    let verdicts: Vec<Verdict> = results.into_iter().collect::<Result<_, _>>().map_err(|e| anyhow!(e))?;

    let fail_on = match common.fail_on {
        FailOnArg::Hallucinated => FailOn::Hallucinated,
        FailOnArg::Unverifiable => FailOn::Unverifiable,
    };
    let code = exit_code(&verdicts, fail_on);
    let format = match common.format {
        Format::Text => ReportFormat::Text,
        Format::Json => ReportFormat::Json,
        Format::Csv => ReportFormat::Csv,
    };
    emit(common.out.as_deref(), &Report::new(input, verdicts).render(format))?;
    Ok(code)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
