use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .canonicalize()
        .unwrap()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cite-audit"))
        .args(args)
        .current_dir(root())
        .env_remove("CITE_AUDIT_CACHE")
        .env("HOME", std::env::temp_dir())
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const OFFLINE: [&str; 3] = ["--offline", "--fixtures", "fixtures/exemplars.json"];

fn offline(args: &[&str]) -> Output {
    let all: Vec<&str> = args.iter().copied().chain(OFFLINE).collect();
    run(&all)
}

fn exemplar_line(n: usize) -> String {
    let text = std::fs::read_to_string(root().join("fixtures/exemplars.txt")).unwrap();
    let line = text.lines().nth(n - 1).unwrap();
    line.split_once("] ").unwrap().1.to_owned()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_str(&stdout(o)).unwrap()
}

#[test]
fn clean_bibliography_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("clean.txt");
    let lines: Vec<String> = (7..=9).map(exemplar_line).collect();
    std::fs::write(&input, lines.join("\n\n")).unwrap();
    let o = offline(&["verify", input.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("3 citations: 3 verified"));
}

#[test]
fn placeholder_bibliography_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("refs.bib");
    std::fs::write(
        &input,
        "@misc{drivlme,\n  author = {Firstname Lastname and Others},\n  title = {Drivlme: A large-scale multi-agent driving benchmark},\n  year = {2023},\n  note = {URL or arXiv ID to be updated}\n}\n",
    )
    .unwrap();
    let o = offline(&["verify", input.to_str().unwrap(), "--format", "json"]);
    assert_eq!(code(&o), 1);
    let report = json(&o);
    assert_eq!(report["verdicts"][0]["primary"], "PH");
    assert_eq!(report["summary"]["by_primary"]["PH"], 1);
}

#[test]
fn missing_fixture_coverage_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let fixtures = dir.path().join("empty.json");
    std::fs::write(&fixtures, "{}").unwrap();
    let o = run(&[
        "verify",
        "fixtures/exemplars.txt",
        "--offline",
        "--fixtures",
        fixtures.to_str().unwrap(),
        "--format",
        "json",
    ]);
    // Nothing answered, so even the placeholder exemplar is left undecided.
    assert_eq!(code(&o), 2);
    let report = json(&o);
    assert_eq!(report["summary"]["unverifiable"], 10);
    assert_eq!(report["summary"]["hallucinated"], 0);

    let input = dir.path().join("clean.txt");
    std::fs::write(&input, exemplar_line(7)).unwrap();
    let o = run(&[
        "verify",
        input.to_str().unwrap(),
        "--offline",
        "--fixtures",
        fixtures.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
    let o = run(&[
        "verify",
        input.to_str().unwrap(),
        "--offline",
        "--fixtures",
        fixtures.to_str().unwrap(),
        "--fail-on",
        "hallucinated",
    ]);
    assert_eq!(code(&o), 0);
}

#[test]
fn classify_exemplars() {
    let o = offline(&["classify", &exemplar_line(4), "--format", "json"]);
    assert_eq!(code(&o), 1);
    assert_eq!(json(&o)["verdicts"][0]["primary"], "SH");

    let o = offline(&["classify", &exemplar_line(3), "--format", "json"]);
    let v = &json(&o)["verdicts"][0];
    assert_eq!(v["primary"], "IH");
    assert!(v["matched_record"]["title"]
        .as_str()
        .unwrap()
        .starts_with("Pre-train, Prompt, and Predict"));

    let o = offline(&["classify", &exemplar_line(8)]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("VERIFIED"));
    assert!(stdout(&o).contains("Deep Residual Learning for Image Recognition"));
}

#[test]
fn usage_errors_exit_three() {
    assert_eq!(code(&offline(&["classify", "   "])), 3);
    assert_eq!(code(&run(&["verify", "fixtures/exemplars.txt", "--offline"])), 3);
    assert_eq!(code(&offline(&["verify", "no/such/file.bib"])), 3);
    assert_eq!(code(&run(&["frobnicate"])), 3);
    assert_eq!(
        code(&offline(&[
            "verify",
            "fixtures/exemplars.txt",
            "--title-moderate",
            "0.99"
        ])),
        3
    );
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn stats_formats() {
    let o = run(&["stats", "fixtures/coded_corpus.csv"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o)
        .lines()
        .any(|l| l.starts_with("Total Fabrication (TF)") && l.ends_with("66  66.0%")));
    let o = run(&["stats", "fixtures/coded_corpus.csv", "--format", "csv"]);
    assert!(stdout(&o).lines().any(|l| l == "secondary,SH,63,63.0"));
    let o = run(&["stats", "fixtures/coded_corpus.csv", "--format", "json"]);
    assert_eq!(json(&o)["n_papers"], 53);
}

#[test]
fn stats_rejects_headerless_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.csv");
    std::fs::write(&corpus, "P01,text,TF,SH,\n").unwrap();
    let o = run(&["stats", corpus.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    std::fs::write(
        &corpus,
        "paper_id,citation_text,primary,secondary,notes\nP01,text,TF,QQ,\n",
    )
    .unwrap();
    let o = run(&["stats", corpus.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2, column secondary"));
}

#[test]
fn out_flag_and_cache_env() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let cache = dir.path().join("cache/lookups.jsonl");
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cite-audit"));
    cmd.args([
        "verify",
        "fixtures/exemplars.txt",
        "--format",
        "json",
        "--out",
        out.to_str().unwrap(),
    ])
    .args(OFFLINE)
    .current_dir(root())
    .env("CITE_AUDIT_CACHE", &cache);
    let o = cmd.output().unwrap();
    assert_eq!(code(&o), 1);
    assert!(o.stdout.is_empty());
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["n_citations"], 10);
    let cached = std::fs::read_to_string(&cache).unwrap();
    assert!(cached.lines().any(|l| l.contains("arxiv:2107.13586")));
}

#[test]
fn json_report_matches_golden_file() {
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/exemplars_report.json");
    let first = stdout(&offline(&[
        "verify",
        "fixtures/exemplars.txt",
        "--format",
        "json",
        "--jobs",
        "8",
    ]));
    let second = stdout(&offline(&[
        "verify",
        "fixtures/exemplars.txt",
        "--format",
        "json",
        "--jobs",
        "1",
    ]));
    assert_eq!(first, second);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(golden.parent().unwrap()).unwrap();
        std::fs::write(&golden, &first).unwrap();
    }
    let expected = std::fs::read_to_string(&golden).expect("golden file; regenerate with UPDATE_GOLDEN=1");
    assert_eq!(first, expected);
}

#[test]
fn example_config_is_accepted() {
    let o = offline(&[
        "verify",
        "fixtures/exemplars.txt",
        "--config",
        "fixtures/config.example.toml",
        "--format",
        "json",
    ]);
    assert_eq!(code(&o), 1, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&o)["summary"]["hallucinated"], 6);
}
