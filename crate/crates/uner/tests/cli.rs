use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const REFUSED: &str = "http://127.0.0.1:9/sparql";

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn uner(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_uner"));
    cmd.args(args).env_remove("UNER_SPARQL_ENDPOINT");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Offline pipeline over the fixture dump into `dir/out`.
fn run_fixture_pipeline(dir: &Path, extra: &[&str]) -> (Output, PathBuf) {
    let cache = dir.join("cache.tsv");
    std::fs::copy(fixture("class_cache.tsv"), &cache).unwrap();
    let out = dir.join("out");
    let dump = fixture("dump.jsonl");
    let mut args = vec!["pipeline", "--input", s(&dump), "--cache", s(&cache), "--offline", "--out", s(&out)];
    args.extend_from_slice(extra);
    (uner(&args, &[]), out)
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(code(&uner(&["--help"], &[])), 0);
    assert_eq!(code(&uner(&["--version"], &[])), 0);
    assert_eq!(code(&uner(&[], &[])), 1);
    assert_eq!(code(&uner(&["frobnicate"], &[])), 1);
    assert_eq!(code(&uner(&["stats", "--no-such-flag"], &[])), 1);
    assert_eq!(code(&uner(&["stats", "--collapse-depth", "two"], &[])), 1);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let missing = uner(&["extract", "--input", "/no/such/dump.jsonl", "--out", s(&out)], &[]);
    assert_eq!(code(&missing), 1);
    let bad_exp = uner(&["enrich", "--experiments", "1,9", "--out", s(&out)], &[]);
    assert_eq!(code(&bad_exp), 1);
    assert!(String::from_utf8_lossy(&bad_exp.stderr).contains("experiment 9"));
}

#[test]
fn pipeline_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let golden = fixture("expected.conll");
    let (o, out) = run_fixture_pipeline(dir.path(), &["--experiments", "1,2,3", "--golden", s(&golden)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in [
        "documents.jsonl",
        "targets.txt",
        "classes.tsv",
        "unresolved.txt",
        "corpus.conll",
        "stats.txt",
        "stats.json",
        "entities.tsv",
        "corpus.exp1.conll",
        "corpus.exp2.conll",
        "corpus.exp3.conll",
        "eval.txt",
        "eval.json",
        "manifest.json",
    ] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    assert_eq!(std::fs::read(out.join("corpus.conll")).unwrap(), std::fs::read(&golden).unwrap());
    let m = manifest(&out);
    assert_eq!(m["status"], "ok");
    assert_eq!(m["exit_code"], 0);
    let stages: Vec<&str> = m["stages"].as_array().unwrap().iter().map(|s| s["name"].as_str().unwrap()).collect();
    assert_eq!(stages, ["extract", "link", "annotate", "stats", "enrich", "eval"]);
    let extract = &m["stages"][0]["counters"];
    assert_eq!(extract["documents"], 10);
    assert_eq!(extract["malformed_lines"], 1);
    let annotate = &m["stages"][2]["counters"];
    assert_eq!(
        annotate["sentences_total"].as_u64(),
        Some(annotate["sentences_kept"].as_u64().unwrap() + annotate["sentences_dropped"].as_u64().unwrap())
    );
    let unresolved = std::fs::read_to_string(out.join("unresolved.txt")).unwrap();
    assert_eq!(unresolved.trim(), "Unknown Target");
    let eval: Value = serde_json::from_str(&std::fs::read_to_string(out.join("eval.json")).unwrap()).unwrap();
    assert_eq!(eval["macro"]["f1"], 100.0);
}

#[test]
fn eval_of_a_file_against_itself_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let golden = fixture("expected.conll");
    for depth in [None, Some("2")] {
        let mut args = vec!["eval", "--golden", s(&golden), "--system", s(&golden), "--out", s(dir.path())];
        if let Some(d) = depth {
            args.extend(["--collapse-depth", d]);
        }
        let o = uner(&args, &[]);
        assert_eq!(code(&o), 0);
        let stdout = String::from_utf8_lossy(&o.stdout);
        assert!(stdout.lines().any(|l| l.starts_with("macro\t100.0\t100.0\t100.0")), "{stdout}");
    }
    let eval: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("eval.d2.json")).unwrap()).unwrap();
    assert_eq!(eval["collapse_depth"], 2);
    assert!(eval["per_tag"].as_object().unwrap().keys().all(|t| t.matches('-').count() <= 2));
}

#[test]
fn misaligned_eval_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let golden = dir.path().join("g.conll");
    let system = dir.path().join("s.conll");
    std::fs::write(&golden, "# doc_id = 1\nA\tB-Name-God\nb\tO\n\n").unwrap();
    std::fs::write(&system, "# doc_id = 1\nA\tB-Name-God\n\n").unwrap();
    let o = uner(&["eval", "--golden", s(&golden), "--system", s(&system), "--out", s(dir.path())], &[]);
    assert_eq!(code(&o), 2);
    let m = manifest(dir.path());
    assert_eq!(m["status"], "failed");
    assert_eq!(m["exit_code"], 2);
    let error = m["error"].as_str().unwrap();
    assert!(error.contains("g.conll:3") && error.contains("s.conll:3"), "{error}");
}

#[test]
fn malformed_corpus_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.conll");
    std::fs::write(&corpus, "# doc_id = 1\nA\tB-Person-Name\n\n").unwrap();
    let o = uner(&["stats", "--input", s(&corpus), "--out", s(dir.path())], &[]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains(":2"), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn offline_link_with_empty_cache_leaves_everything_unresolved() {
    let dir = tempfile::tempdir().unwrap();
    let targets = dir.path().join("targets.txt");
    std::fs::write(&targets, "Baku\nParis\nZürich\n").unwrap();
    let out = dir.path().join("out");
    let o = uner(&["link", "--input", s(&targets), "--offline", "--out", s(&out)], &[("UNER_SPARQL_ENDPOINT", REFUSED)]);
    assert_eq!(code(&o), 0);
    let unresolved = std::fs::read_to_string(out.join("unresolved.txt")).unwrap();
    assert_eq!(unresolved, "Baku\nParis\nZürich\n");
    let link = &manifest(&out)["stages"][0]["counters"];
    assert_eq!(link["requests"], 0);
    assert_eq!(link["unresolved"], 3);
}

fn link_against(dir: &Path, flags: &[&str], env: &[(&str, &str)]) -> (Output, Value) {
    let targets = dir.join("targets.txt");
    std::fs::write(&targets, "Baku\nParis\n").unwrap();
    let config = dir.join("run.toml");
    std::fs::write(&config, "retries = 0\nrequests_per_second = 1000.0\nendpoint = \"http://127.0.0.1:9/from-config\"\n")
        .unwrap();
    let out = dir.join("out");
    let mut args = vec!["link", "--config", s(&config), "--input", s(&targets), "--out", s(&out)];
    args.extend_from_slice(flags);
    let o = uner(&args, env);
    let m = manifest(&out);
    (o, m)
}

#[test]
fn unreachable_endpoint_exhausts_the_network() {
    let dir = tempfile::tempdir().unwrap();
    let (o, m) = link_against(dir.path(), &[], &[]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(m["exit_code"], 3);
    assert_eq!(m["config"]["endpoint"], "http://127.0.0.1:9/from-config");
    // The unresolved list is still written before failing.
    assert!(dir.path().join("out/unresolved.txt").is_file());
}

#[test]
fn environment_overrides_config_and_flag_overrides_environment() {
    let dir = tempfile::tempdir().unwrap();
    let (o, m) = link_against(dir.path(), &[], &[("UNER_SPARQL_ENDPOINT", "http://127.0.0.1:9/from-env")]);
    assert_eq!(code(&o), 3);
    assert_eq!(m["config"]["endpoint"], "http://127.0.0.1:9/from-env");

    let (o, m) = link_against(
        dir.path(),
        &["--endpoint", "http://127.0.0.1:9/from-flag"],
        &[("UNER_SPARQL_ENDPOINT", "http://127.0.0.1:9/from-env")],
    );
    assert_eq!(code(&o), 3);
    assert_eq!(m["config"]["endpoint"], "http://127.0.0.1:9/from-flag");

    let (o, _) = link_against(dir.path(), &["--offline"], &[("UNER_SPARQL_ENDPOINT", REFUSED)]);
    assert_eq!(code(&o), 0);
}

#[test]
fn staged_commands_match_the_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache.tsv");
    std::fs::copy(fixture("class_cache.tsv"), &cache).unwrap();
    let out = dir.path().join("out");
    let common = ["--offline", "--cache", s(&cache), "--out", s(&out)];
    let dump = fixture("dump.jsonl");
    let mut extract = vec!["extract", "--input", s(&dump)];
    extract.extend(common);
    for step in [extract, vec!["link"], vec!["annotate"], vec!["stats"]] {
        let mut args = step.clone();
        if args.len() == 1 {
            args.extend(common);
        }
        let o = uner(&args, &[]);
        assert_eq!(code(&o), 0, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(
        std::fs::read(out.join("corpus.conll")).unwrap(),
        std::fs::read(fixture("expected.conll")).unwrap()
    );
    let stats: Value = serde_json::from_str(&std::fs::read_to_string(out.join("stats.json")).unwrap()).unwrap();
    let total = stats["total_tokens"].as_u64().unwrap();
    assert_eq!(total, stats["entity_tokens"].as_u64().unwrap() + stats["non_entity_tokens"].as_u64().unwrap());
}

#[test]
fn graph_experiments_need_a_graph_map() {
    let dir = tempfile::tempdir().unwrap();
    let (o, out) = run_fixture_pipeline(dir.path(), &[]);
    assert_eq!(code(&o), 0);
    let corpus = out.join("corpus.conll");
    let o = uner(&["enrich", "--input", s(&corpus), "--experiments", "4", "--out", s(&out)], &[]);
    assert_eq!(code(&o), 1);

    let kg = dir.path().join("kg.tsv");
    std::fs::write(&kg, "Baku\tdbo:City\nMarie Curie\tdbo:Person\nParis\tdbo:City\n").unwrap();
    let o = uner(&["enrich", "--input", s(&corpus), "--kg-map", s(&kg), "--out", s(&out)], &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for id in 1..=7 {
        assert!(out.join(format!("corpus.exp{id}.conll")).is_file(), "experiment {id} output missing");
    }
}
