use std::path::{Path, PathBuf};
use std::process::Command;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

fn topicflow(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_topicflow"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn base_args<'a>(input: &'a str, stopwords: &'a str, out: &'a str) -> Vec<&'a str> {
    vec!["--input", input, "--stopwords", stopwords, "--out", out, "--topics", "2", "--seed", "7"]
}

#[test]
fn run_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixtures().join("corpus30.jsonl");
    let sw = fixtures().join("stopwords_en.txt");
    let out = dir.path().join("out");
    let (i, s, o) = (input.to_str().unwrap(), sw.to_str().unwrap(), out.to_str().unwrap());
    let mut args = vec!["run"];
    args.extend(base_args(i, s, o));
    let res = topicflow(&args);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(String::from_utf8_lossy(&res.stderr).contains("skipped=0 total=30"));
    for name in [
        "corpus_report.txt",
        "model/topic_term.tsv",
        "model/doc_topic.tsv",
        "model/vocabulary.tsv",
        "tfn_edges.tsv",
        "pagerank_2000.csv",
        "communities.csv",
        "community_sizes.csv",
        "core_grid.csv",
        "flows_2000.csv",
        "metrics.csv",
        "sankey_2000.json",
        "topics.csv",
        "manifest.json",
    ] {
        assert!(out.join(name).is_file(), "missing {name}");
    }

    // Slice subcommand reuses the cached model.
    let mut args = vec!["pagerank", "--year", "2001", "--topic", "1"];
    args.extend(base_args(i, s, o));
    let res = topicflow(&args);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(out.join("pagerank_2001_t1.csv").is_file());
}

#[test]
fn missing_stopwords_exit_with_textprep_tag() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixtures().join("corpus30.jsonl");
    let sw = dir.path().join("nope.txt");
    let out = dir.path().join("out");
    let mut args = vec!["vectorize"];
    args.extend(base_args(input.to_str().unwrap(), sw.to_str().unwrap(), out.to_str().unwrap()));
    let res = topicflow(&args);
    assert_eq!(res.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&res.stderr).contains("[textprep]"));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    let input = fixtures().join("corpus30.jsonl");
    std::fs::write(
        &conf,
        format!(
            "input = {}\nstopwords = {}\nout = {}\nmin_year = 2010\n",
            input.display(),
            fixtures().join("stopwords_en.txt").display(),
            dir.path().join("out").display()
        ),
    )
    .unwrap();
    // The file alone filters every record out.
    let res = topicflow(&["ingest", "--config", conf.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    let res = topicflow(&["ingest", "--config", conf.to_str().unwrap(), "--min-year", "1990"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let report = std::fs::read_to_string(dir.path().join("out/corpus_report.txt")).unwrap();
    assert!(report.contains("records=30"));
}
