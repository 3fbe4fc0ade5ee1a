//! End-to-end runs over the bundled 30-paper fixture.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use topicflow::export::{read_flow_matrix_csv, SankeyDocument};
use topicflow::pipeline::{execute, run_pipeline, RunConfig, Stage, Target};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn config(out: &Path) -> RunConfig {
    RunConfig {
        input: fixtures().join("corpus30.jsonl"),
        stopwords: fixtures().join("stopwords_en.txt"),
        out: out.to_path_buf(),
        n_topics: 2,
        seed: 5,
        ..RunConfig::default()
    }
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(str::to_string).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(str::to_string).collect())
        .collect();
    (header, rows)
}

#[test]
fn top_l_one_keeps_one_topic_per_pair() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig { top_l: 1, ..config(dir.path()) };
    execute(&cfg, Target::BuildTfn).unwrap();
    let text = fs::read_to_string(dir.path().join("tfn_edges.tsv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("year\ttopic\tsource\ttarget\tweight"));
    let mut topics: BTreeMap<(String, String, String), BTreeSet<String>> = BTreeMap::new();
    let mut n_pairs_edges = 0;
    for line in lines {
        let f: Vec<&str> = line.split('\t').collect();
        assert_eq!(f.len(), 5);
        assert!(f[4].parse::<f64>().unwrap() > 0.0);
        if f[2] == f[3] {
            continue;
        }
        n_pairs_edges += 1;
        let (a, b) = if f[2] < f[3] { (f[2], f[3]) } else { (f[3], f[2]) };
        topics
            .entry((f[0].into(), a.into(), b.into()))
            .or_default()
            .insert(f[1].into());
    }
    assert!(n_pairs_edges > 0);
    assert!(topics.values().all(|t| t.len() == 1));
}

#[test]
fn artifacts_reparse() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path());
    run_pipeline(&cfg).unwrap();
    let out = dir.path();

    let (h, rows) = read_csv(&out.join("metrics.csv"));
    assert_eq!(h, ["year", "topic", "asp", "alc"]);
    for r in &rows {
        assert!(r[2].is_empty() || r[2].parse::<f64>().unwrap() >= 1.0);
        let alc: f64 = r[3].parse().unwrap();
        assert!((0.0..=1.0).contains(&alc));
    }
    assert_eq!(rows.len(), 5 * 2);

    let (h, rows) = read_csv(&out.join("pagerank_2000.csv"));
    assert_eq!(h, ["author", "score"]);
    let total: f64 = rows.iter().map(|r| r[1].parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-7);

    let (h, rows) = read_csv(&out.join("core_grid.csv"));
    assert_eq!(h, ["topic", "1998", "1999", "2000", "2001", "2002"]);
    assert_eq!(rows.len(), 2);

    let (h, _) = read_csv(&out.join("communities.csv"));
    assert_eq!(h, ["year", "block_id", "size", "main_topic", "second_topic"]);
    let (h, _) = read_csv(&out.join("community_sizes.csv"));
    assert_eq!(h, ["year", "topic", "size"]);
    let (h, rows) = read_csv(&out.join("topics.csv"));
    assert_eq!(h, ["topic", "label"]);
    assert!(rows.iter().all(|r| r[1].split(", ").count() == 5));

    for year in 1998..=2002 {
        let flows = fs::read(out.join(format!("flows_{year}.csv"))).unwrap();
        let m = read_flow_matrix_csv(year, flows.as_slice()).unwrap();
        let doc = SankeyDocument::from_json(
            &fs::read_to_string(out.join(format!("sankey_{year}.json"))).unwrap(),
        )
        .unwrap();
        let ids: BTreeMap<&str, usize> = doc.nodes.iter().map(|n| (n.id.as_str(), n.topic)).collect();
        for link in &doc.links {
            assert!(link.value > 0.0);
            let (s, t) = (ids[link.source.as_str()], ids[link.target.as_str()]);
            assert_ne!(s, t);
            // The CSV carries nine significant digits.
            let csv_value = m.get(s, t);
            assert!((link.value - csv_value).abs() <= 1e-8 * link.value.max(1.0));
        }
    }
}

#[test]
fn model_is_reused_from_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path());
    execute(&cfg, Target::FitTopics).unwrap();
    let path = dir.path().join("model/topic_term.tsv");
    let fitted = fs::read_to_string(&path).unwrap();

    // A reused model keeps whatever is on disk; a refit would overwrite it.
    let mut lines: Vec<String> = fitted.lines().map(str::to_string).collect();
    let last = lines.last_mut().unwrap();
    let (head, _) = last.rsplit_once('\t').unwrap();
    *last = format!("{head}\t123.5");
    fs::write(&path, lines.join("\n") + "\n").unwrap();
    execute(&cfg, Target::FitTopics).unwrap();
    assert!(fs::read_to_string(&path).unwrap().contains("123.5"));

    // Different fitting parameters invalidate the cache.
    let cfg = RunConfig { seed: 6, ..cfg };
    execute(&cfg, Target::FitTopics).unwrap();
    assert!(!fs::read_to_string(&path).unwrap().contains("123.5"));
}

#[test]
fn stage_errors_are_tagged() {
    let dir = tempfile::tempdir().unwrap();
    let missing_input = RunConfig {
        input: dir.path().join("none.jsonl"),
        ..config(dir.path())
    };
    let err = execute(&missing_input, Target::Ingest).unwrap_err();
    assert_eq!(err.stage, Stage::Ingest);
    assert!(err.to_string().starts_with("[ingest]"));

    let too_many_topics = RunConfig { n_topics: 0, ..config(dir.path()) };
    let err = execute(&too_many_topics, Target::FitTopics).unwrap_err();
    assert_eq!(err.stage, Stage::Topics);

    let unknown_year = execute(
        &config(dir.path()),
        Target::PageRank { year: Some(1900), topic: None },
    )
    .unwrap_err();
    assert_eq!(unknown_year.stage, Stage::Analysis);
}
