//! End-to-end orchestration: configuration, stages, artifact directory and
//! the reproducibility manifest.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::analysis::{
    community_topic_summary, coreness_grid, flow_matrix, pagerank, small_world_metrics, walktrap,
    PageRankOptions,
};
use crate::corpus::{load_corpus, Corpus, LoadOptions, LoadReport};
use crate::export::{self, MetricsRow};
use crate::textprep::{self, build_matrix, DocTermMatrix, MatrixOptions, StopWords};
use crate::tfn::{build_tfn, TfnOptions, TopicFlowNetwork};
use crate::topicmodel::{fit_nmf, NmfOptions, PaperThetas, TopicModel};
use crate::{Error, Topic, Year};

/// Run parameters. Defaults: 64 topics, top-8 edges per pair, a two-year
/// publication lag and a 10% stop-word share for the language filter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub input: PathBuf,
    pub stopwords: PathBuf,
    pub out: PathBuf,
    pub english_threshold: f64,
    pub require_abstract: bool,
    pub min_df: usize,
    pub n_topics: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
    pub window: u32,
    pub top_l: usize,
    pub min_year: Year,
    pub max_year: Year,
    pub include_fields: Vec<String>,
    pub exclude_fields: Vec<String>,
    pub walk_length: usize,
    pub top_flows: usize,
    pub damping: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: PathBuf::new(),
            stopwords: PathBuf::new(),
            out: PathBuf::from("out"),
            english_threshold: textprep::DEFAULT_ENGLISH_THRESHOLD,
            require_abstract: true,
            min_df: textprep::DEFAULT_MIN_DF,
            n_topics: crate::topicmodel::DEFAULT_TOPICS,
            max_iter: crate::topicmodel::DEFAULT_MAX_ITER,
            tol: crate::topicmodel::DEFAULT_TOL,
            seed: 0,
            window: crate::corpus::DEFAULT_WINDOW,
            top_l: crate::tfn::DEFAULT_TOP_L,
            min_year: 1960,
            max_year: 2021,
            include_fields: Vec::new(),
            exclude_fields: Vec::new(),
            walk_length: crate::analysis::DEFAULT_WALK_LENGTH,
            top_flows: 25,
            damping: 0.85,
        }
    }
}

impl RunConfig {
    /// Sets one parameter by name. Dashes and underscores are interchangeable;
    /// list values are comma-separated.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), Error> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, Error> {
            value
                .parse()
                .map_err(|_| Error::param(format!("invalid value {value:?} for {key}")))
        }
        let list = |v: &str| -> Vec<String> {
            v.split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::to_string)
                .collect()
        };
        match key.trim().replace('-', "_").as_str() {
            "input" => self.input = value.into(),
            "stopwords" => self.stopwords = value.into(),
            "out" => self.out = value.into(),
            "english_threshold" => self.english_threshold = parse(key, value)?,
            "require_abstract" => self.require_abstract = parse(key, value)?,
            "min_df" => self.min_df = parse(key, value)?,
            "topics" | "n_topics" => self.n_topics = parse(key, value)?,
            "max_iter" => self.max_iter = parse(key, value)?,
            "tol" => self.tol = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "window" => self.window = parse(key, value)?,
            "top_l" => self.top_l = parse(key, value)?,
            "min_year" => self.min_year = parse(key, value)?,
            "max_year" => self.max_year = parse(key, value)?,
            "include_fields" => self.include_fields = list(value),
            "exclude_fields" => self.exclude_fields = list(value),
            "walk_length" => self.walk_length = parse(key, value)?,
            "top_flows" => self.top_flows = parse(key, value)?,
            "damping" => self.damping = parse(key, value)?,
            other => return Err(Error::param(format!("unknown configuration key {other:?}"))),
        }
        Ok(())
    }

    /// Applies a flat `key = value` file; blank lines and `#` comments are
    /// skipped.
    pub fn apply_file(&mut self, path: impl AsRef<Path>) -> Result<(), Error> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Format(format!("{}:{}: expected key = value", path.display(), i + 1))
            })?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    fn load_options(&self) -> LoadOptions {
        LoadOptions {
            min_year: self.min_year,
            max_year: self.max_year,
            include_fields: self.include_fields.iter().cloned().collect(),
            exclude_fields: self.exclude_fields.iter().cloned().collect(),
        }
    }

    fn matrix_options(&self) -> MatrixOptions {
        MatrixOptions {
            english_threshold: self.english_threshold,
            require_abstract: self.require_abstract,
            min_df: self.min_df,
        }
    }

    fn nmf_options(&self) -> NmfOptions {
        NmfOptions {
            n_topics: self.n_topics,
            max_iter: self.max_iter,
            tol: self.tol,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Ingest,
    Textprep,
    Topics,
    Tfn,
    Analysis,
    Export,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Textprep => "textprep",
            Stage::Topics => "topics",
            Stage::Tfn => "tfn",
            Stage::Analysis => "analysis",
            Stage::Export => "export",
        }
    }

    /// Process exit status for a failure in this stage.
    pub fn exit_code(self) -> i32 {
        match self {
            Stage::Ingest => 2,
            Stage::Textprep => 3,
            Stage::Topics => 4,
            Stage::Tfn => 5,
            Stage::Analysis => 6,
            Stage::Export => 7,
        }
    }
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, thiserror::Error)]
#[error("[{stage}] {source}")]
pub struct PipelineError {
    pub stage: Stage,
    #[source]
    pub source: Error,
}

type StageResult<T> = std::result::Result<T, PipelineError>;

trait InStage<T> {
    fn stage(self, stage: Stage) -> StageResult<T>;
}

impl<T> InStage<T> for Result<T, Error> {
    fn stage(self, stage: Stage) -> StageResult<T> {
        self.map_err(|source| PipelineError { stage, source })
    }
}

/// What a CLI invocation should produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Ingest,
    Vectorize,
    FitTopics,
    BuildTfn,
    PageRank { year: Option<Year>, topic: Option<Topic> },
    Communities,
    KCores,
    Flows,
    Metrics,
    ExportSankey,
    Run,
}

/// Stage outputs of one run, computed lazily and kept for later stages.
struct Session<'c> {
    cfg: &'c RunConfig,
    corpus: Option<(Corpus, LoadReport)>,
    stopwords: Option<StopWords>,
    matrix: Option<DocTermMatrix>,
    model: Option<TopicModel>,
    tfn: Option<TopicFlowNetwork>,
    analysis_records: usize,
    written: Vec<PathBuf>,
}

impl<'c> Session<'c> {
    fn new(cfg: &'c RunConfig) -> Self {
        Session {
            cfg,
            corpus: None,
            stopwords: None,
            matrix: None,
            model: None,
            tfn: None,
            analysis_records: 0,
            written: Vec::new(),
        }
    }

    fn corpus(&mut self) -> StageResult<&Corpus> {
        if self.corpus.is_none() {
            let loaded = load_corpus(&self.cfg.input, &self.cfg.load_options()).stage(Stage::Ingest)?;
            eprintln!("{}", loaded.1);
            if loaded.0.is_empty() {
                return Err(Error::Format("no records left after filtering".into()))
                    .stage(Stage::Ingest);
            }
            self.corpus = Some(loaded);
        }
        Ok(&self.corpus.as_ref().unwrap().0)
    }

    fn stopwords(&mut self) -> StageResult<&StopWords> {
        if self.stopwords.is_none() {
            self.stopwords = Some(StopWords::load(&self.cfg.stopwords).stage(Stage::Textprep)?);
        }
        Ok(self.stopwords.as_ref().unwrap())
    }

    fn matrix(&mut self) -> StageResult<&DocTermMatrix> {
        if self.matrix.is_none() {
            self.corpus()?;
            self.stopwords()?;
            let corpus = &self.corpus.as_ref().unwrap().0;
            let m = build_matrix(corpus, self.stopwords.as_ref().unwrap(), &self.cfg.matrix_options())
                .stage(Stage::Textprep)?;
            log::info!(
                "tf-idf matrix: {} documents, {} terms, {} entries",
                m.n_rows(),
                m.n_cols(),
                m.nnz()
            );
            self.matrix = Some(m);
        }
        Ok(self.matrix.as_ref().unwrap())
    }

    /// Fits the model, or reloads it when the cached copy was fitted on the
    /// same matrix with the same parameters.
    fn model(&mut self) -> StageResult<&TopicModel> {
        if self.model.is_none() {
            let cfg = self.cfg;
            let matrix = self.matrix()?;
            let mut tsv = Vec::new();
            matrix.write_tsv(&mut tsv).expect("in-memory write");
            let key = cache_key(&tsv, &cfg.nmf_options());
            let dir = cfg.out.join("model");
            let key_path = dir.join("cache_key");
            let cached = fs::read_to_string(&key_path).ok().filter(|k| k.trim() == key);
            let model = match cached.and_then(|_| TopicModel::load(&dir).ok()) {
                Some(m) => {
                    log::info!("reusing cached topic model in {}", dir.display());
                    m
                }
                None => {
                    let m = fit_nmf(matrix, &cfg.nmf_options()).stage(Stage::Topics)?;
                    log::info!(
                        "fitted {} topics in {} iterations, error {}",
                        m.n_topics(),
                        m.iterations(),
                        m.final_error()
                    );
                    m.save(&dir).stage(Stage::Topics)?;
                    write_vocabulary(&dir.join("vocabulary.tsv"), matrix).stage(Stage::Topics)?;
                    fs::write(&key_path, format!("{key}\n"))
                        .map_err(|e| Error::io(&key_path, e))
                        .stage(Stage::Topics)?;
                    m
                }
            };
            self.model = Some(model);
        }
        Ok(self.model.as_ref().unwrap())
    }

    fn tfn(&mut self) -> StageResult<&TopicFlowNetwork> {
        if self.tfn.is_none() {
            self.model()?;
            let cfg = self.cfg;
            let corpus = &self.corpus.as_ref().unwrap().0;
            let stopwords = self.stopwords.as_ref().unwrap();
            let matrix = self.matrix.as_ref().unwrap();
            let model = self.model.as_ref().unwrap();

            // Non-English papers leave the analysis; papers without an
            // abstract stay and are projected onto the topics.
            let english = corpus.retain(|r| {
                textprep::record_is_english(r, stopwords, cfg.english_threshold)
            });
            self.analysis_records = english.len();
            let thetas = PaperThetas::infer(model, &english, matrix.vocabulary(), stopwords);
            let years: Vec<Year> = match (english.years().first(), english.years().last()) {
                (Some(&lo), Some(&hi)) => (lo..=hi).collect(),
                _ => Vec::new(),
            };
            let opts = TfnOptions {
                window: cfg.window,
                top_l: cfg.top_l,
            };
            let tfn = build_tfn(&english, &thetas, &years, opts).stage(Stage::Tfn)?;
            log::info!(
                "network: {} authors, {} years, {} edges",
                tfn.n_authors(),
                tfn.years().len(),
                tfn.n_edges()
            );
            self.tfn = Some(tfn);
        }
        Ok(self.tfn.as_ref().unwrap())
    }

    fn write(
        &mut self,
        name: &str,
        body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
    ) -> StageResult<()> {
        let path = self.cfg.out.join(name);
        let res = (|| {
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent)?;
            }
            let mut out = BufWriter::new(fs::File::create(&path)?);
            body(&mut out)?;
            out.flush()
        })();
        res.map_err(|e| Error::io(&path, e)).stage(Stage::Export)?;
        self.written.push(path);
        Ok(())
    }

    fn write_report(&mut self) -> StageResult<()> {
        self.corpus()?;
        let (corpus, report) = self.corpus.as_ref().unwrap();
        let text = format!(
            "records={}\nskipped={}\ntotal={}\nmalformed={}\nfiltered={}\nauthors={}\nyears={}\n",
            corpus.len(),
            report.skipped(),
            report.total,
            report.malformed,
            report.filtered,
            corpus.authors().count(),
            corpus
                .years()
                .iter()
                .map(Year::to_string)
                .collect::<Vec<_>>()
                .join(",")
        );
        self.write("corpus_report.txt", |w| w.write_all(text.as_bytes()))
    }

    fn write_matrix(&mut self) -> StageResult<()> {
        self.matrix()?;
        let matrix = self.matrix.clone().unwrap();
        self.write("matrix.tsv", |w| matrix.write_tsv(w))?;
        self.write("vocabulary.tsv", |w| vocabulary_tsv(w, &matrix))
    }

    fn write_topics(&mut self) -> StageResult<()> {
        self.model()?;
        let mut buf = Vec::new();
        export::write_topics_csv(self.model.as_ref().unwrap(), &mut buf).stage(Stage::Export)?;
        self.written.push(self.cfg.out.join("model"));
        self.write("topics.csv", |w| w.write_all(&buf))
    }

    fn write_edges(&mut self) -> StageResult<()> {
        let mut buf = Vec::new();
        self.tfn()?.write_edges_tsv(&mut buf).expect("in-memory write");
        self.write("tfn_edges.tsv", |w| w.write_all(&buf))
    }

    fn write_pagerank(&mut self, year: Option<Year>, topic: Option<Topic>) -> StageResult<()> {
        let damping = self.cfg.damping;
        let tfn = self.tfn()?;
        let view = tfn.restrict(year, topic).stage(Stage::Analysis)?;
        let opts = PageRankOptions {
            damping,
            ..Default::default()
        };
        let mut buf = Vec::new();
        match pagerank(&view, opts) {
            Ok(scores) => export::write_pagerank_csv(tfn, &scores, &mut buf).expect("in-memory write"),
            // A view without edges has nothing to rank.
            Err(Error::Parameter(_)) if view.active_nodes().is_empty() => {
                export::write_pagerank_csv(tfn, &[], &mut buf).expect("in-memory write")
            }
            Err(e) => return Err(e).stage(Stage::Analysis),
        }
        let mut name = "pagerank".to_string();
        if let Some(y) = year {
            name.push_str(&format!("_{y}"));
        }
        if let Some(t) = topic {
            name.push_str(&format!("_t{t}"));
        }
        self.write(&format!("{name}.csv"), |w| w.write_all(&buf))
    }

    fn write_communities(&mut self) -> StageResult<()> {
        let walk_length = self.cfg.walk_length;
        let tfn = self.tfn()?;
        let mut summaries = Vec::new();
        for &y in tfn.years() {
            let view = tfn.restrict(Some(y), None).stage(Stage::Analysis)?;
            let partition = walktrap(&view, walk_length).stage(Stage::Analysis)?;
            summaries.push(community_topic_summary(&partition, tfn.expertise(), 2));
        }
        self.write("communities.csv", |w| export::write_communities_csv(&summaries, w))?;
        self.write("community_sizes.csv", |w| export::write_community_sizes_csv(&summaries, w))
    }

    fn write_kcores(&mut self) -> StageResult<()> {
        let grid = coreness_grid(self.tfn()?);
        self.write("core_grid.csv", |w| export::write_core_grid_csv(&grid, w))
    }

    fn flow_matrices(&mut self) -> StageResult<Vec<crate::FlowMatrix>> {
        let tfn = self.tfn()?;
        tfn.years()
            .iter()
            .map(|&y| flow_matrix(tfn, tfn.expertise(), y))
            .collect::<Result<Vec<_>, _>>()
            .stage(Stage::Analysis)
    }

    fn write_flows(&mut self) -> StageResult<()> {
        for m in self.flow_matrices()? {
            self.write(&format!("flows_{}.csv", m.year), |w| {
                export::write_flow_matrix_csv(&m, w)
            })?;
        }
        Ok(())
    }

    fn write_metrics(&mut self) -> StageResult<()> {
        let tfn = self.tfn()?;
        let mut rows = Vec::new();
        for &year in tfn.years() {
            for topic in 0..tfn.n_topics() {
                let view = tfn.restrict(Some(year), Some(topic)).stage(Stage::Analysis)?;
                rows.push(MetricsRow {
                    year,
                    topic,
                    metrics: small_world_metrics(&view),
                });
            }
        }
        self.write("metrics.csv", |w| export::write_metrics_csv(&rows, w))
    }

    fn write_sankey(&mut self) -> StageResult<()> {
        let matrices = self.flow_matrices()?;
        let (k, model) = (self.cfg.top_flows, self.model.as_ref().unwrap());
        let docs = matrices
            .iter()
            .map(|m| export::export_sankey(m, model, k, true))
            .collect::<Result<Vec<_>, _>>()
            .stage(Stage::Export)?;
        for doc in docs {
            let json = doc.to_json();
            self.write(&format!("sankey_{}.json", doc.year), |w| {
                w.write_all(json.as_bytes())?;
                w.write_all(b"\n")
            })?;
        }
        Ok(())
    }

    fn write_manifest(&mut self) -> StageResult<()> {
        let out = self.cfg.out.clone();
        let artifacts = hash_tree(&out, Path::new("manifest.json"))
            .map_err(|e| Error::io(&out, e))
            .stage(Stage::Export)?;
        let manifest = Manifest {
            tool: "topicflow",
            version: env!("CARGO_PKG_VERSION"),
            seed: self.cfg.seed,
            config: self.cfg,
            analysis_records: self.analysis_records,
            artifacts,
        };
        let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        self.write("manifest.json", |w| {
            w.write_all(json.as_bytes())?;
            w.write_all(b"\n")
        })
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    seed: u64,
    config: &'a RunConfig,
    analysis_records: usize,
    /// Relative path → SHA-256 of the file contents.
    artifacts: BTreeMap<String, String>,
}

fn cache_key(matrix_tsv: &[u8], opts: &NmfOptions) -> String {
    let mut h = Sha256::new();
    h.update(matrix_tsv);
    h.update(format!("{}|{}|{:?}|{}", opts.n_topics, opts.max_iter, opts.tol, opts.seed));
    hex::encode(h.finalize())
}

fn vocabulary_tsv(w: &mut dyn Write, matrix: &DocTermMatrix) -> std::io::Result<()> {
    let v = matrix.vocabulary();
    writeln!(w, "# n_documents={}", v.n_documents())?;
    writeln!(w, "term\tdf")?;
    for (i, t) in v.terms().iter().enumerate() {
        writeln!(w, "{t}\t{}", v.document_frequency(i))?;
    }
    Ok(())
}

fn write_vocabulary(path: &Path, matrix: &DocTermMatrix) -> Result<(), Error> {
    let mut buf = Vec::new();
    vocabulary_tsv(&mut buf, matrix).expect("in-memory write");
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

/// SHA-256 of every file under `root`, keyed by `/`-separated relative path.
pub fn hash_tree(root: &Path, skip: &Path) -> std::io::Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir)? {
            let path = entry?.path();
            if path.is_dir() {
                stack.push(path);
                continue;
            }
            let rel = path.strip_prefix(root).expect("under root");
            if rel == skip {
                continue;
            }
            let key = rel
                .components()
                .map(|c| c.as_os_str().to_string_lossy())
                .collect::<Vec<_>>()
                .join("/");
            out.insert(key, hex::encode(Sha256::digest(fs::read(&path)?)));
        }
    }
    Ok(out)
}

/// Produces the artifacts of `target` under `cfg.out` and returns the paths
/// written. [`Target::Run`] writes everything plus `manifest.json`.
pub fn execute(cfg: &RunConfig, target: Target) -> StageResult<Vec<PathBuf>> {
    fs::create_dir_all(&cfg.out)
        .map_err(|e| Error::io(&cfg.out, e))
        .stage(Stage::Export)?;
    let mut s = Session::new(cfg);
    match target {
        Target::Ingest => s.write_report()?,
        Target::Vectorize => s.write_matrix()?,
        Target::FitTopics => s.write_topics()?,
        Target::BuildTfn => s.write_edges()?,
        Target::PageRank { year, topic } => s.write_pagerank(year, topic)?,
        Target::Communities => s.write_communities()?,
        Target::KCores => s.write_kcores()?,
        Target::Flows => s.write_flows()?,
        Target::Metrics => s.write_metrics()?,
        Target::ExportSankey => {
            s.model()?;
            s.write_sankey()?
        }
        Target::Run => {
            s.write_report()?;
            s.write_matrix()?;
            s.write_topics()?;
            s.write_edges()?;
            let years = s.tfn()?.years().to_vec();
            for y in years {
                s.write_pagerank(Some(y), None)?;
            }
            s.write_communities()?;
            s.write_kcores()?;
            s.write_flows()?;
            s.write_metrics()?;
            s.write_sankey()?;
            s.write_manifest()?;
        }
    }
    Ok(s.written)
}

/// Full pipeline; shorthand for `execute(cfg, Target::Run)`.
pub fn run_pipeline(cfg: &RunConfig) -> StageResult<Vec<PathBuf>> {
    execute(cfg, Target::Run)
}
