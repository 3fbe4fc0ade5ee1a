//! Non-negative matrix factorization of the tf-idf matrix.
//!
//! `X ≈ W H` with `W` (documents × topics) and `H` (topics × terms), fitted by
//! multiplicative updates on the squared Frobenius loss. Both updates are
//! individually non-increasing in the loss, so the recorded error trace is
//! monotone up to rounding.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::{Array1, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::corpus::Corpus;
use crate::textprep::{vectorize, DocTermMatrix, SparseVector, StopWords, Vocabulary};
use crate::{Error, Result, Topic, Year};

pub const DEFAULT_TOPICS: usize = 64;
pub const DEFAULT_MAX_ITER: usize = 200;
pub const DEFAULT_TOL: f64 = 1e-4;

/// Iterations of the non-negative projection used for unseen documents.
const PROJECTION_ITER: usize = 500;

#[derive(Debug, Clone, PartialEq)]
pub struct NmfOptions {
    pub n_topics: usize,
    pub max_iter: usize,
    /// Stop once the relative improvement of the squared error drops below this.
    pub tol: f64,
    pub seed: u64,
}

impl Default for NmfOptions {
    fn default() -> Self {
        NmfOptions {
            n_topics: DEFAULT_TOPICS,
            max_iter: DEFAULT_MAX_ITER,
            tol: DEFAULT_TOL,
            seed: 0,
        }
    }
}

/// Per-paper topic proportions, or an author's summed proportions.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicVector(pub Vec<f64>);

impl TopicVector {
    pub fn zeros(n: usize) -> Self {
        TopicVector(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, topic: Topic) -> f64 {
        self.0[topic]
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0.0)
    }

    pub fn add_assign(&mut self, other: &TopicVector) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += b;
        }
    }

    /// Scales to unit L1 norm; a zero vector stays zero.
    pub fn l1_normalized(mut self) -> Self {
        let s = self.sum();
        if s > 0.0 {
            self.0.iter_mut().for_each(|x| *x /= s);
        }
        self
    }
}

/// A fitted factorization.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicModel {
    topic_term: Array2<f64>,
    doc_topic: Array2<f64>,
    documents: Vec<String>,
    terms: Vec<String>,
    training_error_trace: Vec<f64>,
    seed: u64,
    doc_rows: HashMap<String, usize>,
    /// `H Hᵀ`, cached for projections.
    gram: Array2<f64>,
}

impl TopicModel {
    fn new(
        topic_term: Array2<f64>,
        doc_topic: Array2<f64>,
        documents: Vec<String>,
        terms: Vec<String>,
        training_error_trace: Vec<f64>,
        seed: u64,
    ) -> Self {
        let doc_rows = documents.iter().enumerate().map(|(i, d)| (d.clone(), i)).collect();
        let gram = topic_term.dot(&topic_term.t());
        TopicModel {
            topic_term,
            doc_topic,
            documents,
            terms,
            training_error_trace,
            seed,
            doc_rows,
            gram,
        }
    }

    /// Model from explicit factors: `topic_term` is topics × terms and
    /// `doc_topic` documents × topics. The error trace is left empty.
    pub fn from_factors(
        topic_term: Array2<f64>,
        doc_topic: Array2<f64>,
        documents: Vec<String>,
        terms: Vec<String>,
    ) -> Result<Self> {
        if topic_term.ncols() != terms.len()
            || doc_topic.nrows() != documents.len()
            || doc_topic.ncols() != topic_term.nrows()
        {
            return Err(Error::param("factor shapes do not match documents and terms"));
        }
        if topic_term.iter().chain(doc_topic.iter()).any(|&x| !(x >= 0.0 && x.is_finite())) {
            return Err(Error::Numeric("factors must be finite and non-negative".into()));
        }
        Ok(Self::new(topic_term, doc_topic, documents, terms, Vec::new(), 0))
    }

    pub fn n_topics(&self) -> usize {
        self.topic_term.nrows()
    }

    /// Topics × terms.
    pub fn topic_term(&self) -> &Array2<f64> {
        &self.topic_term
    }

    /// Documents × topics, unnormalized.
    pub fn doc_topic(&self) -> &Array2<f64> {
        &self.doc_topic
    }

    pub fn documents(&self) -> &[String] {
        &self.documents
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    /// Squared reconstruction error before the first update and after every
    /// iteration.
    pub fn training_error_trace(&self) -> &[f64] {
        &self.training_error_trace
    }

    pub fn final_error(&self) -> f64 {
        self.training_error_trace.last().copied().unwrap_or(0.0)
    }

    pub fn iterations(&self) -> usize {
        self.training_error_trace.len().saturating_sub(1)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn doc_row(&self, doc_id: &str) -> Option<usize> {
        self.doc_rows.get(doc_id).copied()
    }

    /// Identifier recorded in network provenance.
    pub fn model_id(&self) -> String {
        format!(
            "nmf-k{}-seed{}-it{}",
            self.n_topics(),
            self.seed,
            self.iterations()
        )
    }

    /// Topic proportions of a training document, L1-normalized.
    pub fn paper_theta(&self, row: usize) -> TopicVector {
        TopicVector(self.doc_topic.row(row).to_vec()).l1_normalized()
    }

    /// Topic proportions of an arbitrary tf-idf vector, by non-negative least
    /// squares against the topic-term factor.
    pub fn project_theta(&self, v: &SparseVector) -> TopicVector {
        TopicVector(self.project(v).to_vec()).l1_normalized()
    }

    /// Non-negative `w` minimizing `||v - wᵀH||²`, via multiplicative updates
    /// from a constant start.
    pub fn project(&self, v: &SparseVector) -> Array1<f64> {
        let k = self.n_topics();
        let mut hv = Array1::<f64>::zeros(k);
        for (col, x) in v.iter() {
            if col < self.topic_term.ncols() {
                hv.scaled_add(x, &self.topic_term.column(col));
            }
        }
        let mut w = Array1::<f64>::from_elem(k, 1.0 / k as f64);
        if hv.iter().all(|&x| x == 0.0) {
            w.fill(0.0);
            return w;
        }
        for _ in 0..PROJECTION_ITER {
            let denom = self.gram.dot(&w);
            let mut change = 0.0;
            for r in 0..k {
                if denom[r] > 0.0 {
                    let next = w[r] * hv[r] / denom[r];
                    change += (next - w[r]).abs();
                    w[r] = next;
                }
            }
            if change <= 1e-12 * w.sum() {
                break;
            }
        }
        w
    }

    /// The `k` highest-weighted terms of a topic, ties broken by term.
    pub fn top_terms(&self, topic: Topic, k: usize) -> Result<Vec<(String, f64)>> {
        if topic >= self.n_topics() {
            return Err(Error::param(format!(
                "topic {topic} out of range 0..{}",
                self.n_topics()
            )));
        }
        let row = self.topic_term.row(topic);
        let mut ranked: Vec<(usize, f64)> = row.iter().copied().enumerate().collect();
        ranked.sort_by(|a, b| {
            b.1.total_cmp(&a.1)
                .then_with(|| self.terms[a.0].cmp(&self.terms[b.0]))
        });
        Ok(ranked
            .into_iter()
            .take(k)
            .map(|(j, w)| (self.terms[j].clone(), w))
            .collect())
    }

    /// Comma-joined top terms, used as a topic label.
    pub fn topic_label(&self, topic: Topic, k: usize) -> Result<String> {
        Ok(self
            .top_terms(topic, k)?
            .into_iter()
            .map(|(t, _)| t)
            .collect::<Vec<_>>()
            .join(", "))
    }

    /// Writes `topic_term.tsv`, `doc_topic.tsv`, `error_trace.tsv` and `meta`
    /// into `dir`. Values are written in shortest round-trip form.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_file(&dir.join("topic_term.tsv"), |out| {
            writeln!(out, "topic\tterm\tweight")?;
            for ((t, j), w) in self.topic_term.indexed_iter() {
                writeln!(out, "{t}\t{}\t{w:?}", self.terms[j])?;
            }
            Ok(())
        })?;
        write_file(&dir.join("doc_topic.tsv"), |out| {
            writeln!(out, "doc\ttopic\tweight")?;
            for ((i, t), w) in self.doc_topic.indexed_iter() {
                writeln!(out, "{}\t{t}\t{w:?}", self.documents[i])?;
            }
            Ok(())
        })?;
        write_file(&dir.join("error_trace.tsv"), |out| {
            writeln!(out, "iteration\terror")?;
            for (i, e) in self.training_error_trace.iter().enumerate() {
                writeln!(out, "{i}\t{e:?}")?;
            }
            Ok(())
        })?;
        write_file(&dir.join("meta"), |out| {
            writeln!(out, "n_topics={}", self.n_topics())?;
            writeln!(out, "seed={}", self.seed)?;
            writeln!(out, "iterations={}", self.iterations())?;
            writeln!(out, "final_error={:?}", self.final_error())?;
            writeln!(out, "n_documents={}", self.documents.len())?;
            writeln!(out, "n_terms={}", self.terms.len())?;
            Ok(())
        })
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let meta = read_meta(&dir.join("meta"))?;
        let get = |key: &str| -> Result<&str> {
            meta.get(key)
                .map(String::as_str)
                .ok_or_else(|| Error::Format(format!("model meta lacks {key}")))
        };
        let n_topics: usize = parse_field(get("n_topics")?, "n_topics")?;
        let seed: u64 = parse_field(get("seed")?, "seed")?;
        let n_docs: usize = parse_field(get("n_documents")?, "n_documents")?;
        let n_terms: usize = parse_field(get("n_terms")?, "n_terms")?;

        let topic_term_rows = read_tsv(&dir.join("topic_term.tsv"), 3)?;
        if topic_term_rows.len() != n_topics * n_terms {
            return Err(Error::Format("topic_term.tsv has the wrong number of rows".into()));
        }
        let mut terms = Vec::with_capacity(n_terms);
        let mut topic_term = Array2::zeros((n_topics, n_terms));
        for (i, row) in topic_term_rows.iter().enumerate() {
            let (t, j) = (i / n_terms.max(1), i % n_terms.max(1));
            if parse_field::<usize>(&row[0], "topic")? != t {
                return Err(Error::Format("topic_term.tsv out of order".into()));
            }
            if t == 0 {
                terms.push(row[1].clone());
            } else if terms[j] != row[1] {
                return Err(Error::Format("topic_term.tsv term order differs across topics".into()));
            }
            topic_term[[t, j]] = parse_field(&row[2], "weight")?;
        }

        let doc_rows = read_tsv(&dir.join("doc_topic.tsv"), 3)?;
        if doc_rows.len() != n_docs * n_topics {
            return Err(Error::Format("doc_topic.tsv has the wrong number of rows".into()));
        }
        let mut documents = Vec::with_capacity(n_docs);
        let mut doc_topic = Array2::zeros((n_docs, n_topics));
        for (i, row) in doc_rows.iter().enumerate() {
            let (d, t) = (i / n_topics.max(1), i % n_topics.max(1));
            if t == 0 {
                documents.push(row[0].clone());
            }
            doc_topic[[d, t]] = parse_field(&row[2], "weight")?;
        }

        let trace = read_tsv(&dir.join("error_trace.tsv"), 2)?
            .iter()
            .map(|r| parse_field::<f64>(&r[1], "error"))
            .collect::<Result<Vec<_>>>()?;
        Ok(TopicModel::new(topic_term, doc_topic, documents, terms, trace, seed))
    }
}

fn write_file(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<fs::File>) -> std::io::Result<()>,
) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    body(&mut out)
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

fn read_meta(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect())
}

/// Data rows (header skipped) of a TSV file with `cols` columns.
fn read_tsv(path: &Path, cols: usize) -> Result<Vec<Vec<String>>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if i == 0 || line.is_empty() {
            continue;
        }
        let fields: Vec<String> = line.splitn(cols, '\t').map(str::to_string).collect();
        if fields.len() != cols {
            return Err(Error::Format(format!(
                "{}:{}: expected {cols} columns",
                path.display(),
                i + 1
            )));
        }
        rows.push(fields);
    }
    Ok(rows)
}

fn parse_field<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::Format(format!("cannot parse {what} from {s:?}")))
}

/// Fits `X ≈ W H` by Lee–Seung multiplicative updates from a seeded uniform
/// random start in (0, 1].
pub fn fit_nmf(matrix: &DocTermMatrix, opts: &NmfOptions) -> Result<TopicModel> {
    let (m, v) = (matrix.n_rows(), matrix.n_cols());
    let k = opts.n_topics;
    if m == 0 || v == 0 || matrix.nnz() == 0 {
        return Err(Error::EmptyMatrix);
    }
    if k == 0 || k > m.min(v) {
        return Err(Error::param(format!(
            "n_topics {k} outside 1..={} for a {m}x{v} matrix",
            m.min(v)
        )));
    }
    if opts.tol.is_nan() || opts.tol < 0.0 {
        return Err(Error::param("tolerance must be non-negative"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    // 1 - U[0,1) lies in (0, 1].
    let mut w = Array2::from_shape_simple_fn((m, k), || 1.0 - rng.gen::<f64>());
    let mut h = Array2::from_shape_simple_fn((k, v), || 1.0 - rng.gen::<f64>());

    let x_sq = matrix.squared_norm();
    let mut trace = vec![squared_error(matrix, x_sq, &w, &h)];
    for _ in 0..opts.max_iter {
        update_w(matrix, &mut w, &h);
        update_h(matrix, &w, &mut h);
        let err = squared_error(matrix, x_sq, &w, &h);
        if !err.is_finite() || w.iter().chain(h.iter()).any(|x| !x.is_finite()) {
            return Err(Error::Numeric(
                "non-finite value during factorization; check input scaling".into(),
            ));
        }
        let prev = *trace.last().unwrap();
        trace.push(err);
        if prev <= 0.0 || (prev - err) / prev < opts.tol {
            break;
        }
    }

    let terms = matrix.vocabulary().terms().to_vec();
    Ok(TopicModel::new(h, w, matrix.rows().to_vec(), terms, trace, opts.seed))
}

/// `X Hᵀ` (documents × topics).
fn x_ht(x: &DocTermMatrix, h: &Array2<f64>) -> Array2<f64> {
    let k = h.nrows();
    let mut out = Array2::zeros((x.n_rows(), k));
    out.axis_iter_mut(Axis(0))
        .into_par_iter()
        .enumerate()
        .for_each(|(i, mut row)| {
            for (j, val) in x.row(i) {
                for r in 0..k {
                    row[r] += val * h[[r, j]];
                }
            }
        });
    out
}

/// `Wᵀ X` (topics × terms).
fn wt_x(x: &DocTermMatrix, w: &Array2<f64>) -> Array2<f64> {
    let k = w.ncols();
    let mut out = Array2::zeros((k, x.n_cols()));
    for i in 0..x.n_rows() {
        for (j, val) in x.row(i) {
            for r in 0..k {
                out[[r, j]] += w[[i, r]] * val;
            }
        }
    }
    out
}

/// Multiplies `factor` by `numer / denom` entrywise; entries with a zero
/// denominator are left untouched.
fn multiplicative_step(factor: &mut Array2<f64>, numer: &Array2<f64>, denom: &Array2<f64>) {
    ndarray::Zip::from(factor)
        .and(numer)
        .and(denom)
        .for_each(|f, &n, &d| {
            if d > 0.0 {
                *f *= n / d;
            }
        });
}

fn update_w(x: &DocTermMatrix, w: &mut Array2<f64>, h: &Array2<f64>) {
    let numer = x_ht(x, h);
    let denom = w.dot(&h.dot(&h.t()));
    multiplicative_step(w, &numer, &denom);
}

fn update_h(x: &DocTermMatrix, w: &Array2<f64>, h: &mut Array2<f64>) {
    let numer = wt_x(x, w);
    let denom = w.t().dot(w).dot(&*h);
    multiplicative_step(h, &numer, &denom);
}

/// `||X - W H||²` computed as `||X||² - 2 <X, WH> + <WᵀW, HHᵀ>`, clamped at 0.
fn squared_error(x: &DocTermMatrix, x_sq: f64, w: &Array2<f64>, h: &Array2<f64>) -> f64 {
    let cross = (&x_ht(x, h) * w).sum();
    let quad = (&w.t().dot(w) * &h.dot(&h.t())).sum();
    (x_sq - 2.0 * cross + quad).max(0.0)
}

/// Topic proportions for every paper of a corpus.
///
/// Training documents use their fitted row; every other paper is vectorized
/// against the training vocabulary and projected onto the topics.
#[derive(Debug, Clone, PartialEq)]
pub struct PaperThetas {
    n_topics: usize,
    model_id: String,
    by_paper: HashMap<String, TopicVector>,
}

impl PaperThetas {
    pub fn new(n_topics: usize, model_id: impl Into<String>) -> Self {
        PaperThetas {
            n_topics,
            model_id: model_id.into(),
            by_paper: HashMap::new(),
        }
    }

    pub fn infer(
        model: &TopicModel,
        corpus: &Corpus,
        vocabulary: &Vocabulary,
        stopwords: &StopWords,
    ) -> Self {
        let by_paper = corpus
            .records()
            .par_iter()
            .map(|r| {
                let theta = match model.doc_row(&r.paper_id) {
                    Some(row) => model.paper_theta(row),
                    None => model.project_theta(&vectorize(vocabulary, r, stopwords)),
                };
                (r.paper_id.clone(), theta)
            })
            .collect();
        PaperThetas {
            n_topics: model.n_topics(),
            model_id: model.model_id(),
            by_paper,
        }
    }

    /// Sets a paper's vector. Panics if the length differs from `n_topics`.
    pub fn insert(&mut self, paper_id: impl Into<String>, theta: TopicVector) {
        assert_eq!(theta.len(), self.n_topics, "topic vector length");
        self.by_paper.insert(paper_id.into(), theta);
    }

    pub fn n_topics(&self) -> usize {
        self.n_topics
    }

    pub fn model_id(&self) -> &str {
        &self.model_id
    }

    /// A paper's vector; papers without one contribute nothing.
    pub fn get(&self, paper_id: &str) -> Option<&TopicVector> {
        self.by_paper.get(paper_id)
    }

    /// Author topic vector for `year`: the sum of the paper vectors selected
    /// under the publication-lag window.
    pub fn author_theta(&self, corpus: &Corpus, author: &str, year: Year, window: u32) -> TopicVector {
        let mut acc = TopicVector::zeros(self.n_topics);
        for i in corpus.select_indices(author, year, window) {
            if let Some(t) = self.get(&corpus.records()[i].paper_id) {
                acc.add_assign(t);
            }
        }
        acc
    }
}
