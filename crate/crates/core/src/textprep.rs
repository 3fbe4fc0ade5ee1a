//! Tokenization, the stop-word language heuristic and the tf-idf matrix.
//!
//! Weighting: `tf` is the raw in-document count, `idf(t) = ln((1 + N) / (1 +
//! df(t))) + 1` with `N` training documents, and every non-empty row is
//! L2-normalized. The stored document frequencies let [`vectorize`] apply the
//! same weighting to documents that were not part of training.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::corpus::{Corpus, PublicationRecord};
use crate::{Error, Result};

/// Default share of stop-word tokens for a document to count as English.
pub const DEFAULT_ENGLISH_THRESHOLD: f64 = 0.10;

/// Default minimum document frequency for a term to enter the vocabulary.
pub const DEFAULT_MIN_DF: usize = 2;

/// Lowercased alphabetic tokens of at least two characters. Everything that
/// is not alphabetic separates tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphabetic())
        .filter(|t| t.chars().nth(1).is_some())
        .map(str::to_lowercase)
        .collect()
}

/// An English stop-word list.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StopWords(HashSet<String>);

impl StopWords {
    /// One token per line; blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Self {
        StopWords(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_lowercase)
                .collect(),
        )
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text))
    }

    pub fn contains(&self, token: &str) -> bool {
        self.0.contains(token)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<S: Into<String>> FromIterator<S> for StopWords {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        StopWords(iter.into_iter().map(Into::into).collect())
    }
}

/// True iff at least `threshold` of the tokens (counted with multiplicity)
/// are stop words. An empty document is never English.
pub fn is_english(tokens: &[String], stopwords: &StopWords, threshold: f64) -> bool {
    if tokens.is_empty() {
        return false;
    }
    let hits = tokens.iter().filter(|t| stopwords.contains(t)).count();
    hits as f64 >= threshold * tokens.len() as f64
}

/// Term to column mapping plus the document frequencies the idf uses.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
    document_frequency: Vec<usize>,
    n_documents: usize,
}

impl Vocabulary {
    /// `terms` and `document_frequency` are parallel; columns follow `terms`.
    pub fn new(terms: Vec<String>, document_frequency: Vec<usize>, n_documents: usize) -> Result<Self> {
        if terms.len() != document_frequency.len() {
            return Err(Error::param("terms and document frequencies differ in length"));
        }
        if document_frequency.iter().any(|&df| df == 0 || df > n_documents) {
            return Err(Error::param("document frequency outside 1..=n_documents"));
        }
        let index: HashMap<String, usize> =
            terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        if index.len() != terms.len() {
            return Err(Error::param("duplicate vocabulary term"));
        }
        Ok(Vocabulary {
            terms,
            index,
            document_frequency,
            n_documents,
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn term(&self, col: usize) -> &str {
        &self.terms[col]
    }

    pub fn column(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn document_frequency(&self, col: usize) -> usize {
        self.document_frequency[col]
    }

    pub fn n_documents(&self) -> usize {
        self.n_documents
    }

    pub fn idf(&self, col: usize) -> f64 {
        let n = self.n_documents as f64;
        ((1.0 + n) / (1.0 + self.document_frequency[col] as f64)).ln() + 1.0
    }

    /// Weighted, L2-normalized vector for a bag of tokens. Out-of-vocabulary
    /// tokens are ignored.
    pub fn weigh<'a>(&self, tokens: impl IntoIterator<Item = &'a str>) -> SparseVector {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for t in tokens {
            if let Some(col) = self.column(t) {
                *counts.entry(col).or_default() += 1;
            }
        }
        let mut v = SparseVector {
            indices: counts.keys().copied().collect(),
            values: counts
                .iter()
                .map(|(&col, &tf)| tf as f64 * self.idf(col))
                .collect(),
        };
        v.normalize();
        v
    }
}

/// Sparse vector with strictly increasing indices.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseVector {
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseVector {
    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn is_zero(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    fn normalize(&mut self) {
        let norm = self.norm();
        if norm > 0.0 {
            self.values.iter_mut().for_each(|v| *v /= norm);
        }
    }
}

/// Row-major sparse document-term matrix (CSR).
#[derive(Debug, Clone, PartialEq)]
pub struct DocTermMatrix {
    rows: Vec<String>,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
    vocabulary: Vocabulary,
}

impl DocTermMatrix {
    /// Assembles a matrix from per-row sparse vectors.
    ///
    /// Fails if a value is non-positive or non-finite, or a column is out of
    /// range.
    pub fn from_rows(
        rows: Vec<(String, SparseVector)>,
        vocabulary: Vocabulary,
    ) -> Result<Self> {
        let mut m = DocTermMatrix {
            rows: Vec::with_capacity(rows.len()),
            indptr: vec![0],
            indices: Vec::new(),
            values: Vec::new(),
            vocabulary,
        };
        for (id, v) in rows {
            if v.indices.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::param(format!("row {id}: unsorted columns")));
            }
            for (col, val) in v.iter() {
                if col >= m.vocabulary.len() {
                    return Err(Error::param(format!("row {id}: column {col} out of range")));
                }
                if !(val > 0.0 && val.is_finite()) {
                    return Err(Error::Numeric(format!("row {id}: invalid entry {val}")));
                }
            }
            m.rows.push(id);
            m.indices.extend(v.indices);
            m.values.extend(v.values);
            m.indptr.push(m.indices.len());
        }
        Ok(m)
    }

    /// Matrix from a dense array; zeros are not stored. Terms are named
    /// `t0, t1, ...` with document frequencies taken from the data.
    pub fn from_dense(data: &[Vec<f64>]) -> Result<Self> {
        let n_cols = data.first().map_or(0, Vec::len);
        let mut df = vec![0usize; n_cols];
        let mut rows = Vec::with_capacity(data.len());
        for (i, row) in data.iter().enumerate() {
            if row.len() != n_cols {
                return Err(Error::param("ragged dense matrix"));
            }
            let mut v = SparseVector::default();
            for (j, &x) in row.iter().enumerate() {
                if x != 0.0 {
                    v.indices.push(j);
                    v.values.push(x);
                    df[j] += 1;
                }
            }
            rows.push((format!("d{i}"), v));
        }
        let terms = (0..n_cols).map(|j| format!("t{j:04}")).collect();
        let df = df.into_iter().map(|d| d.max(1)).collect();
        let vocab = Vocabulary::new(terms, df, data.len().max(1))?;
        Self::from_rows(rows, vocab)
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Document ids in row order.
    pub fn rows(&self) -> &[String] {
        &self.rows
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[i]..self.indptr[i + 1];
        self.indices[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn row_vector(&self, i: usize) -> SparseVector {
        let span = self.indptr[i]..self.indptr[i + 1];
        SparseVector {
            indices: self.indices[span.clone()].to_vec(),
            values: self.values[span].to_vec(),
        }
    }

    pub fn row_index(&self, doc_id: &str) -> Option<usize> {
        self.rows.iter().position(|r| r == doc_id)
    }

    /// Squared Frobenius norm.
    pub fn squared_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    /// Writes `row<TAB>term<TAB>value` lines, values in full precision.
    pub fn write_tsv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "row\tterm\tvalue")?;
        for (i, id) in self.rows.iter().enumerate() {
            for (col, val) in self.row(i) {
                writeln!(out, "{id}\t{}\t{val}", self.vocabulary.term(col))?;
            }
        }
        Ok(())
    }
}

/// Options for [`build_matrix`].
#[derive(Debug, Clone)]
pub struct MatrixOptions {
    pub english_threshold: f64,
    pub require_abstract: bool,
    pub min_df: usize,
}

impl Default for MatrixOptions {
    fn default() -> Self {
        MatrixOptions {
            english_threshold: DEFAULT_ENGLISH_THRESHOLD,
            require_abstract: true,
            min_df: DEFAULT_MIN_DF,
        }
    }
}

/// Content tokens of a record: title plus abstract, stop words removed.
pub fn content_tokens(record: &PublicationRecord, stopwords: &StopWords) -> Vec<String> {
    let mut tokens = tokenize(&record.text());
    tokens.retain(|t| !stopwords.contains(t));
    tokens
}

/// Whether a record passes the language heuristic on its title and abstract.
pub fn record_is_english(record: &PublicationRecord, stopwords: &StopWords, threshold: f64) -> bool {
    is_english(&tokenize(&record.text()), stopwords, threshold)
}

/// Builds the training tf-idf matrix.
///
/// Non-English documents are dropped first, then (optionally) documents
/// without an abstract. Documents that end up with no in-vocabulary term stay
/// as empty rows so row order still follows the corpus.
pub fn build_matrix(
    corpus: &Corpus,
    stopwords: &StopWords,
    opts: &MatrixOptions,
) -> Result<DocTermMatrix> {
    if !(0.0..=1.0).contains(&opts.english_threshold) {
        return Err(Error::param(format!(
            "english threshold {} outside [0, 1]",
            opts.english_threshold
        )));
    }
    let docs: Vec<(String, Vec<String>)> = corpus
        .records()
        .par_iter()
        .filter_map(|r| {
            let tokens = tokenize(&r.text());
            if !is_english(&tokens, stopwords, opts.english_threshold) {
                return None;
            }
            if opts.require_abstract && !r.has_abstract() {
                return None;
            }
            let content = tokens.into_iter().filter(|t| !stopwords.contains(t)).collect();
            Some((r.paper_id.clone(), content))
        })
        .collect();
    if docs.is_empty() {
        return Err(Error::EmptyMatrix);
    }

    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for (_, tokens) in &docs {
        let unique: HashSet<&str> = tokens.iter().map(String::as_str).collect();
        for t in unique {
            *df.entry(t).or_default() += 1;
        }
    }
    let (terms, freqs): (Vec<String>, Vec<usize>) = df
        .into_iter()
        .filter(|&(_, n)| n >= opts.min_df)
        .map(|(t, n)| (t.to_string(), n))
        .unzip();
    let vocabulary = Vocabulary::new(terms, freqs, docs.len())?;

    let rows = docs
        .par_iter()
        .map(|(id, tokens)| (id.clone(), vocabulary.weigh(tokens.iter().map(String::as_str))))
        .collect();
    DocTermMatrix::from_rows(rows, vocabulary)
}

/// tf-idf vector of a record against a trained vocabulary.
pub fn vectorize(vocabulary: &Vocabulary, record: &PublicationRecord, stopwords: &StopWords) -> SparseVector {
    let tokens = content_tokens(record, stopwords);
    vocabulary.weigh(tokens.iter().map(String::as_str))
}
