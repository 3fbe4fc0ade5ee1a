//! Publication records, JSON Lines ingestion and the windowed author-year
//! selection.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Year};

/// Default publication-lag window: papers from `y-2..=y` count for year `y`.
pub const DEFAULT_WINDOW: u32 = 2;

/// One paper.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicationRecord {
    #[serde(rename = "id")]
    pub paper_id: String,
    pub title: String,
    #[serde(rename = "abstract", default)]
    pub abstract_text: Option<String>,
    pub authors: Vec<String>,
    pub year: Year,
    #[serde(rename = "fields", default)]
    pub fields_of_study: Vec<String>,
}

impl PublicationRecord {
    /// Title and abstract joined by a space.
    pub fn text(&self) -> String {
        match &self.abstract_text {
            Some(a) => format!("{} {}", self.title, a),
            None => self.title.clone(),
        }
    }

    pub fn has_abstract(&self) -> bool {
        self.abstract_text
            .as_deref()
            .is_some_and(|a| !a.trim().is_empty())
    }

    /// Collapses whitespace in author names and drops duplicates, keeping the
    /// first occurrence. Fails on an empty id or an empty author list.
    fn normalize(mut self) -> std::result::Result<Self, String> {
        if self.paper_id.trim().is_empty() {
            return Err("empty id".into());
        }
        let mut seen = HashSet::new();
        let mut authors = Vec::with_capacity(self.authors.len());
        for raw in &self.authors {
            let name = normalize_author(raw);
            if !name.is_empty() && seen.insert(name.clone()) {
                authors.push(name);
            }
        }
        if authors.is_empty() {
            return Err("no authors".into());
        }
        self.authors = authors;
        Ok(self)
    }
}

/// Collapses runs of whitespace to one space and trims; case is kept.
pub fn normalize_author(raw: &str) -> String {
    raw.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Counts from [`load_corpus`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadReport {
    /// Non-blank input lines.
    pub total: usize,
    /// Lines that failed to parse or validate (including duplicate ids).
    pub malformed: usize,
    /// Well-formed records dropped by the year or field filters.
    pub filtered: usize,
}

impl LoadReport {
    pub fn skipped(&self) -> usize {
        self.malformed + self.filtered
    }
}

impl std::fmt::Display for LoadReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "skipped={} total={}", self.skipped(), self.total)
    }
}

/// Record filter applied during ingestion.
#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub min_year: Year,
    pub max_year: Year,
    /// When non-empty, a record must carry at least one of these fields.
    pub include_fields: BTreeSet<String>,
    /// A record carrying any of these fields is dropped.
    pub exclude_fields: BTreeSet<String>,
}

impl LoadOptions {
    pub fn years(min_year: Year, max_year: Year) -> Self {
        LoadOptions {
            min_year,
            max_year,
            include_fields: BTreeSet::new(),
            exclude_fields: BTreeSet::new(),
        }
    }

    fn accepts(&self, r: &PublicationRecord) -> bool {
        if r.year < self.min_year || r.year > self.max_year {
            return false;
        }
        let has = |set: &BTreeSet<String>| r.fields_of_study.iter().any(|f| set.contains(f));
        (self.include_fields.is_empty() || has(&self.include_fields)) && !has(&self.exclude_fields)
    }
}

/// An immutable, indexed set of publication records sorted by paper id.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    records: Vec<PublicationRecord>,
    author_index: BTreeMap<String, Vec<(usize, Year)>>,
    year_range: (Year, Year),
}

impl Corpus {
    /// Builds a corpus from already-validated records. Author lists are
    /// normalized; records outside `year_range` are rejected.
    pub fn from_records(
        records: impl IntoIterator<Item = PublicationRecord>,
        year_range: (Year, Year),
    ) -> Result<Self> {
        let mut by_id = BTreeMap::new();
        for r in records {
            let r = r
                .normalize()
                .map_err(|e| Error::Format(format!("invalid record: {e}")))?;
            if r.year < year_range.0 || r.year > year_range.1 {
                return Err(Error::Format(format!(
                    "record {} has year {} outside [{}, {}]",
                    r.paper_id, r.year, year_range.0, year_range.1
                )));
            }
            let id = r.paper_id.clone();
            if by_id.insert(id.clone(), r).is_some() {
                return Err(Error::Format(format!("duplicate paper id {id}")));
            }
        }
        Ok(Self::index(by_id.into_values().collect(), year_range))
    }

    fn index(records: Vec<PublicationRecord>, year_range: (Year, Year)) -> Self {
        let mut author_index: BTreeMap<String, Vec<(usize, Year)>> = BTreeMap::new();
        for (i, r) in records.iter().enumerate() {
            for a in &r.authors {
                author_index.entry(a.clone()).or_default().push((i, r.year));
            }
        }
        Corpus {
            records,
            author_index,
            year_range,
        }
    }

    /// Records in paper-id order.
    pub fn records(&self) -> &[PublicationRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, paper_id: &str) -> Option<&PublicationRecord> {
        self.records
            .binary_search_by(|r| r.paper_id.as_str().cmp(paper_id))
            .ok()
            .map(|i| &self.records[i])
    }

    pub fn year_range(&self) -> (Year, Year) {
        self.year_range
    }

    /// Distinct years that actually carry a publication, ascending.
    pub fn years(&self) -> Vec<Year> {
        let ys: BTreeSet<Year> = self.records.iter().map(|r| r.year).collect();
        ys.into_iter().collect()
    }

    /// All authors, sorted.
    pub fn authors(&self) -> impl Iterator<Item = &str> {
        self.author_index.keys().map(String::as_str)
    }

    /// `(record index, year)` pairs of an author's papers, in paper-id order.
    pub fn papers_of(&self, author: &str) -> &[(usize, Year)] {
        self.author_index
            .get(author)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Record indices of `author`'s papers published in `[year - window, year]`,
    /// in paper-id order.
    pub fn select_indices(&self, author: &str, year: Year, window: u32) -> Vec<usize> {
        let lo = year.saturating_sub(window as Year);
        self.papers_of(author)
            .iter()
            .filter(|&&(_, y)| y >= lo && y <= year)
            .map(|&(i, _)| i)
            .collect()
    }

    /// Paper ids attributed to `author` for `year` under the publication-lag
    /// window. Unknown authors select nothing.
    pub fn select(&self, author: &str, year: Year, window: u32) -> BTreeSet<String> {
        self.select_indices(author, year, window)
            .into_iter()
            .map(|i| self.records[i].paper_id.clone())
            .collect()
    }

    /// A new corpus holding the records for which `keep` returns true.
    pub fn retain(&self, mut keep: impl FnMut(&PublicationRecord) -> bool) -> Corpus {
        let records = self.records.iter().filter(|r| keep(r)).cloned().collect();
        Self::index(records, self.year_range)
    }
}

/// Reads a JSON Lines corpus.
///
/// Malformed lines and duplicate ids are counted and skipped; records outside
/// the year range or failing the field filter are dropped. More than half of
/// the non-blank lines being malformed aborts with [`Error::Format`].
pub fn load_corpus(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<(Corpus, LoadReport)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(BufReader::new(file), opts).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

/// [`load_corpus`] over any reader.
pub fn parse_corpus(reader: impl BufRead, opts: &LoadOptions) -> Result<(Corpus, LoadReport)> {
    if opts.min_year > opts.max_year {
        return Err(Error::param(format!(
            "min_year {} > max_year {}",
            opts.min_year, opts.max_year
        )));
    }
    let mut report = LoadReport::default();
    let mut by_id: BTreeMap<String, PublicationRecord> = BTreeMap::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<input>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        report.total += 1;
        let record = serde_json::from_str::<PublicationRecord>(&line)
            .map_err(|e| e.to_string())
            .and_then(PublicationRecord::normalize);
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                log::warn!("line {}: skipping malformed record: {e}", lineno + 1);
                report.malformed += 1;
                continue;
            }
        };
        if by_id.contains_key(&record.paper_id) {
            log::warn!("line {}: duplicate id {}", lineno + 1, record.paper_id);
            report.malformed += 1;
            continue;
        }
        if !opts.accepts(&record) {
            report.filtered += 1;
            continue;
        }
        by_id.insert(record.paper_id.clone(), record);
    }
    if report.total > 0 && report.malformed * 2 > report.total {
        return Err(Error::Format(format!(
            "{} of {} lines are malformed; wrong input file?",
            report.malformed, report.total
        )));
    }
    let corpus = Corpus::index(by_id.into_values().collect(), (opts.min_year, opts.max_year));
    Ok((corpus, report))
}
