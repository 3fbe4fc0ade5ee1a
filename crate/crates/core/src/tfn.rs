//! Topic Flow Network construction.
//!
//! For each year `y` and topic `t`, two authors who share at least one paper
//! selected for `y` get a `t`-labeled edge whose weight is the `t` component
//! of the summed topic vectors of their shared papers. The edge points from
//! the author with the higher expertise on `t` to the one with the lower; on
//! an exact tie both directions are stored. Self-loops carry each author's
//! expertise, the `t` component of their own summed topic vector.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use rayon::prelude::*;

use crate::corpus::Corpus;
use crate::topicmodel::PaperThetas;
use crate::{fmt, Error, Result, Topic, Year};

/// Default number of topics kept per collaborating pair and year.
pub const DEFAULT_TOP_L: usize = 8;

/// Dense author index; ids follow the lexicographic order of author names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AuthorId(pub u32);

impl AuthorId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub source: AuthorId,
    pub target: AuthorId,
    pub weight: f64,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.source == self.target
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TfnOptions {
    pub window: u32,
    pub top_l: usize,
}

impl Default for TfnOptions {
    fn default() -> Self {
        TfnOptions {
            window: crate::corpus::DEFAULT_WINDOW,
            top_l: DEFAULT_TOP_L,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub window: u32,
    pub top_l: usize,
    pub model_id: String,
}

/// Expertise of every author per year: the author's summed topic vector over
/// the windowed selection. Only authors with a non-empty selection appear.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExpertiseTable {
    n_topics: usize,
    by_author_year: BTreeMap<(AuthorId, Year), Vec<f64>>,
}

impl ExpertiseTable {
    pub fn new(n_topics: usize) -> Self {
        ExpertiseTable {
            n_topics,
            by_author_year: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, author: AuthorId, year: Year, weights: Vec<f64>) {
        assert_eq!(weights.len(), self.n_topics, "expertise vector length");
        self.by_author_year.insert((author, year), weights);
    }

    pub fn n_topics(&self) -> usize {
        self.n_topics
    }

    pub fn get(&self, author: AuthorId, year: Year) -> Option<&[f64]> {
        self.by_author_year.get(&(author, year)).map(Vec::as_slice)
    }

    pub fn expertise(&self, author: AuthorId, year: Year, topic: Topic) -> f64 {
        self.get(author, year).map_or(0.0, |w| w[topic])
    }

    pub fn iter(&self) -> impl Iterator<Item = (AuthorId, Year, &[f64])> {
        self.by_author_year
            .iter()
            .map(|(&(a, y), w)| (a, y, w.as_slice()))
    }

    /// Main topic: the topic of highest positive expertise, lowest index on
    /// ties. Absent when the author has no positive expertise in `year`.
    pub fn main_topic(&self, author: AuthorId, year: Year) -> Option<Topic> {
        let weights = self.get(author, year)?;
        let mut best: Option<(Topic, f64)> = None;
        for (t, &w) in weights.iter().enumerate() {
            if w > 0.0 && best.is_none_or(|(_, bw)| w > bw) {
                best = Some((t, w));
            }
        }
        best.map(|(t, _)| t)
    }

    /// Most frequent defined main topic among `authors`; lowest index on
    /// frequency ties.
    pub fn main_topic_of_set(&self, authors: &[AuthorId], year: Year) -> Option<Topic> {
        self.main_topic_counts(authors, year).first().map(|&(t, _)| t)
    }

    /// Main-topic frequencies among `authors`, most frequent first, ties by
    /// lower topic index. Authors without a main topic are not counted.
    pub fn main_topic_counts(&self, authors: &[AuthorId], year: Year) -> Vec<(Topic, usize)> {
        let mut counts: BTreeMap<Topic, usize> = BTreeMap::new();
        for &a in authors {
            if let Some(t) = self.main_topic(a, year) {
                *counts.entry(t).or_default() += 1;
            }
        }
        let mut ranked: Vec<_> = counts.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        ranked
    }
}

/// Directed, topic- and year-labeled multigraph over authors.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicFlowNetwork {
    authors: Vec<String>,
    author_ids: HashMap<String, AuthorId>,
    years: Vec<Year>,
    n_topics: usize,
    /// Edges per (year, topic), sorted by (source, target). Empty relations
    /// are not stored.
    edges: BTreeMap<(Year, Topic), Vec<Edge>>,
    expertise: ExpertiseTable,
    provenance: Provenance,
}

impl TopicFlowNetwork {
    pub fn authors(&self) -> &[String] {
        &self.authors
    }

    pub fn n_authors(&self) -> usize {
        self.authors.len()
    }

    pub fn author_name(&self, id: AuthorId) -> &str {
        &self.authors[id.index()]
    }

    pub fn author_id(&self, name: &str) -> Option<AuthorId> {
        self.author_ids.get(name).copied()
    }

    pub fn years(&self) -> &[Year] {
        &self.years
    }

    pub fn n_topics(&self) -> usize {
        self.n_topics
    }

    pub fn expertise(&self) -> &ExpertiseTable {
        &self.expertise
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Edge relation `E_{y,t}`, self-loops included.
    pub fn edges(&self, year: Year, topic: Topic) -> &[Edge] {
        self.edges.get(&(year, topic)).map_or(&[], Vec::as_slice)
    }

    /// Every stored edge with its (year, topic) label.
    pub fn all_edges(&self) -> impl Iterator<Item = (Year, Topic, &Edge)> {
        self.edges
            .iter()
            .flat_map(|(&(y, t), es)| es.iter().map(move |e| (y, t, e)))
    }

    pub fn n_edges(&self) -> usize {
        self.edges.values().map(Vec::len).sum()
    }

    /// Unrestricted view.
    pub fn view(&self) -> TfnView<'_> {
        TfnView {
            tfn: self,
            year: None,
            topic: None,
        }
    }

    /// View restricted to one year and/or one topic.
    pub fn restrict(&self, year: Option<Year>, topic: Option<Topic>) -> Result<TfnView<'_>> {
        if let Some(y) = year {
            if !self.years.contains(&y) {
                return Err(Error::param(format!("year {y} is not part of the network")));
            }
        }
        if let Some(t) = topic {
            if t >= self.n_topics {
                return Err(Error::param(format!(
                    "topic {t} out of range 0..{}",
                    self.n_topics
                )));
            }
        }
        Ok(TfnView {
            tfn: self,
            year,
            topic,
        })
    }

    /// Edge list as TSV: `year, topic, source, target, weight`, in (year,
    /// topic, source, target) order with self-loops included.
    pub fn write_edges_tsv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "year\ttopic\tsource\ttarget\tweight")?;
        for (y, t, e) in self.all_edges() {
            writeln!(
                out,
                "{y}\t{t}\t{}\t{}\t{}",
                self.author_name(e.source),
                self.author_name(e.target),
                fmt::num(e.weight)
            )?;
        }
        Ok(())
    }
}

/// Read-only restriction of a network. The node set is always the full
/// author set of the network.
#[derive(Debug, Clone, Copy)]
pub struct TfnView<'a> {
    tfn: &'a TopicFlowNetwork,
    year: Option<Year>,
    topic: Option<Topic>,
}

impl<'a> TfnView<'a> {
    pub fn network(&self) -> &'a TopicFlowNetwork {
        self.tfn
    }

    pub fn year(&self) -> Option<Year> {
        self.year
    }

    pub fn topic(&self) -> Option<Topic> {
        self.topic
    }

    pub fn n_nodes(&self) -> usize {
        self.tfn.n_authors()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Year, Topic, &'a Edge)> + 'a {
        let (year, topic) = (self.year, self.topic);
        self.tfn
            .edges
            .iter()
            .filter(move |(&(y, t), _)| {
                year.is_none_or(|yy| yy == y) && topic.is_none_or(|tt| tt == t)
            })
            .flat_map(|(&(y, t), es)| es.iter().map(move |e| (y, t, e)))
    }

    /// Nodes touched by at least one edge of the view, self-loops included,
    /// in id order.
    pub fn active_nodes(&self) -> Vec<AuthorId> {
        let mut seen = vec![false; self.tfn.n_authors()];
        for (_, _, e) in self.edges() {
            seen[e.source.index()] = true;
            seen[e.target.index()] = true;
        }
        seen.iter()
            .enumerate()
            .filter(|(_, &s)| s)
            .map(|(i, _)| AuthorId(i as u32))
            .collect()
    }
}

/// Builds the network for the given years.
///
/// Per collaborating pair and year only the `top_l` topics with the largest
/// shared weight keep their edges (lower topic index first on ties);
/// self-loops are never restricted. Zero-weight edges are not stored.
pub fn build_tfn(
    corpus: &Corpus,
    thetas: &PaperThetas,
    years: &[Year],
    opts: TfnOptions,
) -> Result<TopicFlowNetwork> {
    if years.is_empty() {
        return Err(Error::param("no years requested"));
    }
    if opts.top_l == 0 {
        return Err(Error::param("top_l must be at least 1"));
    }
    let mut years = years.to_vec();
    years.sort_unstable();
    years.dedup();

    let authors: Vec<String> = corpus.authors().map(str::to_string).collect();
    let author_ids: HashMap<String, AuthorId> = authors
        .iter()
        .enumerate()
        .map(|(i, a)| (a.clone(), AuthorId(i as u32)))
        .collect();
    let n_topics = thetas.n_topics();

    let per_year: Vec<(Year, YearEdges)> = years
        .par_iter()
        .map(|&y| (y, build_year(corpus, thetas, &author_ids, y, opts)))
        .collect();

    let mut edges = BTreeMap::new();
    let mut expertise = ExpertiseTable::new(n_topics);
    for (y, year_edges) in per_year {
        for (t, es) in year_edges.by_topic.into_iter().enumerate() {
            if !es.is_empty() {
                edges.insert((y, t), es);
            }
        }
        for (a, w) in year_edges.expertise {
            expertise.insert(a, y, w);
        }
    }

    Ok(TopicFlowNetwork {
        authors,
        author_ids,
        years,
        n_topics,
        edges,
        expertise,
        provenance: Provenance {
            window: opts.window,
            top_l: opts.top_l,
            model_id: thetas.model_id().to_string(),
        },
    })
}

struct YearEdges {
    by_topic: Vec<Vec<Edge>>,
    expertise: BTreeMap<AuthorId, Vec<f64>>,
}

fn build_year(
    corpus: &Corpus,
    thetas: &PaperThetas,
    ids: &HashMap<String, AuthorId>,
    year: Year,
    opts: TfnOptions,
) -> YearEdges {
    let n_topics = thetas.n_topics();
    let lo = year.saturating_sub(opts.window as Year);
    let add = |acc: &mut Vec<f64>, theta: &[f64]| {
        for (a, b) in acc.iter_mut().zip(theta) {
            *a += b;
        }
    };

    // Papers are visited in paper-id order, so every sum accumulates in the
    // same order as a per-author selection would.
    let mut expertise: BTreeMap<AuthorId, Vec<f64>> = BTreeMap::new();
    let mut shared: BTreeMap<(AuthorId, AuthorId), Vec<f64>> = BTreeMap::new();
    for r in corpus.records().iter().filter(|r| r.year >= lo && r.year <= year) {
        let members: Vec<AuthorId> = r.authors.iter().map(|a| ids[a]).collect();
        let theta = thetas.get(&r.paper_id).map(|t| t.0.as_slice());
        for (i, &a) in members.iter().enumerate() {
            let acc = expertise.entry(a).or_insert_with(|| vec![0.0; n_topics]);
            if let Some(th) = theta {
                add(acc, th);
            }
            for &b in &members[i + 1..] {
                let key = if a < b { (a, b) } else { (b, a) };
                let acc = shared.entry(key).or_insert_with(|| vec![0.0; n_topics]);
                if let Some(th) = theta {
                    add(acc, th);
                }
            }
        }
    }

    let mut by_topic: Vec<Vec<Edge>> = vec![Vec::new(); n_topics];
    for (&(a, b), weights) in &shared {
        let mut topics: Vec<Topic> = (0..n_topics).filter(|&t| weights[t] > 0.0).collect();
        topics.sort_by(|&s, &t| weights[t].total_cmp(&weights[s]).then(s.cmp(&t)));
        topics.truncate(opts.top_l);
        for t in topics {
            let (ea, eb) = (expertise[&a][t], expertise[&b][t]);
            let weight = weights[t];
            if ea >= eb {
                by_topic[t].push(Edge { source: a, target: b, weight });
            }
            if eb >= ea {
                by_topic[t].push(Edge { source: b, target: a, weight });
            }
        }
    }
    for (&a, w) in &expertise {
        for (t, &x) in w.iter().enumerate() {
            if x > 0.0 {
                by_topic[t].push(Edge { source: a, target: a, weight: x });
            }
        }
    }
    for es in &mut by_topic {
        es.sort_by_key(|e| (e.source, e.target));
    }
    YearEdges {
        by_topic,
        expertise,
    }
}
