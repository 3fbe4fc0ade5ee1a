//! CSV and JSON artifacts of the analyses.
//!
//! Numbers are written with nine significant digits unless noted otherwise.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::analysis::{top_flows, CommunitySummary, CoreGrid, FlowMatrix, SmallWorld};
use crate::fmt::num;
use crate::tfn::{AuthorId, TopicFlowNetwork};
use crate::topicmodel::TopicModel;
use crate::{Error, Result, Topic, Year};

/// Terms per topic label.
pub const LABEL_TERMS: usize = 5;

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

fn csv_err(e: csv::Error) -> std::io::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => e,
        other => std::io::Error::other(format!("{other:?}")),
    }
}

/// `author,score`, highest score first, ties by author name.
pub fn write_pagerank_csv(
    tfn: &TopicFlowNetwork,
    scores: &[(AuthorId, f64)],
    out: impl Write,
) -> std::io::Result<()> {
    let mut ranked: Vec<(&str, f64)> = scores
        .iter()
        .map(|&(a, s)| (tfn.author_name(a), s))
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(b.0)));
    let mut w = csv_writer(out);
    w.write_record(["author", "score"]).map_err(csv_err)?;
    for (author, score) in ranked {
        w.write_record([author, &num(score)]).map_err(csv_err)?;
    }
    w.flush()
}

/// `year,block_id,size,main_topic,second_topic`; missing topics are empty.
pub fn write_communities_csv(summaries: &[CommunitySummary], out: impl Write) -> std::io::Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["year", "block_id", "size", "main_topic", "second_topic"])
        .map_err(csv_err)?;
    for s in summaries {
        for b in &s.blocks {
            let topic = |i: usize| b.topics.get(i).map_or(String::new(), |t| t.0.to_string());
            w.write_record([
                s.year.to_string(),
                b.block_id.to_string(),
                b.size.to_string(),
                topic(0),
                topic(1),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush()
}

/// `year,topic,size`: summed size of the communities led by each main topic.
pub fn write_community_sizes_csv(summaries: &[CommunitySummary], out: impl Write) -> std::io::Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["year", "topic", "size"]).map_err(csv_err)?;
    for s in summaries {
        for (t, size) in &s.topic_sizes {
            w.write_record([s.year.to_string(), t.to_string(), size.to_string()])
                .map_err(csv_err)?;
        }
    }
    w.flush()
}

/// Topics as rows, years as columns.
pub fn write_core_grid_csv(grid: &CoreGrid, out: impl Write) -> std::io::Result<()> {
    let mut w = csv_writer(out);
    let header: Vec<String> = std::iter::once("topic".to_string())
        .chain(grid.years.iter().map(Year::to_string))
        .collect();
    w.write_record(&header).map_err(csv_err)?;
    for (t, row) in grid.values.iter().enumerate() {
        let record: Vec<String> = std::iter::once(t.to_string())
            .chain(row.iter().map(usize::to_string))
            .collect();
        w.write_record(&record).map_err(csv_err)?;
    }
    w.flush()
}

/// Square matrix with topic indices as header and first column; rows are
/// source topics.
pub fn write_flow_matrix_csv(matrix: &FlowMatrix, out: impl Write) -> std::io::Result<()> {
    let mut w = csv_writer(out);
    let n = matrix.n_topics();
    let header: Vec<String> = std::iter::once("topic".to_string())
        .chain((0..n).map(|t| t.to_string()))
        .collect();
    w.write_record(&header).map_err(csv_err)?;
    for (t, row) in matrix.values.iter().enumerate() {
        let record: Vec<String> = std::iter::once(t.to_string())
            .chain(row.iter().map(|&v| num(v)))
            .collect();
        w.write_record(&record).map_err(csv_err)?;
    }
    w.flush()
}

/// Reads a matrix written by [`write_flow_matrix_csv`].
pub fn read_flow_matrix_csv(year: Year, input: impl std::io::Read) -> Result<FlowMatrix> {
    let mut r = csv::Reader::from_reader(input);
    let bad = |msg: String| Error::Format(format!("flow matrix: {msg}"));
    let n = r.headers().map_err(|e| bad(e.to_string()))?.len().saturating_sub(1);
    let mut values = Vec::with_capacity(n);
    for rec in r.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let row = rec
            .iter()
            .skip(1)
            .map(|v| v.parse::<f64>().map_err(|e| bad(e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        if row.len() != n {
            return Err(bad("ragged row".into()));
        }
        values.push(row);
    }
    if values.len() != n {
        return Err(bad("not square".into()));
    }
    Ok(FlowMatrix { year, values })
}

/// One row of the metrics table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRow {
    pub year: Year,
    pub topic: Topic,
    pub metrics: SmallWorld,
}

/// `year,topic,asp,alc`; an undefined ASP is written as an empty field.
pub fn write_metrics_csv(rows: &[MetricsRow], out: impl Write) -> std::io::Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["year", "topic", "asp", "alc"]).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.year.to_string(),
            r.topic.to_string(),
            r.metrics.asp.map_or(String::new(), num),
            num(r.metrics.alc),
        ])
        .map_err(csv_err)?;
    }
    w.flush()
}

/// `topic,label` with the top terms of every topic.
pub fn write_topics_csv(model: &TopicModel, out: impl Write) -> Result<()> {
    let mut w = csv_writer(out);
    let io = |e: std::io::Error| Error::Format(e.to_string());
    w.write_record(["topic", "label"]).map_err(|e| io(csv_err(e)))?;
    for t in 0..model.n_topics() {
        w.write_record([t.to_string(), model.topic_label(t, LABEL_TERMS)?])
            .map_err(|e| io(csv_err(e)))?;
    }
    w.flush().map_err(io)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Source,
    Target,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SankeyNode {
    pub id: String,
    pub side: Side,
    pub topic: Topic,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SankeyLink {
    pub source: String,
    pub target: String,
    pub value: f64,
}

/// Flow diagram data: source topics on the left, target topics on the right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SankeyDocument {
    pub year: Year,
    pub nodes: Vec<SankeyNode>,
    pub links: Vec<SankeyLink>,
}

impl SankeyDocument {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sankey document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(format!("sankey document: {e}")))
    }
}

/// Renders the `k` strongest flows as a Sankey document. Nodes appear in the
/// order links first reference them; a topic on both sides yields two nodes.
pub fn export_sankey(
    matrix: &FlowMatrix,
    model: &TopicModel,
    k: usize,
    exclude_intra: bool,
) -> Result<SankeyDocument> {
    if matrix.n_topics() != model.n_topics() {
        return Err(Error::param(format!(
            "flow matrix has {} topics, model has {}",
            matrix.n_topics(),
            model.n_topics()
        )));
    }
    let mut nodes = Vec::new();
    let mut seen: BTreeMap<String, ()> = BTreeMap::new();
    let mut node = |side: Side, topic: Topic| -> Result<String> {
        let id = match side {
            Side::Source => format!("source:{topic}"),
            Side::Target => format!("target:{topic}"),
        };
        if seen.insert(id.clone(), ()).is_none() {
            nodes.push(SankeyNode {
                id: id.clone(),
                side,
                topic,
                label: model.topic_label(topic, LABEL_TERMS)?,
            });
        }
        Ok(id)
    };
    let mut links = Vec::new();
    for (t1, t2, value) in top_flows(matrix, k, exclude_intra) {
        let source = node(Side::Source, t1)?;
        let target = node(Side::Target, t2)?;
        links.push(SankeyLink { source, target, value });
    }
    Ok(SankeyDocument {
        year: matrix.year,
        nodes,
        links,
    })
}
