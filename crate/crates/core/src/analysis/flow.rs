//! Intra- and intertopic flow matrices.
//!
//! Authors are grouped by their main topic in a year. The flow from `t1` to
//! `t2` sums the weights of `t1`-labeled edges leaving authors with main topic
//! `t1` and entering authors with main topic `t2`. Self-loops are pairs
//! `(a, a)` and feed the diagonal.

use crate::tfn::{ExpertiseTable, TopicFlowNetwork};
use crate::{Error, Result, Topic, Year};

#[derive(Debug, Clone, PartialEq)]
pub struct FlowMatrix {
    pub year: Year,
    /// `values[t1][t2]`.
    pub values: Vec<Vec<f64>>,
}

impl FlowMatrix {
    pub fn zeros(year: Year, n_topics: usize) -> Self {
        FlowMatrix {
            year,
            values: vec![vec![0.0; n_topics]; n_topics],
        }
    }

    pub fn n_topics(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, from: Topic, to: Topic) -> f64 {
        self.values[from][to]
    }

    pub fn row_sum(&self, from: Topic) -> f64 {
        self.values[from].iter().sum()
    }
}

pub fn flow_matrix(
    tfn: &TopicFlowNetwork,
    expertise: &ExpertiseTable,
    year: Year,
) -> Result<FlowMatrix> {
    if !tfn.years().contains(&year) {
        return Err(Error::param(format!("year {year} is not part of the network")));
    }
    let n = tfn.n_topics();
    let main: Vec<Option<Topic>> = (0..tfn.n_authors())
        .map(|i| expertise.main_topic(crate::AuthorId(i as u32), year))
        .collect();
    let mut m = FlowMatrix::zeros(year, n);
    for t1 in 0..n {
        for e in tfn.edges(year, t1) {
            if main[e.source.index()] != Some(t1) {
                continue;
            }
            if let Some(t2) = main[e.target.index()] {
                m.values[t1][t2] += e.weight;
            }
        }
    }
    Ok(m)
}

/// The `k` largest positive entries, descending, ties in (t1, t2) order.
pub fn top_flows(matrix: &FlowMatrix, k: usize, exclude_intra: bool) -> Vec<(Topic, Topic, f64)> {
    let mut entries: Vec<(Topic, Topic, f64)> = matrix
        .values
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, &v)| (i, j, v)))
        .filter(|&(i, j, v)| v > 0.0 && !(exclude_intra && i == j))
        .collect();
    entries.sort_by(|a, b| b.2.total_cmp(&a.2).then((a.0, a.1).cmp(&(b.0, b.1))));
    entries.truncate(k);
    entries
}
