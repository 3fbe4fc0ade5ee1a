//! Core numbers on multigraphs.
//!
//! The degree of a node counts every incident non-loop edge across all edge
//! relations, so parallel edges add up.

use std::collections::BTreeSet;

use rayon::prelude::*;

use super::graph::ViewGraph;
use crate::tfn::{AuthorId, TfnView, TopicFlowNetwork};
use crate::{Topic, Year};

/// Core numbers by min-degree peeling. Self-loops are ignored; `n` nodes,
/// edges as index pairs with multiplicity.
pub fn core_numbers_multigraph(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(u, v) in edges {
        if u != v {
            adj[u].push(v);
            adj[v].push(u);
        }
    }
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut queue: BTreeSet<(usize, usize)> = (0..n).map(|u| (degree[u], u)).collect();
    let mut removed = vec![false; n];
    let mut core = vec![0; n];
    let mut k = 0;
    while let Some((d, u)) = queue.pop_first() {
        k = k.max(d);
        core[u] = k;
        removed[u] = true;
        for &v in &adj[u] {
            if !removed[v] {
                queue.remove(&(degree[v], v));
                degree[v] -= 1;
                queue.insert((degree[v], v));
            }
        }
    }
    core
}

/// Core numbers of the active nodes of a view, in author-id order.
pub fn core_numbers(view: &TfnView<'_>) -> Vec<(AuthorId, usize)> {
    let g = ViewGraph::from_view(view);
    let pairs: Vec<(usize, usize)> = g.edges.iter().map(|&(u, v, _)| (u, v)).collect();
    let cores = core_numbers_multigraph(g.nodes.len(), &pairs);
    g.nodes.into_iter().zip(cores).collect()
}

/// Coreness (largest core number) of every (topic, year) subgraph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoreGrid {
    pub years: Vec<Year>,
    /// `values[topic][year index]`.
    pub values: Vec<Vec<usize>>,
}

impl CoreGrid {
    pub fn get(&self, topic: Topic, year: Year) -> Option<usize> {
        let yi = self.years.iter().position(|&y| y == year)?;
        self.values.get(topic).map(|row| row[yi])
    }
}

pub fn coreness_grid(tfn: &TopicFlowNetwork) -> CoreGrid {
    let years = tfn.years().to_vec();
    let cells: Vec<(Topic, Year)> = (0..tfn.n_topics())
        .flat_map(|t| years.iter().map(move |&y| (t, y)))
        .collect();
    let flat: Vec<usize> = cells
        .par_iter()
        .map(|&(t, y)| {
            let view = tfn.restrict(Some(y), Some(t)).expect("cell is in range");
            core_numbers(&view).into_iter().map(|(_, c)| c).max().unwrap_or(0)
        })
        .collect();
    let values = if years.is_empty() {
        vec![Vec::new(); tfn.n_topics()]
    } else {
        flat.chunks(years.len()).map(<[usize]>::to_vec).collect()
    };
    CoreGrid { years, values }
}
