//! Average local clustering and average shortest path.

use std::collections::VecDeque;

use super::graph::{ViewGraph, WeightedGraph};
use crate::tfn::TfnView;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallWorld {
    /// Mean hop distance over node pairs of the largest connected component;
    /// absent when that component has fewer than two nodes.
    pub asp: Option<f64>,
    /// Mean local clustering coefficient over all nodes; nodes of degree < 2
    /// contribute 0.
    pub alc: f64,
}

/// Metrics of a view's undirected simple projection over its active nodes.
pub fn small_world_metrics(view: &TfnView<'_>) -> SmallWorld {
    small_world(&ViewGraph::from_view(view).undirected())
}

pub fn small_world(g: &WeightedGraph) -> SmallWorld {
    let n = g.n();
    let alc = if n == 0 {
        0.0
    } else {
        (0..n).map(|u| local_clustering(g, u)).sum::<f64>() / n as f64
    };
    // Largest component; the earliest one wins ties.
    let largest = g
        .components()
        .into_iter()
        .fold(Vec::new(), |best, c| if c.len() > best.len() { c } else { best });
    let asp = (largest.len() >= 2).then(|| average_path(g, &largest));
    SmallWorld { asp, alc }
}

fn local_clustering(g: &WeightedGraph, u: usize) -> f64 {
    let nbrs = g.neighbors(u);
    let k = nbrs.len();
    if k < 2 {
        return 0.0;
    }
    let mut links = 0usize;
    for (i, &(a, _)) in nbrs.iter().enumerate() {
        for &(b, _) in &nbrs[i + 1..] {
            if g.has_edge(a, b) {
                links += 1;
            }
        }
    }
    2.0 * links as f64 / (k * (k - 1)) as f64
}

fn average_path(g: &WeightedGraph, comp: &[usize]) -> f64 {
    let mut dist = vec![usize::MAX; g.n()];
    let mut total = 0usize;
    let mut queue = VecDeque::new();
    for &s in comp {
        for &u in comp {
            dist[u] = usize::MAX;
        }
        dist[s] = 0;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            for &(v, _) in g.neighbors(u) {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        total += comp.iter().map(|&u| dist[u]).sum::<usize>();
    }
    let pairs = comp.len() * (comp.len() - 1);
    total as f64 / pairs as f64
}
