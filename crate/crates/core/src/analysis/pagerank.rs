//! Weighted PageRank with flipped edges.
//!
//! Flow edges point from higher to lower expertise; relevance should travel
//! the other way, so every edge is reversed before ranking.

use std::collections::BTreeMap;

use super::graph::ViewGraph;
use crate::tfn::{AuthorId, TfnView};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PageRankOptions {
    pub damping: f64,
    pub max_iter: usize,
    /// Converged once the L1 change between iterations drops below this.
    pub tol: f64,
}

impl Default for PageRankOptions {
    fn default() -> Self {
        PageRankOptions {
            damping: 0.85,
            max_iter: 100,
            tol: 1e-10,
        }
    }
}

/// PageRank scores of the active nodes of a view, in author-id order.
///
/// Parallel topic edges between the same ordered pair are summed and
/// self-loops ignored.
pub fn pagerank(view: &TfnView<'_>, opts: PageRankOptions) -> Result<Vec<(AuthorId, f64)>> {
    let g = ViewGraph::from_view(view);
    if g.nodes.is_empty() {
        return Err(Error::param("pagerank on a view without nodes"));
    }
    let flipped = g.edges.iter().map(|&(s, t, w)| (t, s, w));
    let scores = pagerank_edges(g.nodes.len(), flipped, opts)?;
    Ok(g.nodes.into_iter().zip(scores).collect())
}

/// Power iteration on a directed weighted graph given as `(from, to, weight)`.
/// Mass on nodes without out-edges is spread uniformly.
pub fn pagerank_edges(
    n: usize,
    edges: impl IntoIterator<Item = (usize, usize, f64)>,
    opts: PageRankOptions,
) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::param("pagerank on an empty graph"));
    }
    if !(opts.damping > 0.0 && opts.damping < 1.0) {
        return Err(Error::param(format!("damping {} outside (0, 1)", opts.damping)));
    }
    let mut collapsed: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (u, v, w) in edges {
        if u != v && w > 0.0 {
            *collapsed.entry((u, v)).or_default() += w;
        }
    }
    let mut out_weight = vec![0.0; n];
    for (&(u, _), &w) in &collapsed {
        out_weight[u] += w;
    }
    let links: Vec<(usize, usize, f64)> = collapsed
        .into_iter()
        .map(|((u, v), w)| (u, v, w / out_weight[u]))
        .collect();

    let d = opts.damping;
    let uniform = 1.0 / n as f64;
    let mut rank = vec![uniform; n];
    let mut next = vec![0.0; n];
    for _ in 0..opts.max_iter {
        let dangling: f64 = (0..n).filter(|&u| out_weight[u] == 0.0).map(|u| rank[u]).sum();
        let base = (1.0 - d) * uniform + d * dangling * uniform;
        next.fill(base);
        for &(u, v, p) in &links {
            next[v] += d * rank[u] * p;
        }
        let change: f64 = rank.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut rank, &mut next);
        if change < opts.tol {
            break;
        }
    }
    let total: f64 = rank.iter().sum();
    rank.iter_mut().for_each(|r| *r /= total);
    Ok(rank)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_pair() {
        let r = pagerank_edges(2, [(0, 1, 1.0), (1, 0, 1.0)], PageRankOptions::default()).unwrap();
        assert_eq!(r, [0.5, 0.5]);
    }

    #[test]
    fn scale_invariant() {
        let edges = [(0, 1, 1.0), (1, 2, 3.0), (2, 0, 0.5), (0, 2, 2.0)];
        let a = pagerank_edges(3, edges, PageRankOptions::default()).unwrap();
        let b = pagerank_edges(3, edges.map(|(u, v, w)| (u, v, w * 7.5)), PageRankOptions::default())
            .unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let o = PageRankOptions::default();
        assert!(pagerank_edges(0, [], o).is_err());
        assert!(pagerank_edges(2, [], PageRankOptions { damping: 1.0, ..o }).is_err());
    }
}
