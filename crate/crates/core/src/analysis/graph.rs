use std::collections::BTreeMap;

use crate::tfn::{AuthorId, TfnView};

/// Undirected weighted simple graph with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    adj: Vec<Vec<(usize, f64)>>,
}

impl WeightedGraph {
    /// Parallel edges and both directions are merged by summing weights.
    /// Self-loops and non-positive weights are dropped.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (u, v, w) in edges {
            assert!(u < n && v < n, "edge ({u}, {v}) outside {n} nodes");
            if u == v || w.is_nan() || w <= 0.0 {
                continue;
            }
            *merged.entry((u.min(v), u.max(v))).or_default() += w;
        }
        let mut adj = vec![Vec::new(); n];
        for ((u, v), w) in merged {
            adj[u].push((v, w));
            adj[v].push((u, w));
        }
        for list in &mut adj {
            list.sort_by_key(|&(v, _)| v);
        }
        WeightedGraph { adj }
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, u: usize) -> &[(usize, f64)] {
        &self.adj[u]
    }

    /// Number of distinct neighbors.
    pub fn degree(&self, u: usize) -> usize {
        self.adj[u].len()
    }

    /// Sum of incident edge weights.
    pub fn strength(&self, u: usize) -> f64 {
        self.adj[u].iter().map(|&(_, w)| w).sum()
    }

    /// Sum of all edge weights, each edge counted once.
    pub fn total_weight(&self) -> f64 {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, l)| l.iter().filter(move |&&(v, _)| v > u))
            .map(|&(_, w)| w)
            .sum()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search_by_key(&v, |&(x, _)| x).is_ok()
    }

    /// Connected components in order of their smallest node.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n()];
        let mut out = Vec::new();
        for s in 0..self.n() {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut i = 0;
            while i < comp.len() {
                let u = comp[i];
                i += 1;
                for &(v, _) in &self.adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

/// The active nodes of a view plus its non-loop edges, re-indexed densely.
#[derive(Debug, Clone)]
pub struct ViewGraph {
    pub nodes: Vec<AuthorId>,
    /// `(source, target, weight)` over local indices, self-loops excluded.
    pub edges: Vec<(usize, usize, f64)>,
}

impl ViewGraph {
    pub fn from_view(view: &TfnView<'_>) -> Self {
        let nodes = view.active_nodes();
        let mut local = vec![usize::MAX; view.n_nodes()];
        for (i, a) in nodes.iter().enumerate() {
            local[a.index()] = i;
        }
        let edges = view
            .edges()
            .filter(|(_, _, e)| !e.is_loop() && e.weight > 0.0)
            .map(|(_, _, e)| (local[e.source.index()], local[e.target.index()], e.weight))
            .collect();
        ViewGraph { nodes, edges }
    }

    pub fn undirected(&self) -> WeightedGraph {
        WeightedGraph::from_edges(self.nodes.len(), self.edges.iter().copied())
    }
}
