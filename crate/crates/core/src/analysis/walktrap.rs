//! Walktrap community detection.
//!
//! Vertices are compared through their `t`-step random-walk distributions:
//! `r²(C1, C2) = Σ_k (P^t_{C1,k} - P^t_{C2,k})² / d(k)`. Starting from
//! singletons, the pair of adjacent communities whose merge least increases
//! the summed squared distance `Δσ = |C1||C2| / (|C1| + |C2|) · r² / n` is
//! merged, and the dendrogram is cut where modularity peaks. Distributions
//! are computed exactly from the transition matrix, so results are
//! deterministic.
//!
//! Communities never span connected components, so every component is
//! processed on its own and cut at its own modularity peak; since modularity
//! is additive over communities this is the best cut of the combined merge
//! sequence as well.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use super::graph::{ViewGraph, WeightedGraph};
use crate::tfn::{AuthorId, ExpertiseTable, TfnView};
use crate::{Error, Result, Topic, Year};

pub const DEFAULT_WALK_LENGTH: usize = 4;

/// Partition of the active authors of one year.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommunityPartition {
    pub year: Year,
    /// Disjoint blocks, each sorted, ordered by their smallest member.
    pub blocks: Vec<Vec<AuthorId>>,
}

/// Communities of a single-year view.
///
/// Runs on the undirected projection: parallel edges summed, direction and
/// self-loops dropped. Active authors without collaborations come out as
/// singleton blocks.
pub fn walktrap(view: &TfnView<'_>, walk_length: usize) -> Result<CommunityPartition> {
    let year = view
        .year()
        .ok_or_else(|| Error::param("walktrap needs a single-year view"))?;
    if walk_length == 0 {
        return Err(Error::param("walk length must be at least 1"));
    }
    let vg = ViewGraph::from_view(view);
    let blocks = walktrap_graph(&vg.undirected(), walk_length)
        .into_iter()
        .map(|b| b.into_iter().map(|i| vg.nodes[i]).collect())
        .collect();
    Ok(CommunityPartition { year, blocks })
}

/// Walktrap on a plain graph. Blocks are sorted and ordered by smallest
/// member; isolated vertices are singletons.
pub fn walktrap_graph(g: &WeightedGraph, walk_length: usize) -> Vec<Vec<usize>> {
    let total = g.total_weight();
    let mut blocks = Vec::new();
    for comp in g.components() {
        if comp.len() == 1 {
            blocks.push(comp);
        } else {
            blocks.extend(Component::new(g, &comp, walk_length.max(1), total).run());
        }
    }
    for b in &mut blocks {
        b.sort_unstable();
    }
    blocks.sort_by_key(|b| b[0]);
    blocks
}

/// Newman modularity of a partition of a weighted graph; 0 on an edgeless
/// graph. Nodes missing from `blocks` count as singletons.
pub fn modularity(g: &WeightedGraph, blocks: &[Vec<usize>]) -> f64 {
    let m = g.total_weight();
    if m <= 0.0 {
        return 0.0;
    }
    let mut label = vec![usize::MAX; g.n()];
    for (b, members) in blocks.iter().enumerate() {
        for &u in members {
            label[u] = b;
        }
    }
    let mut q = 0.0;
    let mut next = blocks.len();
    for l in label.iter_mut().filter(|l| **l == usize::MAX) {
        *l = next;
        next += 1;
    }
    let mut internal = vec![0.0; next];
    let mut degree = vec![0.0; next];
    for u in 0..g.n() {
        degree[label[u]] += g.strength(u);
        for &(v, w) in g.neighbors(u) {
            if v > u && label[u] == label[v] {
                internal[label[u]] += w;
            }
        }
    }
    for c in 0..next {
        q += internal[c] / m - (degree[c] / (2.0 * m)).powi(2);
    }
    q
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    delta: f64,
    a: usize,
    b: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    // Reversed so the max-heap pops the smallest delta first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .delta
            .total_cmp(&self.delta)
            .then_with(|| other.a.cmp(&self.a))
            .then_with(|| other.b.cmp(&self.b))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Community {
    size: usize,
    /// `P^t` row of the community: size-weighted mean of member rows.
    walk: Vec<f64>,
    /// Adjacent communities and the edge weight towards them.
    neighbors: BTreeMap<usize, f64>,
    internal: f64,
    degree: f64,
    alive: bool,
}

struct Component<'g> {
    nodes: &'g [usize],
    inv_degree: Vec<f64>,
    communities: Vec<Community>,
    total_weight: f64,
}

impl<'g> Component<'g> {
    fn new(g: &WeightedGraph, nodes: &'g [usize], t: usize, total_weight: f64) -> Self {
        let n = nodes.len();
        let mut local = BTreeMap::new();
        for (i, &u) in nodes.iter().enumerate() {
            local.insert(u, i);
        }
        let adj: Vec<Vec<(usize, f64)>> = nodes
            .iter()
            .map(|&u| g.neighbors(u).iter().map(|&(v, w)| (local[&v], w)).collect())
            .collect();
        let degree: Vec<f64> = adj.iter().map(|l| l.iter().map(|&(_, w)| w).sum()).collect();

        let communities = (0..n)
            .map(|i| {
                // e_i P^t, one step at a time.
                let mut row = vec![0.0; n];
                row[i] = 1.0;
                for _ in 0..t {
                    let mut next = vec![0.0; n];
                    for (j, &p) in row.iter().enumerate() {
                        if p != 0.0 {
                            for &(k, w) in &adj[j] {
                                next[k] += p * w / degree[j];
                            }
                        }
                    }
                    row = next;
                }
                Community {
                    size: 1,
                    walk: row,
                    neighbors: adj[i].iter().copied().collect(),
                    internal: 0.0,
                    degree: degree[i],
                    alive: true,
                }
            })
            .collect();
        Component {
            nodes,
            inv_degree: degree.iter().map(|d| 1.0 / d).collect(),
            communities,
            total_weight,
        }
    }

    fn delta_sigma(&self, a: usize, b: usize) -> f64 {
        let (ca, cb) = (&self.communities[a], &self.communities[b]);
        let r2: f64 = ca
            .walk
            .iter()
            .zip(&cb.walk)
            .zip(&self.inv_degree)
            .map(|((x, y), inv)| (x - y) * (x - y) * inv)
            .sum();
        let (sa, sb) = (ca.size as f64, cb.size as f64);
        sa * sb / (sa + sb) * r2 / self.nodes.len() as f64
    }

    fn modularity_term(&self, c: usize) -> f64 {
        let c = &self.communities[c];
        let m = self.total_weight;
        c.internal / m - (c.degree / (2.0 * m)).powi(2)
    }

    fn run(mut self) -> Vec<Vec<usize>> {
        let n = self.nodes.len();
        let mut heap = BinaryHeap::new();
        for a in 0..n {
            for &b in self.communities[a].neighbors.keys() {
                if a < b {
                    heap.push(Candidate { delta: self.delta_sigma(a, b), a, b });
                }
            }
        }

        let mut q: f64 = (0..n).map(|c| self.modularity_term(c)).sum();
        let (mut best_q, mut best_step) = (q, 0);
        let mut merges: Vec<(usize, usize)> = Vec::with_capacity(n.saturating_sub(1));
        while let Some(Candidate { a, b, .. }) = heap.pop() {
            if !(self.communities[a].alive && self.communities[b].alive) {
                continue;
            }
            q -= self.modularity_term(a) + self.modularity_term(b);
            let merged = self.merge(a, b);
            q += self.modularity_term(merged);
            merges.push((a, b));
            if q > best_q {
                best_q = q;
                best_step = merges.len();
            }
            let nbrs: Vec<usize> = self.communities[merged].neighbors.keys().copied().collect();
            for c in nbrs {
                heap.push(Candidate {
                    delta: self.delta_sigma(c, merged),
                    a: c,
                    b: merged,
                });
            }
        }

        // Replay the first `best_step` merges with a union-find over ids.
        let mut parent: Vec<usize> = (0..n + merges.len()).collect();
        for (step, &(a, b)) in merges[..best_step].iter().enumerate() {
            parent[a] = n + step;
            parent[b] = n + step;
        }
        let root = |mut x: usize| {
            while parent[x] != x {
                x = parent[x];
            }
            x
        };
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, &u) in self.nodes.iter().enumerate() {
            groups.entry(root(i)).or_default().push(u);
        }
        groups.into_values().collect()
    }

    fn merge(&mut self, a: usize, b: usize) -> usize {
        let id = self.communities.len();
        let (ca, cb) = (&self.communities[a], &self.communities[b]);
        let (sa, sb) = (ca.size as f64, cb.size as f64);
        let walk = ca
            .walk
            .iter()
            .zip(&cb.walk)
            .map(|(x, y)| (sa * x + sb * y) / (sa + sb))
            .collect();
        let between = ca.neighbors.get(&b).copied().unwrap_or(0.0);
        let mut neighbors = ca.neighbors.clone();
        for (&c, &w) in &cb.neighbors {
            *neighbors.entry(c).or_default() += w;
        }
        neighbors.remove(&a);
        neighbors.remove(&b);
        let merged = Community {
            size: ca.size + cb.size,
            walk,
            internal: ca.internal + cb.internal + between,
            degree: ca.degree + cb.degree,
            neighbors,
            alive: true,
        };
        for (&c, &w) in &merged.neighbors {
            let nb = &mut self.communities[c].neighbors;
            nb.remove(&a);
            nb.remove(&b);
            nb.insert(id, w);
        }
        for x in [a, b] {
            let c = &mut self.communities[x];
            c.alive = false;
            c.walk = Vec::new();
            c.neighbors.clear();
        }
        self.communities.push(merged);
        id
    }
}

/// Main-topic description of one community.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockSummary {
    /// Index into [`CommunityPartition::blocks`].
    pub block_id: usize,
    pub size: usize,
    /// Most frequent member main topics with their counts, descending.
    pub topics: Vec<(Topic, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommunitySummary {
    pub year: Year,
    /// Communities of size at least 2.
    pub blocks: Vec<BlockSummary>,
    /// Per main topic, the summed size of the communities it leads.
    pub topic_sizes: BTreeMap<Topic, usize>,
}

/// Describes every community of size ≥ 2 by its members' main topics.
pub fn community_topic_summary(
    partition: &CommunityPartition,
    expertise: &ExpertiseTable,
    top_m: usize,
) -> CommunitySummary {
    let mut blocks = Vec::new();
    let mut topic_sizes: BTreeMap<Topic, usize> = BTreeMap::new();
    for (block_id, members) in partition.blocks.iter().enumerate() {
        if members.len() < 2 {
            continue;
        }
        let mut topics = expertise.main_topic_counts(members, partition.year);
        if let Some(&(t, _)) = topics.first() {
            *topic_sizes.entry(t).or_default() += members.len();
        }
        topics.truncate(top_m);
        blocks.push(BlockSummary {
            block_id,
            size: members.len(),
            topics,
        });
    }
    CommunitySummary {
        year: partition.year,
        blocks,
        topic_sizes,
    }
}
