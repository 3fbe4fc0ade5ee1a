//! Brute-force oracles and generators shared by the integration tests.
//!
//! Nothing here calls into the algorithms under test; each oracle is the
//! most literal reading of its definition.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use topicflow::topicmodel::TopicVector;
use topicflow::{Corpus, PaperThetas, PublicationRecord};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------- corpora

/// A paper with a fixed topic vector.
#[derive(Debug, Clone)]
pub struct SynPaper {
    pub id: String,
    pub authors: Vec<String>,
    pub year: i32,
    pub theta: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SynCorpus {
    pub papers: Vec<SynPaper>,
    pub n_topics: usize,
    pub window: u32,
    pub top_l: usize,
    pub years: Vec<i32>,
}

impl SynCorpus {
    pub fn corpus(&self) -> Corpus {
        let records = self.papers.iter().map(|p| PublicationRecord {
            paper_id: p.id.clone(),
            title: format!("paper {}", p.id),
            abstract_text: None,
            authors: p.authors.clone(),
            year: p.year,
            fields_of_study: Vec::new(),
        });
        Corpus::from_records(records, (1900, 2100)).expect("valid synthetic corpus")
    }

    pub fn thetas(&self) -> PaperThetas {
        let mut th = PaperThetas::new(self.n_topics, "synthetic");
        for p in &self.papers {
            th.insert(p.id.clone(), TopicVector(p.theta.clone()));
        }
        th
    }
}

/// Random corpus: up to 10 papers, 6 authors, 4 topics. Half the instances
/// draw θ from quarter steps so exact expertise ties occur.
pub fn random_corpus(seed: u64) -> SynCorpus {
    let mut r = rng(seed);
    let n_topics = r.gen_range(1..=4);
    let n_authors = r.gen_range(1..=6);
    let n_papers = r.gen_range(1..=10);
    let dyadic = seed.is_multiple_of(2);
    let names: Vec<String> = (0..n_authors).map(|i| format!("Author {}", (b'A' + i as u8) as char)).collect();
    let papers = (0..n_papers)
        .map(|i| {
            let k = r.gen_range(1..=n_authors);
            let mut authors: Vec<String> = Vec::new();
            while authors.len() < k {
                let a = names[r.gen_range(0..n_authors)].clone();
                if !authors.contains(&a) {
                    authors.push(a);
                }
            }
            let theta = (0..n_topics)
                .map(|_| {
                    if r.gen_bool(0.2) {
                        0.0
                    } else if dyadic {
                        r.gen_range(1..=4) as f64 * 0.25
                    } else {
                        r.gen::<f64>()
                    }
                })
                .collect();
            SynPaper {
                id: format!("p{i:02}"),
                authors,
                year: 2000 + r.gen_range(0..4),
                theta,
            }
        })
        .collect();
    SynCorpus {
        papers,
        n_topics,
        window: r.gen_range(0..=2),
        top_l: r.gen_range(1..=4),
        years: (2000..=2004).collect(),
    }
}

// ---------------------------------------------------------------- TFN

/// Oracle edges keyed by (year, topic, source name, target name).
pub type EdgeMap = BTreeMap<(i32, usize, String, String), f64>;

pub struct TfnOracle {
    pub edges: EdgeMap,
    /// (author, year) → expertise vector, for authors with papers in the window.
    pub expertise: BTreeMap<(String, i32), Vec<f64>>,
}

fn in_window(p: &SynPaper, year: i32, window: u32) -> bool {
    p.year <= year && p.year >= year - window as i32
}

/// Triple loop over (year, author pair, topic), straight from the definition.
pub fn tfn_oracle(c: &SynCorpus) -> TfnOracle {
    let authors: BTreeSet<String> = c.papers.iter().flat_map(|p| p.authors.clone()).collect();
    let authors: Vec<String> = authors.into_iter().collect();
    let mut edges = EdgeMap::new();
    let mut expertise = BTreeMap::new();
    for &y in &c.years {
        let sigma = |a: &str| -> Vec<&SynPaper> {
            c.papers
                .iter()
                .filter(|p| in_window(p, y, c.window) && p.authors.iter().any(|x| x == a))
                .collect()
        };
        let sum = |ps: &[&SynPaper], t: usize| -> f64 { ps.iter().map(|p| p.theta[t]).sum() };
        for a in &authors {
            let sa = sigma(a);
            if sa.is_empty() {
                continue;
            }
            let e: Vec<f64> = (0..c.n_topics).map(|t| sum(&sa, t)).collect();
            for (t, &w) in e.iter().enumerate() {
                if w > 0.0 {
                    edges.insert((y, t, a.clone(), a.clone()), w);
                }
            }
            expertise.insert((a.clone(), y), e);
        }
        for (i, a) in authors.iter().enumerate() {
            for b in &authors[i + 1..] {
                let sa = sigma(a);
                let shared: Vec<&SynPaper> = sa
                    .into_iter()
                    .filter(|p| p.authors.iter().any(|x| x == b))
                    .collect();
                if shared.is_empty() {
                    continue;
                }
                let w: Vec<f64> = (0..c.n_topics).map(|t| sum(&shared, t)).collect();
                let mut ranked: Vec<usize> = (0..c.n_topics).collect();
                ranked.sort_by(|&s, &t| w[t].partial_cmp(&w[s]).unwrap().then(s.cmp(&t)));
                let kept: BTreeSet<usize> = ranked.into_iter().take(c.top_l).collect();
                let ea = &expertise[&(a.clone(), y)];
                let eb = &expertise[&(b.clone(), y)];
                for t in 0..c.n_topics {
                    if !kept.contains(&t) || w[t] == 0.0 {
                        continue;
                    }
                    if ea[t] >= eb[t] {
                        edges.insert((y, t, a.clone(), b.clone()), w[t]);
                    }
                    if eb[t] >= ea[t] {
                        edges.insert((y, t, b.clone(), a.clone()), w[t]);
                    }
                }
            }
        }
    }
    TfnOracle { edges, expertise }
}

/// Main topic: first index of the maximum, only if it is positive.
pub fn oracle_main_topic(e: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (t, &w) in e.iter().enumerate() {
        if w > 0.0 && best.is_none_or(|b| w > e[b]) {
            best = Some(t);
        }
    }
    best
}

/// φ_y by direct pair summation over the oracle edges.
pub fn flow_oracle(o: &TfnOracle, year: i32, n_topics: usize) -> Vec<Vec<f64>> {
    let tau = |a: &str| {
        o.expertise
            .get(&(a.to_string(), year))
            .and_then(|e| oracle_main_topic(e))
    };
    let mut phi = vec![vec![0.0; n_topics]; n_topics];
    for ((y, t, s, d), w) in &o.edges {
        if *y != year {
            continue;
        }
        if let (Some(ts), Some(td)) = (tau(s), tau(d)) {
            if ts == *t {
                phi[*t][td] += w;
            }
        }
    }
    phi
}

// ---------------------------------------------------------------- PageRank

/// Dense power iteration with an explicit column-stochastic matrix.
/// `edges` are flow edges; they are flipped here.
pub fn pagerank_oracle(n: usize, edges: &[(usize, usize, f64)], d: f64) -> Vec<f64> {
    let mut w = vec![vec![0.0; n]; n];
    for &(s, t, x) in edges {
        if s != t {
            w[t][s] += x;
        }
    }
    // m[j][i] = probability of stepping i → j.
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        let out: f64 = w[i].iter().sum();
        for j in 0..n {
            m[j][i] = if out > 0.0 { w[i][j] / out } else { 1.0 / n as f64 };
        }
    }
    let mut x = vec![1.0 / n as f64; n];
    for _ in 0..100_000 {
        let next: Vec<f64> = (0..n)
            .map(|j| (1.0 - d) / n as f64 + d * (0..n).map(|i| m[j][i] * x[i]).sum::<f64>())
            .collect();
        let diff: f64 = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
        x = next;
        if diff < 1e-15 {
            break;
        }
    }
    x
}

// ---------------------------------------------------------------- k-cores

/// Node is in the k-core iff it survives repeated deletion of nodes with
/// fewer than k incident edges (multiplicity counted, loops ignored).
pub fn core_oracle(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut core = vec![0; n];
    for k in 1.. {
        let mut alive = vec![true; n];
        loop {
            let mut deg = vec![0usize; n];
            for &(u, v) in edges {
                if u != v && alive[u] && alive[v] {
                    deg[u] += 1;
                    deg[v] += 1;
                }
            }
            let doomed: Vec<usize> = (0..n).filter(|&u| alive[u] && deg[u] < k).collect();
            if doomed.is_empty() {
                break;
            }
            for u in doomed {
                alive[u] = false;
            }
        }
        if !alive.iter().any(|&a| a) {
            break;
        }
        for u in 0..n {
            if alive[u] {
                core[u] = k;
            }
        }
    }
    core
}

pub fn random_multigraph(seed: u64) -> (usize, Vec<(usize, usize)>) {
    let mut r = rng(seed);
    let n = r.gen_range(1..=50);
    let m = r.gen_range(0..=4 * n);
    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let u = r.gen_range(0..n);
        let v = r.gen_range(0..n);
        let copies = if r.gen_bool(0.2) { 2 } else { 1 };
        for _ in 0..copies {
            edges.push((u, v));
        }
    }
    (n, edges)
}

// ---------------------------------------------------------------- modularity

/// Symmetric weight matrix of an undirected simple graph, loops dropped.
pub fn adjacency(n: usize, edges: &[(usize, usize, f64)]) -> Vec<Vec<f64>> {
    let mut a = vec![vec![0.0; n]; n];
    for &(u, v, w) in edges {
        if u != v {
            a[u][v] += w;
            a[v][u] += w;
        }
    }
    a
}

/// Newman modularity from the definition: Σ_ij (A_ij − k_i k_j / 2m) δ(c_i, c_j) / 2m.
pub fn modularity_oracle(a: &[Vec<f64>], labels: &[usize]) -> f64 {
    let n = a.len();
    let k: Vec<f64> = a.iter().map(|r| r.iter().sum()).collect();
    let two_m: f64 = k.iter().sum();
    if two_m == 0.0 {
        return 0.0;
    }
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if labels[i] == labels[j] {
                q += a[i][j] - k[i] * k[j] / two_m;
            }
        }
    }
    q / two_m
}

pub fn labels_of(n: usize, blocks: &[Vec<usize>]) -> Vec<usize> {
    let mut labels = vec![usize::MAX; n];
    for (b, members) in blocks.iter().enumerate() {
        for &u in members {
            labels[u] = b;
        }
    }
    labels
}

/// Maximum modularity over every partition of the vertex set.
///
/// Branch and bound over restricted-growth labelings. The bound adds, for
/// each unassigned vertex, its best gain against the current blocks plus all
/// positive modularity terms among unassigned pairs; both are upper bounds on
/// what the remaining assignments can contribute. `incumbent` only seeds the
/// pruning threshold.
pub fn max_modularity(a: &[Vec<f64>], incumbent: f64) -> f64 {
    let n = a.len();
    let k: Vec<f64> = a.iter().map(|r| r.iter().sum()).collect();
    let two_m: f64 = k.iter().sum();
    if two_m == 0.0 {
        return 0.0;
    }
    let b: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| a[i][j] - k[i] * k[j] / two_m).collect())
        .collect();

    // Strongly tied vertices first: a BFS order from the highest-degree vertex.
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    let mut starts: Vec<usize> = (0..n).collect();
    starts.sort_by(|&x, &y| k[y].partial_cmp(&k[x]).unwrap());
    for s in starts {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            order.push(u);
            let mut nb: Vec<usize> = (0..n).filter(|&v| a[u][v] > 0.0 && !seen[v]).collect();
            nb.sort_by(|&x, &y| a[u][y].partial_cmp(&a[u][x]).unwrap());
            for v in nb {
                seen[v] = true;
                q.push_back(v);
            }
        }
    }
    let b: Vec<Vec<f64>> = order.iter().map(|&i| order.iter().map(|&j| b[i][j]).collect()).collect();

    let diag: f64 = (0..n).map(|i| b[i][i]).sum();
    // pos_tail[d] = Σ over pairs i<j with i,j ≥ d of 2·max(0, B_ij).
    let mut pos_tail = vec![0.0; n + 1];
    for d in (0..n).rev() {
        let row: f64 = (d + 1..n).map(|j| 2.0 * b[d][j].max(0.0)).sum();
        pos_tail[d] = pos_tail[d + 1] + row;
    }

    struct Search<'a> {
        b: &'a [Vec<f64>],
        pos_tail: &'a [f64],
        labels: Vec<usize>,
        // block_gain[c][v] = Σ_{u assigned to c} 2·B_uv
        block_gain: Vec<Vec<f64>>,
        best: f64,
    }

    impl Search<'_> {
        fn go(&mut self, depth: usize, score: f64) {
            let n = self.b.len();
            if depth == n {
                self.best = self.best.max(score);
                return;
            }
            let mut bound = score + self.pos_tail[depth];
            for v in depth..n {
                let g = self.block_gain.iter().map(|g| g[v]).fold(0.0, f64::max);
                bound += g;
            }
            if bound <= self.best + 1e-12 {
                return;
            }
            let n_blocks = self.block_gain.len();
            let mut choices: Vec<(f64, usize)> = (0..=n_blocks)
                .map(|c| (if c < n_blocks { self.block_gain[c][depth] } else { 0.0 }, c))
                .collect();
            choices.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
            for (gain, c) in choices {
                if c == n_blocks {
                    self.block_gain.push(vec![0.0; n]);
                }
                for v in depth + 1..n {
                    self.block_gain[c][v] += 2.0 * self.b[depth][v];
                }
                self.labels[depth] = c;
                self.go(depth + 1, score + gain);
                for v in depth + 1..n {
                    self.block_gain[c][v] -= 2.0 * self.b[depth][v];
                }
                if c == n_blocks {
                    self.block_gain.pop();
                }
            }
        }
    }

    let mut s = Search {
        b: &b,
        pos_tail: &pos_tail,
        labels: vec![0; n],
        block_gain: Vec::new(),
        best: incumbent * two_m - diag,
    };
    s.go(0, 0.0);
    (s.best + diag) / two_m
}

/// Two planted blocks of `half` vertices each.
pub fn planted_sbm(seed: u64, half: usize, p_in: f64, p_out: f64) -> Vec<(usize, usize, f64)> {
    let mut r = rng(seed);
    let mut edges = Vec::new();
    for u in 0..2 * half {
        for v in u + 1..2 * half {
            let p = if (u < half) == (v < half) { p_in } else { p_out };
            if r.gen_bool(p) {
                edges.push((u, v, 1.0));
            }
        }
    }
    edges
}

// ---------------------------------------------------------------- small world

pub fn neighbor_sets(n: usize, edges: &[(usize, usize, f64)]) -> Vec<BTreeSet<usize>> {
    let mut nb = vec![BTreeSet::new(); n];
    for &(u, v, _) in edges {
        if u != v {
            nb[u].insert(v);
            nb[v].insert(u);
        }
    }
    nb
}

/// Mean local clustering by triangle counting over every node.
pub fn alc_oracle(n: usize, edges: &[(usize, usize, f64)]) -> f64 {
    let nb = neighbor_sets(n, edges);
    let mut total = 0.0;
    for u in 0..n {
        let d = nb[u].len();
        if d < 2 {
            continue;
        }
        let mut tri = 0usize;
        for &v in &nb[u] {
            for &w in &nb[u] {
                if v < w && nb[v].contains(&w) {
                    tri += 1;
                }
            }
        }
        total += tri as f64 / (d * (d - 1) / 2) as f64;
    }
    if n == 0 {
        0.0
    } else {
        total / n as f64
    }
}

/// Mean BFS hop distance over unordered pairs of the largest component
/// (first found wins ties).
pub fn asp_oracle(n: usize, edges: &[(usize, usize, f64)]) -> Option<f64> {
    let nb = neighbor_sets(n, edges);
    let bfs = |s: usize| -> Vec<Option<usize>> {
        let mut dist = vec![None; n];
        dist[s] = Some(0);
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &v in &nb[u] {
                if dist[v].is_none() {
                    dist[v] = Some(dist[u].unwrap() + 1);
                    q.push_back(v);
                }
            }
        }
        dist
    };
    let mut seen = vec![false; n];
    let mut largest: Vec<usize> = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        let comp: Vec<usize> = bfs(s)
            .iter()
            .enumerate()
            .filter_map(|(v, d)| d.map(|_| v))
            .collect();
        for &v in &comp {
            seen[v] = true;
        }
        if comp.len() > largest.len() {
            largest = comp;
        }
    }
    if largest.len() < 2 {
        return None;
    }
    let (mut sum, mut pairs) = (0usize, 0usize);
    for (i, &u) in largest.iter().enumerate() {
        let dist = bfs(u);
        for &v in &largest[i + 1..] {
            sum += dist[v].unwrap();
            pairs += 1;
        }
    }
    Some(sum as f64 / pairs as f64)
}
