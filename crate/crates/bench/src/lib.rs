//! Synthetic inputs for the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use topicflow::textprep::DocTermMatrix;
use topicflow::topicmodel::TopicVector;
use topicflow::{Corpus, PaperThetas, PublicationRecord};

/// Corpus of `n_papers` over `n_authors` authors and ten years, with random
/// Dirichlet-ish topic vectors.
pub fn synthetic_corpus(
    n_papers: usize,
    n_authors: usize,
    n_topics: usize,
    seed: u64,
) -> (Corpus, PaperThetas) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut thetas = PaperThetas::new(n_topics, "bench");
    let records: Vec<PublicationRecord> = (0..n_papers)
        .map(|i| {
            let k = rng.gen_range(1..=4.min(n_authors));
            let mut authors = Vec::with_capacity(k);
            while authors.len() < k {
                let a = format!("author{:05}", rng.gen_range(0..n_authors));
                if !authors.contains(&a) {
                    authors.push(a);
                }
            }
            let mut theta: Vec<f64> = (0..n_topics).map(|_| -rng.gen::<f64>().ln()).collect();
            let s: f64 = theta.iter().sum();
            theta.iter_mut().for_each(|x| *x /= s);
            let id = format!("paper{i:07}");
            thetas.insert(id.clone(), TopicVector(theta));
            PublicationRecord {
                paper_id: id,
                title: String::new(),
                abstract_text: None,
                authors,
                year: 2010 + rng.gen_range(0..10),
                fields_of_study: Vec::new(),
            }
        })
        .collect();
    let corpus = Corpus::from_records(records, (2000, 2030)).expect("synthetic corpus is valid");
    (corpus, thetas)
}

/// Sparse non-negative matrix with `density` fraction of non-zeros.
pub fn synthetic_matrix(rows: usize, cols: usize, density: f64, seed: u64) -> DocTermMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dense: Vec<Vec<f64>> = (0..rows)
        .map(|_| {
            (0..cols)
                .map(|_| if rng.gen_bool(density) { rng.gen::<f64>() } else { 0.0 })
                .collect()
        })
        .collect();
    DocTermMatrix::from_dense(&dense).expect("non-empty matrix")
}

/// Random weighted edge list.
pub fn synthetic_edges(n: usize, m: usize, seed: u64) -> Vec<(usize, usize, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..m)
        .map(|_| (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0.01..1.0)))
        .collect()
}
