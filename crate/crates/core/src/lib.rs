//! Topic Flow Networks.
//!
//! Builds directed, topic-labeled, year-stamped co-authorship multigraphs
//! from publication records and runs the analysis suite over them:
//! main topics, PageRank on flipped edges, Walktrap communities, multigraph
//! k-cores, small-world metrics and intra-/intertopic flow matrices.
//!
//! The pipeline is split bottom-up:
//!
//! * [`corpus`] ingests JSON Lines records and answers windowed author-year
//!   selections.
//! * [`textprep`] tokenizes, filters non-English documents and builds the
//!   tf-idf matrix.
//! * [`topicmodel`] fits NMF and exposes per-paper and per-author topic
//!   vectors.
//! * [`tfn`] constructs the network, expertise table and main topics.
//! * [`analysis`] holds the graph analyses.
//! * [`export`] and [`pipeline`] write artifacts and orchestrate a full run.

pub mod analysis;
pub mod corpus;
mod error;
pub mod export;
pub mod fmt;
pub mod pipeline;
pub mod textprep;
pub mod tfn;
pub mod topicmodel;

pub use analysis::{CommunityPartition, CoreGrid, FlowMatrix};
pub use corpus::{Corpus, LoadReport, PublicationRecord};
pub use error::{Error, Result};
pub use textprep::{DocTermMatrix, SparseVector, StopWords, Vocabulary};
pub use tfn::{AuthorId, Edge, ExpertiseTable, TfnView, TopicFlowNetwork};
pub use topicmodel::{PaperThetas, TopicModel, TopicVector};

/// Publication year.
pub type Year = i32;

/// Topic index in `0..n_topics`.
pub type Topic = usize;
