//! Graph analyses over a Topic Flow Network.

mod flow;
mod graph;
mod kcore;
mod pagerank;
mod smallworld;
mod walktrap;

pub use flow::{flow_matrix, top_flows, FlowMatrix};
pub use graph::{ViewGraph, WeightedGraph};
pub use kcore::{core_numbers, core_numbers_multigraph, coreness_grid, CoreGrid};
pub use pagerank::{pagerank, pagerank_edges, PageRankOptions};
pub use smallworld::{small_world, small_world_metrics, SmallWorld};
pub use walktrap::{
    community_topic_summary, modularity, walktrap, walktrap_graph, BlockSummary,
    CommunityPartition, CommunitySummary, DEFAULT_WALK_LENGTH,
};
