//! Bottleneck assignment by iterative pruning and augmenting-path search,
//! with a synchronous message-passing simulator for the distributed setting,
//! sub-problem merging, a greedy baseline and experiment drivers.

pub mod error;
pub mod experiments;
pub mod fixtures;
pub mod graph;
pub mod greedy;
pub mod instance;
pub mod merge;
pub mod pruner;
pub mod search;
pub mod sim;

pub use error::{BapError, Result};
pub use graph::{
    augment, brute_force_bottleneck, is_alternating_path, is_augmenting_path, max_edge_in_matching,
    mcm_oracle, neighbors, pruned_edge_set, AlternatingTree, Edge, EdgeSet, Matching, Path,
    Positions, PrunedEdgeSet, Vertex, WeightedBipartiteGraph,
};
pub use pruner::{prune_bap, warm_start_from, PruneTrace, Strategy};
pub use search::{aug_bfs, aug_dfs, verify_alternating_search, SearchInput, SearchOutcome};
