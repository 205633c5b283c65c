//! Initial, heterogeneous and dual graph construction.

pub mod dual;
pub mod hetero;
pub mod pairs;

pub use dual::{build_dual_from_edges, build_dual_graph, object_neighbors, DualEdge, DualGraph};
pub use hetero::{assign_relation_types, HeterogeneousGraph, InitialGraph, TypeGroups};
pub use pairs::{
    compute_pair_matrices, select_pairs, select_pairs_variant, PairMatrix, PairScores,
    PairSelectionConfig, Strategy,
};
