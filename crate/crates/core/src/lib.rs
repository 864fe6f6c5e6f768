//! Exact biharmonic-distance queries through a hierarchy of vertex cuts.
//!
//! A [`HierarchyTree`] arranges the vertices so that every edge joins an
//! ancestor to a descendant. [`build_index`] stores one label per vertex over
//! its subtree, and [`query_bd`] combines the labels on the two root paths to
//! answer `b(s,t) = (e_s − e_t)ᵀ L²† (e_s − e_t)` exactly.
//!
//! ```
//! use bdindex::{build_hierarchy, build_index, query_bd, Graph, Strategy};
//!
//! let g = Graph::from_unweighted(3, &[(0, 1), (1, 2)]).unwrap();
//! let tree = build_hierarchy(&g, Strategy::Separator).unwrap();
//! let idx = build_index(&g, tree).unwrap();
//! assert!((query_bd(&idx, 0, 2).unwrap().bd - 2.0).abs() < 1e-12);
//! ```

pub mod graph;
pub mod hierarchy;
pub mod index;
pub mod oracle;
pub mod query;
pub mod workload;

pub use graph::{load_edge_list, EdgeListFormat, Graph, GraphError};
pub use hierarchy::{
    build_hierarchy, build_min_degree_hierarchy, build_separator_hierarchy, validate_hierarchy,
    BfsBisection, HierarchyError, HierarchyStats, HierarchyTree, SeparatorProvider, Strategy,
    Subgraph, Violation,
};
pub use index::format::{deserialize, serialize, FormatError};
pub use index::{build_index, direct_label_oracle, BDIndex, IndexError, LabelView, NodeLabel};
pub use oracle::{
    cut_decomposition_check, grounded_bd, pseudoinverse_bd, GroundedOracle, truncated_walk_bd, walk_bd,
    CutDecompositionReport, OracleError, PseudoinverseOracle, WalkEstimate,
};
pub use query::{
    accumulate_tau, batch_query, edge_centrality, evaluate, query_bd, EdgeScore, QueryEngine,
    QueryError, QueryResult, TauVector,
};
