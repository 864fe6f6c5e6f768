//! Elimination hierarchies over the vertex set.
//!
//! A [`HierarchyTree`] is a rooted spanning tree on the graph's vertices in
//! which every graph edge joins a vertex to one of its tree ancestors. Label
//! vectors in the index are addressed through the tree's DFS preorder, so the
//! tree also carries the preorder layout: `Desc(v)` occupies the contiguous
//! position range `dfs_start(v) .. dfs_start(v) + dfs_size(v)`.

mod min_degree;
mod separator;

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use thiserror::Error;

use crate::graph::{Graph, GraphError};

pub use min_degree::{build_min_degree_hierarchy, min_degree_order};
pub use separator::{
    bfs_bisection_separator, build_separator_hierarchy, BfsBisection, SeparatorProvider, Subgraph,
};

#[derive(Debug, Error)]
pub enum HierarchyError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("parent array is empty")]
    Empty,
    #[error("expected exactly one root, found {0}")]
    RootCount(usize),
    #[error("vertex {vertex} has parent {parent} outside 0..{n}")]
    ParentOutOfRange {
        vertex: usize,
        parent: usize,
        n: usize,
    },
    #[error("parent links do not form a tree: vertex {0} is unreachable from the root")]
    Cycle(usize),
    #[error("hierarchy recursion exceeded {0} levels")]
    DepthExceeded(usize),
    #[error("tree has {tree} vertices but the graph has {graph}")]
    SizeMismatch { tree: usize, graph: usize },
    #[error("hierarchy is invalid: {0}")]
    Invalid(Violation),
}

/// Which heuristic builds the hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    /// Recursive vertex separators.
    #[default]
    Separator,
    /// Minimum-degree elimination with fill-in.
    MinDegree,
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "separator" | "min-cut" => Ok(Self::Separator),
            "min-degree" | "mindegree" => Ok(Self::MinDegree),
            other => Err(format!(
                "unknown strategy '{other}' (expected separator or min-degree)"
            )),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Separator => "separator",
            Self::MinDegree => "min-degree",
        })
    }
}

/// Builds a hierarchy with the given strategy and the default separator.
pub fn build_hierarchy(g: &Graph, strategy: Strategy) -> Result<HierarchyTree, HierarchyError> {
    match strategy {
        Strategy::Separator => build_separator_hierarchy(g, &BfsBisection),
        Strategy::MinDegree => build_min_degree_hierarchy(g),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HierarchyTree {
    parent: Vec<usize>,
    root: usize,
    children: Vec<Vec<usize>>,
    order: Vec<usize>,
    dfs_start: Vec<usize>,
    dfs_size: Vec<usize>,
    depth: Vec<usize>,
}

impl HierarchyTree {
    /// Builds the tree and its DFS layout from a parent array in which the
    /// root is its own parent.
    ///
    /// Children are visited in ascending order of their smallest descendant id.
    pub fn from_parents(parent: Vec<usize>) -> Result<Self, HierarchyError> {
        let n = parent.len();
        if n == 0 {
            return Err(HierarchyError::Empty);
        }
        let mut roots = Vec::new();
        for (v, &p) in parent.iter().enumerate() {
            if p >= n {
                return Err(HierarchyError::ParentOutOfRange {
                    vertex: v,
                    parent: p,
                    n,
                });
            }
            if p == v {
                roots.push(v);
            }
        }
        if roots.len() != 1 {
            return Err(HierarchyError::RootCount(roots.len()));
        }
        let root = roots[0];

        let mut children = vec![Vec::new(); n];
        for (v, &p) in parent.iter().enumerate() {
            if v != root {
                children[p].push(v);
            }
        }

        // Any traversal first, to detect cycles and compute subtree minima.
        let mut visit = Vec::with_capacity(n);
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            visit.push(v);
            stack.extend(children[v].iter().copied());
        }
        if visit.len() != n {
            let mut seen = vec![false; n];
            for &v in &visit {
                seen[v] = true;
            }
            let lost = seen.iter().position(|s| !s).unwrap();
            return Err(HierarchyError::Cycle(lost));
        }
        let mut min_desc: Vec<usize> = (0..n).collect();
        for &v in visit.iter().rev() {
            if v != root {
                let p = parent[v];
                min_desc[p] = min_desc[p].min(min_desc[v]);
            }
        }
        for list in &mut children {
            list.sort_unstable_by_key(|&c| min_desc[c]);
        }

        let mut order = Vec::with_capacity(n);
        let mut depth = vec![0usize; n];
        depth[root] = 1;
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            order.push(v);
            for &c in children[v].iter().rev() {
                depth[c] = depth[v] + 1;
                stack.push(c);
            }
        }
        let mut dfs_start = vec![0usize; n];
        for (pos, &v) in order.iter().enumerate() {
            dfs_start[v] = pos;
        }
        let mut dfs_size = vec![1usize; n];
        for &v in order.iter().rev() {
            if v != root {
                dfs_size[parent[v]] += dfs_size[v];
            }
        }
        Ok(Self {
            parent,
            root,
            children,
            order,
            dfs_start,
            dfs_size,
            depth,
        })
    }

    pub fn n(&self) -> usize {
        self.parent.len()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    /// Parent of `v`; the root is its own parent.
    pub fn parent(&self, v: usize) -> usize {
        self.parent[v]
    }

    pub fn parents(&self) -> &[usize] {
        &self.parent
    }

    /// Children of `v` in DFS visiting order.
    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    /// Vertices in DFS preorder.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn dfs_pos(&self, v: usize) -> usize {
        self.dfs_start[v]
    }

    pub fn dfs_start(&self, v: usize) -> usize {
        self.dfs_start[v]
    }

    /// `|Desc(v)|`, counting `v` itself.
    pub fn dfs_size(&self, v: usize) -> usize {
        self.dfs_size[v]
    }

    pub fn dfs_starts(&self) -> &[usize] {
        &self.dfs_start
    }

    pub fn dfs_sizes(&self) -> &[usize] {
        &self.dfs_size
    }

    /// Number of vertices on the root path of `v`, inclusive of both ends.
    pub fn depth(&self, v: usize) -> usize {
        self.depth[v]
    }

    /// True when `d` lies in the subtree of `a` (including `a == d`).
    pub fn is_ancestor(&self, a: usize, d: usize) -> bool {
        let (s, p) = (self.dfs_start[a], self.dfs_start[d]);
        p >= s && p < s + self.dfs_size[a]
    }

    /// `Anc(v)` from `v` up to the root.
    pub fn ancestors(&self, v: usize) -> Ancestors<'_> {
        Ancestors {
            tree: self,
            next: Some(v),
        }
    }

    /// `Desc(v)` in DFS preorder.
    pub fn descendants(&self, v: usize) -> &[usize] {
        let s = self.dfs_start[v];
        &self.order[s..s + self.dfs_size[v]]
    }

    pub fn height(&self) -> usize {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    pub fn stats(&self) -> HierarchyStats {
        hierarchy_stats(self)
    }

    /// Writes `<vertex> <parent> <dfs_start> <dfs_size>` lines in DFS order,
    /// which puts the root first. Vertices are written with `labels`.
    pub fn write_dump<W: Write>(&self, labels: &[String], mut out: W) -> std::io::Result<()> {
        for &v in &self.order {
            writeln!(
                out,
                "{} {} {} {}",
                labels[v], labels[self.parent[v]], self.dfs_start[v], self.dfs_size[v]
            )?;
        }
        Ok(())
    }
}

pub struct Ancestors<'a> {
    tree: &'a HierarchyTree,
    next: Option<usize>,
}

impl Iterator for Ancestors<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        let v = self.next?;
        let p = self.tree.parent[v];
        self.next = (p != v).then_some(p);
        Some(v)
    }
}

/// Height and label-size summary of a hierarchy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HierarchyStats {
    /// Vertices on the longest root-to-leaf path.
    pub height: usize,
    /// `Σ_v |Desc(v)|`, the number of stored label entries.
    pub total_label_entries: usize,
    /// `total_label_entries / n`.
    pub avg_label_size: f64,
}

pub fn hierarchy_stats(t: &HierarchyTree) -> HierarchyStats {
    let total: usize = t.dfs_size.iter().sum();
    HierarchyStats {
        height: t.height(),
        total_label_entries: total,
        avg_label_size: total as f64 / t.n() as f64,
    }
}

/// One broken hierarchy invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    SizeMismatch { tree: usize, graph: usize },
    Root { root: usize, parent: usize },
    Layout { vertex: usize },
    Nesting { vertex: usize, parent: usize },
    SubtreeSize { vertex: usize, stored: usize, actual: usize },
    /// Edge endpoints that are not in an ancestor relation.
    Separator { u: usize, w: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::SizeMismatch { tree, graph } => {
                write!(f, "tree covers {tree} vertices, graph has {graph}")
            }
            Self::Root { root, parent } => write!(f, "root {root} has parent {parent}"),
            Self::Layout { vertex } => {
                write!(f, "vertex {vertex}: dfs position disagrees with preorder")
            }
            Self::Nesting { vertex, parent } => write!(
                f,
                "interval of {vertex} is not strictly inside that of its parent {parent}"
            ),
            Self::SubtreeSize {
                vertex,
                stored,
                actual,
            } => write!(f, "vertex {vertex}: stored subtree size {stored}, actual {actual}"),
            Self::Separator { u, w } => write!(
                f,
                "edge ({u}, {w}) joins vertices that are not ancestor-related"
            ),
        }
    }
}

/// Checks every tree invariant against `g`. An empty list means the tree is a
/// valid hierarchy for the graph.
pub fn validate_hierarchy(g: &Graph, t: &HierarchyTree) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = t.n();
    if n != g.n() {
        out.push(Violation::SizeMismatch {
            tree: n,
            graph: g.n(),
        });
        return out;
    }
    if t.parent[t.root] != t.root {
        out.push(Violation::Root {
            root: t.root,
            parent: t.parent[t.root],
        });
    }
    for v in 0..n {
        if t.order.get(t.dfs_start[v]) != Some(&v) {
            out.push(Violation::Layout { vertex: v });
        }
    }
    let mut actual = vec![1usize; n];
    for &v in t.order.iter().rev() {
        if v == t.root {
            continue;
        }
        let p = t.parent[v];
        actual[p] += actual[v];
        let (ps, pe) = (t.dfs_start[p], t.dfs_start[p] + t.dfs_size[p]);
        let (cs, ce) = (t.dfs_start[v], t.dfs_start[v] + t.dfs_size[v]);
        if !(cs > ps && ce <= pe) {
            out.push(Violation::Nesting {
                vertex: v,
                parent: p,
            });
        }
    }
    for (v, (&stored, &actual)) in t.dfs_size.iter().zip(&actual).enumerate() {
        if actual != stored {
            out.push(Violation::SubtreeSize {
                vertex: v,
                stored,
                actual,
            });
        }
    }
    for (u, w, _) in g.edges() {
        if !t.is_ancestor(u, w) && !t.is_ancestor(w, u) {
            out.push(Violation::Separator { u, w });
        }
    }
    out
}

pub(crate) fn ensure_valid(g: &Graph, t: &HierarchyTree) -> Result<(), HierarchyError> {
    match validate_hierarchy(g, t).into_iter().next() {
        None => Ok(()),
        Some(v) => Err(HierarchyError::Invalid(v)),
    }
}
