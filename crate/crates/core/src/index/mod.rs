//! Per-vertex labels `(m_v, f_v)` over a hierarchy tree.
//!
//! `m_v` is stored over `Desc(v)` in DFS order with `m_v[0] = 1` for `v`
//! itself, and `f_v` is the Schur-complement pivot left after eliminating the
//! proper descendants of `v`. Labels of all vertices are concatenated in the
//! DFS order of their owners.

pub mod format;

use std::collections::HashMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::graph::Graph;
use crate::hierarchy::{ensure_valid, HierarchyError, HierarchyStats, HierarchyTree, Violation};
use crate::oracle::{laplacian_block, Cholesky, OracleError, DENSE_LIMIT};

/// A non-root pivot at or below `BREAKDOWN_TOLERANCE · d_v` aborts the build.
pub const BREAKDOWN_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum IndexError {
    #[error(transparent)]
    Hierarchy(#[from] HierarchyError),
    #[error("numerical breakdown at vertex {label}: pivot {pivot} (degree {degree})")]
    Breakdown {
        vertex: usize,
        label: String,
        pivot: f64,
        degree: f64,
    },
    #[error("index does not match graph: {0}")]
    Mismatch(String),
}

/// Owned copy of one label.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeLabel {
    pub m: Vec<f64>,
    pub f: f64,
}

/// Borrowed view of one label inside a [`BDIndex`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelView<'a> {
    pub m: &'a [f64],
    pub f: f64,
}

impl LabelView<'_> {
    pub fn to_owned(&self) -> NodeLabel {
        NodeLabel {
            m: self.m.to_vec(),
            f: self.f,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BDIndex {
    tree: HierarchyTree,
    values: Vec<f64>,
    offsets: Vec<usize>,
    f: Vec<f64>,
    labels: Vec<String>,
    label_index: HashMap<String, usize>,
}

impl BDIndex {
    /// Assembles an index from raw parts. The caller is responsible for the
    /// label layout matching `tree`; [`format::deserialize`] checks it.
    pub(crate) fn from_parts(
        tree: HierarchyTree,
        values: Vec<f64>,
        offsets: Vec<usize>,
        f: Vec<f64>,
        labels: Vec<String>,
    ) -> Self {
        let label_index = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i))
            .collect();
        Self {
            tree,
            values,
            offsets,
            f,
            labels,
            label_index,
        }
    }

    pub fn n(&self) -> usize {
        self.tree.n()
    }

    pub fn tree(&self) -> &HierarchyTree {
        &self.tree
    }

    pub fn root(&self) -> usize {
        self.tree.root()
    }

    pub fn label(&self, v: usize) -> LabelView<'_> {
        let start = self.offsets[v];
        LabelView {
            m: &self.values[start..start + self.tree.dfs_size(v)],
            f: self.f[v],
        }
    }

    pub fn m(&self, v: usize) -> &[f64] {
        self.label(v).m
    }

    pub fn f(&self, v: usize) -> f64 {
        self.f[v]
    }

    pub fn f_values(&self) -> &[f64] {
        &self.f
    }

    /// Concatenated `m` vectors in DFS order of their owners.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn vertex_label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn vertex_labels(&self) -> &[String] {
        &self.labels
    }

    pub fn id_of(&self, label: &str) -> Option<usize> {
        self.label_index.get(label).copied()
    }

    pub fn total_entries(&self) -> usize {
        self.values.len()
    }

    pub fn stats(&self) -> HierarchyStats {
        self.tree.stats()
    }

    /// Checks that the index was built from `g`: vertex count, labels,
    /// separator property, and every pivot recomputed from the stored `m`
    /// and the graph's degrees.
    pub fn check_graph(&self, g: &Graph) -> Result<(), IndexError> {
        if g.n() != self.n() {
            return Err(IndexError::Mismatch(format!(
                "index has {} vertices, graph has {}",
                self.n(),
                g.n()
            )));
        }
        if let Some(v) = (0..self.n()).find(|&v| g.label(v) != self.labels[v]) {
            return Err(IndexError::Mismatch(format!(
                "vertex {v} is labelled {} in the index and {} in the graph",
                self.labels[v],
                g.label(v)
            )));
        }
        let violations = crate::hierarchy::validate_hierarchy(g, &self.tree);
        if let Some(v) = violations.into_iter().next() {
            let detail = match v {
                Violation::Separator { u, w } => format!(
                    "edge ({}, {}) joins vertices with no ancestor relation",
                    g.label(u),
                    g.label(w)
                ),
                other => other.to_string(),
            };
            return Err(IndexError::Mismatch(detail));
        }
        for v in 0..self.n() {
            if v == self.root() {
                continue;
            }
            let pivot = self.pivot(g, v);
            let stored = self.f[v];
            if (pivot - stored).abs() > 1e-9 * g.degree(v).max(1.0) {
                return Err(IndexError::Mismatch(format!(
                    "vertex {} has stored pivot {stored} but the graph gives {pivot}",
                    g.label(v)
                )));
            }
        }
        Ok(())
    }

    fn pivot(&self, g: &Graph, v: usize) -> f64 {
        let (start, m) = (self.tree.dfs_start(v), self.m(v));
        let mut f = g.degree(v);
        for (x, wt) in g.adjacent(v) {
            if x != v && self.tree.is_ancestor(v, x) {
                f -= wt * m[self.tree.dfs_start(x) - start];
            }
        }
        f
    }
}

/// Height of every vertex above its deepest leaf (leaves are 0).
fn levels(tree: &HierarchyTree) -> Vec<Vec<usize>> {
    let n = tree.n();
    let mut level = vec![0usize; n];
    for &v in tree.order().iter().rev() {
        let p = tree.parent(v);
        if p != v {
            level[p] = level[p].max(level[v] + 1);
        }
    }
    let top = level.iter().copied().max().unwrap_or(0);
    let mut out = vec![Vec::new(); top + 1];
    for &v in tree.order() {
        out[level[v]].push(v);
    }
    out
}

/// Label of `v` from the finished labels of its proper descendants.
fn compute_label(g: &Graph, tree: &HierarchyTree, labels: &[NodeLabel], v: usize) -> NodeLabel {
    let start = tree.dfs_start(v);
    let size = tree.dfs_size(v);
    let mut sigma = vec![0.0; size];
    let mut touched = vec![false; size];
    for (x, wt) in g.adjacent(v) {
        if x == v || !tree.is_ancestor(v, x) {
            continue;
        }
        let px = tree.dfs_start(x);
        for u in tree.ancestors(x).take_while(|&u| u != v) {
            let local = tree.dfs_start(u) - start;
            sigma[local] += wt * labels[u].m[px - tree.dfs_start(u)];
            touched[local] = true;
        }
    }

    let mut m = vec![0.0; size];
    let order = tree.descendants(v);
    for local in 1..size {
        if !touched[local] {
            continue;
        }
        let u = order[local];
        let coef = sigma[local] / labels[u].f;
        for (dst, &src) in m[local..local + tree.dfs_size(u)].iter_mut().zip(&labels[u].m) {
            *dst += coef * src;
        }
    }
    m[0] = 1.0;

    let mut f = g.degree(v);
    for (x, wt) in g.adjacent(v) {
        if x != v && tree.is_ancestor(v, x) {
            f -= wt * m[tree.dfs_start(x) - start];
        }
    }
    NodeLabel { m, f }
}

/// Builds all labels bottom-up. Vertices at the same height above the leaves
/// are independent and are processed in parallel.
pub fn build_index(g: &Graph, tree: HierarchyTree) -> Result<BDIndex, IndexError> {
    ensure_valid(g, &tree)?;
    let n = g.n();
    let root = tree.root();
    let mut labels: Vec<NodeLabel> = vec![NodeLabel { m: Vec::new(), f: 0.0 }; n];
    for level in levels(&tree) {
        let done: Vec<(usize, NodeLabel)> = level
            .par_iter()
            .map(|&v| (v, compute_label(g, &tree, &labels, v)))
            .collect();
        for (v, label) in done {
            let d = g.degree(v);
            if v != root && (!label.f.is_finite() || label.f <= BREAKDOWN_TOLERANCE * d) {
                return Err(IndexError::Breakdown {
                    vertex: v,
                    label: g.label(v).to_string(),
                    pivot: label.f,
                    degree: d,
                });
            }
            labels[v] = label;
        }
    }

    let total: usize = tree.dfs_sizes().iter().sum();
    let mut values = Vec::with_capacity(total);
    let mut offsets = vec![0usize; n];
    let mut f = vec![0.0; n];
    for &v in tree.order() {
        offsets[v] = values.len();
        let label = std::mem::take(&mut labels[v]);
        values.extend_from_slice(&label.m);
        f[v] = label.f;
    }
    Ok(BDIndex::from_parts(tree, values, offsets, f, g.labels().to_vec()))
}

impl Default for NodeLabel {
    fn default() -> Self {
        Self { m: Vec::new(), f: 0.0 }
    }
}

/// Label of `v` by a dense solve of `L_S m' = a_v` over `S = Desc(v) ∖ {v}`,
/// with `L_S` the principal submatrix of the full Laplacian.
pub fn direct_label_oracle(g: &Graph, tree: &HierarchyTree, v: usize) -> Result<NodeLabel, OracleError> {
    if v >= g.n() {
        return Err(OracleError::OutOfRange { id: v, n: g.n() });
    }
    let desc = tree.descendants(v);
    if desc.len() > DENSE_LIMIT {
        return Err(OracleError::TooLarge {
            n: desc.len(),
            limit: DENSE_LIMIT,
        });
    }
    let rest = &desc[1..];
    let a: Vec<f64> = rest.iter().map(|&x| g.weight(v, x).unwrap_or(0.0)).collect();
    let m_rest = if rest.is_empty() {
        Vec::new()
    } else {
        Cholesky::factor(&laplacian_block(g, rest))?.solve(&a)
    };
    let f = g.degree(v) - a.iter().zip(&m_rest).map(|(x, y)| x * y).sum::<f64>();
    let mut m = Vec::with_capacity(desc.len());
    m.push(1.0);
    m.extend(m_rest);
    Ok(NodeLabel { m, f })
}
