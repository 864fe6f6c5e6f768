//! Pair queries over a [`BDIndex`].

use std::ops::Range;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::graph::Graph;
use crate::index::BDIndex;

/// Negative results down to `-NEGATIVE_TOLERANCE · ‖τ̃_s − τ̃_t‖²` are
/// reported as zero.
pub const NEGATIVE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum QueryError {
    #[error("vertex id {id} out of range for an index with {n} vertices")]
    OutOfRange { id: usize, n: usize },
    #[error("negative distance {value} between {s} and {t}; the index is corrupt")]
    Negative { s: usize, t: usize, value: f64 },
    #[error("pair {position}: {source}")]
    Batch {
        position: usize,
        #[source]
        source: Box<QueryError>,
    },
}

/// Dense scratch for `τ̃_s = L_root⁻¹ e_s`, indexed by DFS position.
///
/// Only the interval of the topmost non-root ancestor of `s` is ever written,
/// so clearing costs the size of that interval.
#[derive(Debug, Clone)]
pub struct TauVector {
    values: Vec<f64>,
    range: Range<usize>,
}

impl TauVector {
    pub fn new(n: usize) -> Self {
        Self {
            values: vec![0.0; n],
            range: 0..0,
        }
    }

    pub fn clear(&mut self) {
        self.values[self.range.clone()].fill(0.0);
        self.range = 0..0;
    }

    /// Entries by DFS position.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// DFS positions that may be nonzero.
    pub fn range(&self) -> Range<usize> {
        self.range.clone()
    }

    /// Entries indexed by vertex id.
    pub fn to_vertex_order(&self, idx: &BDIndex) -> Vec<f64> {
        let tree = idx.tree();
        (0..idx.n()).map(|v| self.values[tree.dfs_start(v)]).collect()
    }
}

fn check(idx: &BDIndex, v: usize) -> Result<(), QueryError> {
    if v >= idx.n() {
        return Err(QueryError::OutOfRange { id: v, n: idx.n() });
    }
    Ok(())
}

/// `out ← Σ_{u ∈ Anc(s), u ≠ root} (m_u[s] / f_u) · m_u`.
pub fn accumulate_tau(idx: &BDIndex, s: usize, out: &mut TauVector) -> Result<(), QueryError> {
    check(idx, s)?;
    out.clear();
    let tree = idx.tree();
    let root = tree.root();
    let pos = tree.dfs_start(s);
    for u in tree.ancestors(s).take_while(|&u| u != root) {
        let start = tree.dfs_start(u);
        let label = idx.label(u);
        let coef = label.m[pos - start] / label.f;
        for (dst, &m) in out.values[start..start + label.m.len()].iter_mut().zip(label.m) {
            *dst += coef * m;
        }
        out.range = start..start + label.m.len();
    }
    Ok(())
}

/// `‖τ̃_s − τ̃_t‖² − (1/n)(1ᵀ(τ̃_s − τ̃_t))²`, evaluated as the squared norm
/// of the mean-centered difference so no cancellation occurs.
pub fn evaluate(a: &TauVector, b: &TauVector, n: usize) -> f64 {
    let lo = match (a.range.is_empty(), b.range.is_empty()) {
        (true, true) => return 0.0,
        (true, false) => b.range.start,
        (false, true) => a.range.start,
        (false, false) => a.range.start.min(b.range.start),
    };
    let hi = a.range.end.max(b.range.end);
    let (xa, xb) = (&a.values[lo..hi], &b.values[lo..hi]);
    let total: f64 = xa.iter().zip(xb).map(|(x, y)| x - y).sum();
    let mean = total / n as f64;
    let inside: f64 = xa
        .iter()
        .zip(xb)
        .map(|(x, y)| {
            let d = x - y - mean;
            d * d
        })
        .sum();
    inside + (n - (hi - lo)) as f64 * mean * mean
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueryResult {
    pub s: usize,
    pub t: usize,
    pub bd: f64,
    pub elapsed: Duration,
}

/// One query worker: an index reference and two scratch vectors.
pub struct QueryEngine<'a> {
    idx: &'a BDIndex,
    tau_s: TauVector,
    tau_t: TauVector,
}

impl<'a> QueryEngine<'a> {
    pub fn new(idx: &'a BDIndex) -> Self {
        Self {
            idx,
            tau_s: TauVector::new(idx.n()),
            tau_t: TauVector::new(idx.n()),
        }
    }

    pub fn query(&mut self, s: usize, t: usize) -> Result<QueryResult, QueryError> {
        check(self.idx, s)?;
        check(self.idx, t)?;
        let started = Instant::now();
        let bd = if s == t {
            0.0
        } else {
            accumulate_tau(self.idx, s, &mut self.tau_s)?;
            accumulate_tau(self.idx, t, &mut self.tau_t)?;
            let bd = evaluate(&self.tau_s, &self.tau_t, self.idx.n());
            if bd < 0.0 {
                let norm: f64 = self
                    .tau_s
                    .values
                    .iter()
                    .zip(&self.tau_t.values)
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum();
                if bd < -NEGATIVE_TOLERANCE * norm {
                    return Err(QueryError::Negative { s, t, value: bd });
                }
                0.0
            } else {
                bd
            }
        };
        Ok(QueryResult {
            s,
            t,
            bd,
            elapsed: started.elapsed(),
        })
    }

    /// Scratch vectors from the last query, for `s` and `t` respectively.
    pub fn scratch(&self) -> (&TauVector, &TauVector) {
        (&self.tau_s, &self.tau_t)
    }
}

pub fn query_bd(idx: &BDIndex, s: usize, t: usize) -> Result<QueryResult, QueryError> {
    QueryEngine::new(idx).query(s, t)
}

/// Answers `pairs` in input order on the current rayon pool. Each worker
/// keeps its own scratch vectors.
pub fn batch_query(idx: &BDIndex, pairs: &[(usize, usize)]) -> Result<Vec<QueryResult>, QueryError> {
    for (position, &(s, t)) in pairs.iter().enumerate() {
        if let Err(e) = check(idx, s).and_then(|_| check(idx, t)) {
            return Err(QueryError::Batch {
                position,
                source: Box::new(e),
            });
        }
    }
    pairs
        .par_iter()
        .enumerate()
        .map_init(
            || QueryEngine::new(idx),
            |engine, (position, &(s, t))| {
                engine.query(s, t).map_err(|e| QueryError::Batch {
                    position,
                    source: Box::new(e),
                })
            },
        )
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeScore {
    pub u: usize,
    pub w: usize,
    pub bd: f64,
}

/// Distance across every edge of `g`, largest first, ties by `(u, w)`
/// ascending, truncated to `top_k`.
pub fn edge_centrality(idx: &BDIndex, g: &Graph, top_k: usize) -> Result<Vec<EdgeScore>, QueryError> {
    let edges: Vec<(usize, usize)> = g.edges().map(|(u, w, _)| (u, w)).collect();
    let mut scores: Vec<EdgeScore> = edges
        .par_iter()
        .map_init(
            || QueryEngine::new(idx),
            |engine, &(u, w)| engine.query(u, w).map(|r| EdgeScore { u, w, bd: r.bd }),
        )
        .collect::<Result<_, _>>()?;
    scores.sort_by(|a, b| b.bd.total_cmp(&a.bd).then((a.u, a.w).cmp(&(b.u, b.w))));
    scores.truncate(top_k);
    Ok(scores)
}
