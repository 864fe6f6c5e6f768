//! Dense ground-truth computations for biharmonic distance.
//!
//! Everything here works on explicit dense matrices and is meant for graphs
//! small enough to factor directly. The index and query engine never call into
//! this module; it exists so they can be checked against independent routes.

pub mod dense;

use std::collections::VecDeque;

use thiserror::Error;

use crate::graph::{Graph, GraphError};
pub use dense::{Cholesky, DenseMatrix};

/// Largest vertex count accepted by the dense solvers.
pub const DENSE_LIMIT: usize = 4096;
/// Largest vertex count accepted by the random-walk series.
pub const WALK_LIMIT: usize = 1024;
/// Largest vertex count accepted by the elimination replay.
pub const DECOMPOSITION_LIMIT: usize = 256;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("graph has {n} vertices; this oracle is limited to {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("matrix is singular: pivot {pivot} is {value}")]
    Singular { pivot: usize, value: f64 },
    #[error("vertex id {id} out of range for a graph with {n} vertices")]
    OutOfRange { id: usize, n: usize },
    #[error("elimination order is not a permutation of the non-grounded vertices")]
    NotPermutation,
    #[error("walk series did not settle within {steps} steps")]
    NotConverged { steps: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn guard(g: &Graph, limit: usize) -> Result<(), OracleError> {
    if g.n() > limit {
        return Err(OracleError::TooLarge { n: g.n(), limit });
    }
    Ok(())
}

fn check_ids(g: &Graph, ids: &[usize]) -> Result<(), OracleError> {
    match ids.iter().find(|&&v| v >= g.n()) {
        Some(&id) => Err(OracleError::OutOfRange { id, n: g.n() }),
        None => Ok(()),
    }
}

/// Principal submatrix of the full Laplacian on `vertices`, in the given
/// order. Diagonal entries are full weighted degrees.
pub fn laplacian_block(g: &Graph, vertices: &[usize]) -> DenseMatrix {
    let k = vertices.len();
    let mut local = vec![usize::MAX; g.n()];
    for (i, &v) in vertices.iter().enumerate() {
        local[v] = i;
    }
    let mut l = DenseMatrix::zeros(k, k);
    for (i, &v) in vertices.iter().enumerate() {
        l.set(i, i, g.degree(v));
        for (w, wt) in g.adjacent(v) {
            let j = local[w];
            if j != usize::MAX {
                l.add(i, j, -wt);
            }
        }
    }
    l
}

/// Factored `L + J/n`, whose inverse equals `L† + J/n` on a connected graph.
pub struct PseudoinverseOracle {
    n: usize,
    factor: Cholesky,
}

impl PseudoinverseOracle {
    pub fn new(g: &Graph) -> Result<Self, OracleError> {
        guard(g, DENSE_LIMIT)?;
        g.require_connected()?;
        let n = g.n();
        let mut a = laplacian_block(g, &(0..n).collect::<Vec<_>>());
        let shift = 1.0 / n as f64;
        for i in 0..n {
            for j in 0..n {
                a.add(i, j, shift);
            }
        }
        Ok(Self {
            n,
            factor: Cholesky::factor(&a)?,
        })
    }

    /// `L†(e_s − e_t)`.
    pub fn difference_image(&self, s: usize, t: usize) -> Result<Vec<f64>, OracleError> {
        for id in [s, t] {
            if id >= self.n {
                return Err(OracleError::OutOfRange { id, n: self.n });
            }
        }
        let mut rhs = vec![0.0; self.n];
        rhs[s] += 1.0;
        rhs[t] -= 1.0;
        let mut y = self.factor.solve(&rhs);
        let mean = y.iter().sum::<f64>() / self.n as f64;
        for v in &mut y {
            *v -= mean;
        }
        Ok(y)
    }

    pub fn bd(&self, s: usize, t: usize) -> Result<f64, OracleError> {
        let y = self.difference_image(s, t)?;
        Ok(y.iter().map(|v| v * v).sum())
    }

    /// All columns at once, for all-pairs sweeps.
    pub fn all_pairs(&self) -> AllPairsOracle {
        AllPairsOracle {
            inverse: self.factor.inverse(),
        }
    }
}

/// Dense `(L + J/n)⁻¹`; pair distances come from column differences.
pub struct AllPairsOracle {
    inverse: DenseMatrix,
}

impl AllPairsOracle {
    pub fn bd(&self, s: usize, t: usize) -> f64 {
        let n = self.inverse.rows();
        let (rs, rt) = (self.inverse.row(s), self.inverse.row(t));
        let mean = rs.iter().zip(rt).map(|(a, b)| a - b).sum::<f64>() / n as f64;
        rs.iter()
            .zip(rt)
            .map(|(a, b)| {
                let d = a - b - mean;
                d * d
            })
            .sum()
    }
}

/// `b(s,t) = (e_s − e_t)ᵀ L²† (e_s − e_t)` by one dense solve.
pub fn pseudoinverse_bd(g: &Graph, s: usize, t: usize) -> Result<f64, OracleError> {
    PseudoinverseOracle::new(g)?.bd(s, t)
}

/// Factored grounded Laplacian `L_v`, for many pairs with the same `v`.
pub struct GroundedOracle {
    n: usize,
    grounded: usize,
    factor: Cholesky,
}

impl GroundedOracle {
    pub fn new(g: &Graph, v: usize) -> Result<Self, OracleError> {
        guard(g, DENSE_LIMIT)?;
        check_ids(g, &[v])?;
        g.require_connected()?;
        let rest: Vec<usize> = (0..g.n()).filter(|&x| x != v).collect();
        Ok(Self {
            n: g.n(),
            grounded: v,
            factor: Cholesky::factor(&laplacian_block(g, &rest))?,
        })
    }

    /// `‖L_v⁻¹x‖² − (1/n)(1ᵀL_v⁻¹x)²` with `x = e_s − e_t` restricted to
    /// `V∖{v}`.
    pub fn bd(&self, s: usize, t: usize) -> Result<f64, OracleError> {
        for id in [s, t] {
            if id >= self.n {
                return Err(OracleError::OutOfRange { id, n: self.n });
            }
        }
        if s == t {
            return Ok(0.0);
        }
        let local = |x: usize| if x > self.grounded { x - 1 } else { x };
        let mut rhs = vec![0.0; self.n - 1];
        if s != self.grounded {
            rhs[local(s)] += 1.0;
        }
        if t != self.grounded {
            rhs[local(t)] -= 1.0;
        }
        let y = self.factor.solve(&rhs);
        let norm: f64 = y.iter().map(|a| a * a).sum();
        let total: f64 = y.iter().sum();
        Ok(norm - total * total / self.n as f64)
    }
}

/// Biharmonic distance through the Laplacian grounded at `v`.
pub fn grounded_bd(g: &Graph, v: usize, s: usize, t: usize) -> Result<f64, OracleError> {
    check_ids(g, &[v, s, t])?;
    GroundedOracle::new(g, v)?.bd(s, t)
}

/// Dense `L_v⁻¹` indexed by the vertices other than `v` in ascending order.
pub fn grounded_inverse(g: &Graph, v: usize) -> Result<(Vec<usize>, DenseMatrix), OracleError> {
    guard(g, DENSE_LIMIT)?;
    check_ids(g, &[v])?;
    let rest: Vec<usize> = (0..g.n()).filter(|&x| x != v).collect();
    let inv = Cholesky::factor(&laplacian_block(g, &rest))?.inverse();
    Ok((rest, inv))
}

struct WalkSeries<'a> {
    g: &'a Graph,
    /// `(e_s − e_t)ᵀ Pⁱ` for the current `i`.
    row: Vec<f64>,
    /// `Σ_{j ≤ i} (e_s − e_t)ᵀ Pʲ D⁻¹`.
    partial: Vec<f64>,
    steps: usize,
}

impl<'a> WalkSeries<'a> {
    fn new(g: &'a Graph, s: usize, t: usize) -> Self {
        let mut row = vec![0.0; g.n()];
        row[s] += 1.0;
        row[t] -= 1.0;
        let partial = row.iter().zip(g.degrees()).map(|(r, d)| r / d).collect();
        Self {
            g,
            row,
            partial,
            steps: 0,
        }
    }

    fn next_row(&self) -> Vec<f64> {
        let mut next = vec![0.0; self.g.n()];
        for (u, &r) in self.row.iter().enumerate() {
            if r == 0.0 {
                continue;
            }
            let c = r / self.g.degree(u);
            for (w, wt) in self.g.adjacent(u) {
                next[w] += c * wt;
            }
        }
        next
    }

    fn advance_to(&mut self, steps: usize) {
        while self.steps < steps {
            self.row = self.next_row();
            for ((p, r), d) in self.partial.iter_mut().zip(&self.row).zip(self.g.degrees()) {
                *p += r / d;
            }
            self.steps += 1;
        }
    }
}

fn walk_expression(delta: &[f64]) -> f64 {
    let n = delta.len() as f64;
    let norm: f64 = delta.iter().map(|x| x * x).sum();
    let total: f64 = delta.iter().sum();
    norm - total * total / n
}

/// The random-walk expression evaluated on the partial sum
/// `δ_T = Σ_{i=0}^{T} (e_s − e_t)ᵀ Pⁱ D⁻¹`.
///
/// On bipartite graphs the partial sums of opposite-side pairs oscillate and
/// have no limit; see [`walk_bd`] for a version that converges everywhere.
pub fn truncated_walk_bd(g: &Graph, s: usize, t: usize, steps: usize) -> Result<f64, OracleError> {
    guard(g, WALK_LIMIT)?;
    check_ids(g, &[s, t])?;
    if s == t {
        return Ok(0.0);
    }
    let mut series = WalkSeries::new(g, s, t);
    series.advance_to(steps);
    Ok(walk_expression(&series.partial))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkEstimate {
    pub value: f64,
    /// Truncation length `T` of the accepted estimate.
    pub steps: usize,
}

/// Relative change between successive doublings that ends [`walk_bd`].
pub const WALK_SETTLE: f64 = 1e-8;

/// Random-walk series with a doubling schedule starting at `T = 64·n`.
///
/// Each estimate uses the mean of the partial sums at `T` and `T + 1`, which
/// cancels the period-two component that random walks on bipartite graphs
/// carry and leaves the limit unchanged wherever the plain series converges.
/// Doubling stops once two successive estimates agree within [`WALK_SETTLE`].
pub fn walk_bd(g: &Graph, s: usize, t: usize) -> Result<WalkEstimate, OracleError> {
    guard(g, WALK_LIMIT)?;
    check_ids(g, &[s, t])?;
    if s == t {
        return Ok(WalkEstimate { value: 0.0, steps: 0 });
    }
    let n = g.n();
    let max_steps = (64 * n).max(1 << 24);
    let mut series = WalkSeries::new(g, s, t);
    let mut steps = 64 * n;
    let mut previous: Option<f64> = None;
    while steps <= max_steps {
        series.advance_to(steps);
        let next = series.next_row();
        let averaged: Vec<f64> = series
            .partial
            .iter()
            .zip(&next)
            .zip(g.degrees())
            .map(|((p, r), d)| p + 0.5 * r / d)
            .collect();
        let value = walk_expression(&averaged);
        if let Some(prev) = previous {
            if (value - prev).abs() <= WALK_SETTLE * value.abs() {
                return Ok(WalkEstimate { value, steps });
            }
        }
        previous = Some(value);
        steps *= 2;
    }
    Err(OracleError::NotConverged { steps: max_steps })
}

/// Outcome of replaying a grounded elimination with dense matrices.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CutDecompositionReport {
    /// Worst entrywise gap between `L_v⁻¹` and the accumulated contribution
    /// matrices plus the residual block inverse, over all steps.
    pub max_deviation: f64,
    /// Largest entry of a residual inverse linking two different components
    /// of the residual graph.
    pub max_cross_block: f64,
    /// Steps at which the residual graph was disconnected and the
    /// block-diagonal form was checked.
    pub block_checks: usize,
}

fn components(g: &Graph, members: &[usize]) -> Vec<usize> {
    let n = g.n();
    let mut local = vec![usize::MAX; n];
    for (i, &v) in members.iter().enumerate() {
        local[v] = i;
    }
    let mut comp = vec![usize::MAX; members.len()];
    let mut next = 0;
    for start in 0..members.len() {
        if comp[start] != usize::MAX {
            continue;
        }
        comp[start] = next;
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            for &w in g.neighbor_ids(members[i]) {
                let j = local[w];
                if j != usize::MAX && comp[j] == usize::MAX {
                    comp[j] = next;
                    queue.push_back(j);
                }
            }
        }
        next += 1;
    }
    comp
}

fn cross_block_max(g: &Graph, members: &[usize], inv: &DenseMatrix) -> Option<f64> {
    let comp = components(g, members);
    if comp.iter().all(|&c| c == 0) {
        return None;
    }
    let mut worst = 0.0f64;
    for i in 0..members.len() {
        for j in 0..members.len() {
            if comp[i] != comp[j] {
                worst = worst.max(inv.get(i, j).abs());
            }
        }
    }
    Some(worst)
}

/// Eliminates the vertices of `V∖{v}` one at a time in `order`, forming each
/// rank-one contribution matrix from its Schur complement, and compares the
/// running sum plus the inverse of the remaining block against `L_v⁻¹` after
/// every step. Whenever the remaining vertices (or `V∖{v}` itself) fall apart
/// into several components, the off-diagonal blocks of the residual inverse
/// are measured as well.
pub fn cut_decomposition_check(
    g: &Graph,
    v: usize,
    order: &[usize],
) -> Result<CutDecompositionReport, OracleError> {
    guard(g, DECOMPOSITION_LIMIT)?;
    check_ids(g, &[v])?;
    g.require_connected()?;
    let n = g.n();
    let mut seen = vec![false; n];
    seen[v] = true;
    for &c in order {
        if c >= n || seen[c] {
            return Err(OracleError::NotPermutation);
        }
        seen[c] = true;
    }
    if order.len() != n - 1 {
        return Err(OracleError::NotPermutation);
    }

    let mut report = CutDecompositionReport::default();
    let mut remaining: Vec<usize> = (0..n).filter(|&x| x != v).collect();
    let full = Cholesky::factor(&laplacian_block(g, &remaining))?.inverse();
    let mut position = vec![usize::MAX; n];
    for (i, &x) in remaining.iter().enumerate() {
        position[x] = i;
    }
    if let Some(cross) = cross_block_max(g, &remaining, &full) {
        report.max_cross_block = report.max_cross_block.max(cross);
        report.block_checks += 1;
    }

    let mut accumulated = DenseMatrix::zeros(n - 1, n - 1);
    for &c in order {
        remaining.retain(|&x| x != c);
        let residual = if remaining.is_empty() {
            DenseMatrix::zeros(0, 0)
        } else {
            Cholesky::factor(&laplacian_block(g, &remaining))?.inverse()
        };
        let adjacency: Vec<f64> = remaining
            .iter()
            .map(|&x| g.weight(c, x).unwrap_or(0.0))
            .collect();
        let m: Vec<f64> = (0..remaining.len())
            .map(|i| dense::dot(residual.row(i), &adjacency))
            .collect();
        let schur = g.degree(c) - dense::dot(&adjacency, &m);
        if !schur.is_finite() || schur <= 0.0 {
            return Err(OracleError::Singular {
                pivot: c,
                value: schur,
            });
        }
        // Rank-one update on remaining ∪ {c}; c carries the unit entry.
        let mut support: Vec<(usize, f64)> = remaining
            .iter()
            .zip(&m)
            .map(|(&x, &mx)| (position[x], mx))
            .collect();
        support.push((position[c], 1.0));
        for &(i, a) in &support {
            for &(j, b) in &support {
                accumulated.add(i, j, a * b / schur);
            }
        }

        let mut reconstructed = accumulated.clone();
        for (i, &x) in remaining.iter().enumerate() {
            for (j, &y) in remaining.iter().enumerate() {
                reconstructed.add(position[x], position[y], residual.get(i, j));
            }
        }
        report.max_deviation = report.max_deviation.max(reconstructed.max_abs_diff(&full));
        if remaining.len() > 1 {
            if let Some(cross) = cross_block_max(g, &remaining, &residual) {
                report.max_cross_block = report.max_cross_block.max(cross);
                report.block_checks += 1;
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p3() -> Graph {
        Graph::from_unweighted(3, &[(0, 1), (1, 2)]).unwrap()
    }

    fn c4() -> Graph {
        Graph::from_unweighted(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap()
    }

    /// Spectral route: b(s,t) = Σ_k (φ_k(s) − φ_k(t))² / λ_k² over nonzero
    /// eigenpairs, computed with hand-derived eigenvectors.
    fn spectral_bd(eigen: &[(f64, Vec<f64>)], s: usize, t: usize) -> f64 {
        eigen
            .iter()
            .map(|(lambda, phi)| {
                let d = phi[s] - phi[t];
                d * d / (lambda * lambda)
            })
            .sum()
    }

    fn normalized(v: &[f64]) -> Vec<f64> {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter().map(|x| x / norm).collect()
    }

    #[test]
    fn spectral_values_of_p3_and_c4() {
        let p3_eigen = vec![
            (1.0, normalized(&[1.0, 0.0, -1.0])),
            (3.0, normalized(&[1.0, -2.0, 1.0])),
        ];
        assert!((spectral_bd(&p3_eigen, 0, 2) - 2.0).abs() < 1e-14);
        assert!((spectral_bd(&p3_eigen, 0, 1) - 2.0 / 3.0).abs() < 1e-14);
        let c4_eigen = vec![
            (2.0, normalized(&[1.0, 0.0, -1.0, 0.0])),
            (2.0, normalized(&[0.0, 1.0, 0.0, -1.0])),
            (4.0, normalized(&[1.0, -1.0, 1.0, -1.0])),
        ];
        assert!((spectral_bd(&c4_eigen, 0, 1) - 5.0 / 16.0).abs() < 1e-14);
        assert!((spectral_bd(&c4_eigen, 0, 2) - 0.5).abs() < 1e-14);

        assert!((pseudoinverse_bd(&p3(), 0, 2).unwrap() - 2.0).abs() < 1e-12);
        assert!((pseudoinverse_bd(&p3(), 0, 1).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!((pseudoinverse_bd(&c4(), 0, 1).unwrap() - 5.0 / 16.0).abs() < 1e-12);
        assert!((pseudoinverse_bd(&c4(), 0, 2).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn all_pairs_matches_single_solves() {
        let g = c4();
        let oracle = PseudoinverseOracle::new(&g).unwrap();
        let all = oracle.all_pairs();
        for s in 0..4 {
            for t in 0..4 {
                assert!((all.bd(s, t) - oracle.bd(s, t).unwrap()).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn grounded_examples() {
        let g = p3();
        assert!((grounded_bd(&g, 1, 0, 2).unwrap() - 2.0).abs() < 1e-12);
        assert!((grounded_bd(&g, 0, 0, 2).unwrap() - 2.0).abs() < 1e-12);
        assert!((grounded_bd(&g, 1, 0, 1).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(grounded_bd(&g, 1, 2, 2).unwrap(), 0.0);
    }

    #[test]
    fn walk_series_anchors() {
        let g = p3();
        // δ₀ = (1, −1/2, 0): 5/4 − (1/3)(1/2)² = 7/6.
        assert!((truncated_walk_bd(&g, 0, 1, 0).unwrap() - 7.0 / 6.0).abs() < 1e-15);
        assert_eq!(truncated_walk_bd(&g, 1, 1, 10).unwrap(), 0.0);
        assert!((truncated_walk_bd(&g, 0, 2, 1000).unwrap() - 2.0).abs() < 1e-6);
        let est = walk_bd(&g, 0, 1).unwrap();
        assert!((est.value - 2.0 / 3.0).abs() < 1e-9, "{est:?}");
    }

    #[test]
    fn plain_partial_sums_oscillate_on_bipartite_pairs() {
        let g = p3();
        let even = truncated_walk_bd(&g, 0, 1, 1000).unwrap();
        let odd = truncated_walk_bd(&g, 0, 1, 1001).unwrap();
        assert!((even - odd).abs() > 0.1);
    }

    #[test]
    fn decomposition_examples() {
        let g = p3();
        let r = cut_decomposition_check(&g, 1, &[0, 2]).unwrap();
        assert!(r.max_deviation <= 1e-12);
        assert_eq!(r.block_checks, 1);
        assert_eq!(r.max_cross_block, 0.0);
        let (rest, inv) = grounded_inverse(&g, 1).unwrap();
        assert_eq!(rest, vec![0, 2]);
        assert_eq!(inv.get(0, 1), 0.0);

        let r = cut_decomposition_check(&c4(), 0, &[2, 1, 3]).unwrap();
        assert!(r.max_deviation <= 1e-12);
        assert!(r.block_checks >= 1);
        assert!(r.max_cross_block <= 1e-15);
    }

    #[test]
    fn guards_and_bad_orders() {
        let g = p3();
        assert!(matches!(
            cut_decomposition_check(&g, 1, &[0, 0]),
            Err(OracleError::NotPermutation)
        ));
        assert!(matches!(
            cut_decomposition_check(&g, 1, &[0]),
            Err(OracleError::NotPermutation)
        ));
        assert!(matches!(pseudoinverse_bd(&g, 0, 5), Err(OracleError::OutOfRange { .. })));
        let big: Vec<_> = (0..300).map(|i| (i, i + 1)).collect();
        let big = Graph::from_unweighted(301, &big).unwrap();
        let order: Vec<usize> = (1..301).collect();
        assert!(matches!(
            cut_decomposition_check(&big, 0, &order),
            Err(OracleError::TooLarge { .. })
        ));
        let disconnected = Graph::from_unweighted(4, &[(0, 1), (2, 3)]).unwrap();
        assert!(pseudoinverse_bd(&disconnected, 0, 1).is_err());
    }
}
