//! Seeded pair sampling and the edge-removal robustness report.

use std::collections::{HashSet, VecDeque};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::Graph;

pub const DEFAULT_SEED: u64 = 42;

/// `k` distinct unordered pairs `(s, t)` with `s < t`, drawn uniformly without
/// replacement. Returns `None` when fewer than `k` pairs exist.
pub fn sample_distinct_pairs(n: usize, k: usize, seed: u64) -> Option<Vec<(usize, usize)>> {
    let available = (n as u128) * (n.saturating_sub(1) as u128) / 2;
    if k as u128 > available {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::with_capacity(k);
    let mut out = Vec::with_capacity(k);
    if (k as u128) * 2 > available {
        // Dense request: shuffle the full pair list.
        let mut all: Vec<(usize, usize)> = (0..n).flat_map(|s| (s + 1..n).map(move |t| (s, t))).collect();
        for i in 0..k {
            let j = rng.gen_range(i..all.len());
            all.swap(i, j);
        }
        all.truncate(k);
        return Some(all);
    }
    while out.len() < k {
        let s = rng.gen_range(0..n);
        let t = rng.gen_range(0..n);
        if s == t {
            continue;
        }
        let pair = (s.min(t), s.max(t));
        if seen.insert(pair) {
            out.push(pair);
        }
    }
    Some(out)
}

/// Connectivity of a graph after deleting some of its edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemovalReport {
    pub removed_edges: usize,
    /// Fraction of vertices in the largest component.
    pub lcc_fraction: f64,
    pub components: usize,
    /// Fraction of sampled vertex pairs that remain connected.
    pub reachability: f64,
    pub sampled_pairs: usize,
}

pub const REACHABILITY_SAMPLES: usize = 1000;

/// Removes `removed` (pairs of vertex ids) from `g` and measures the result.
/// Reachability is estimated on [`REACHABILITY_SAMPLES`] seeded pairs of
/// distinct vertices drawn with replacement.
pub fn removal_report(g: &Graph, removed: &[(usize, usize)], seed: u64) -> RemovalReport {
    let n = g.n();
    let cut: HashSet<(usize, usize)> = removed.iter().map(|&(u, w)| (u.min(w), u.max(w))).collect();
    let mut comp = vec![usize::MAX; n];
    let mut sizes = Vec::new();
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = sizes.len();
        comp[start] = id;
        let mut size = 0;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            size += 1;
            for &w in g.neighbor_ids(v) {
                if comp[w] == usize::MAX && !cut.contains(&(v.min(w), v.max(w))) {
                    comp[w] = id;
                    queue.push_back(w);
                }
            }
        }
        sizes.push(size);
    }
    let largest = sizes.iter().copied().max().unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reached = 0;
    let samples = if n >= 2 { REACHABILITY_SAMPLES } else { 0 };
    for _ in 0..samples {
        let s = rng.gen_range(0..n);
        let mut t = rng.gen_range(0..n - 1);
        if t >= s {
            t += 1;
        }
        if comp[s] == comp[t] {
            reached += 1;
        }
    }
    RemovalReport {
        removed_edges: cut.len(),
        lcc_fraction: largest as f64 / n as f64,
        components: sizes.len(),
        reachability: if samples == 0 { 1.0 } else { reached as f64 / samples as f64 },
        sampled_pairs: samples,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampling_is_seeded_and_distinct() {
        let a = sample_distinct_pairs(3, 3, 42).unwrap();
        let b = sample_distinct_pairs(3, 3, 42).unwrap();
        assert_eq!(a, b);
        let set: HashSet<_> = a.iter().copied().collect();
        assert_eq!(set.len(), 3);
        assert!(sample_distinct_pairs(3, 10, 42).is_none());
        let big = sample_distinct_pairs(1000, 100, 7).unwrap();
        assert_eq!(big.iter().collect::<HashSet<_>>().len(), 100);
        assert!(big.iter().all(|&(s, t)| s < t && t < 1000));
    }

    #[test]
    fn removal_splits_a_path() {
        let g = Graph::from_unweighted(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let r = removal_report(&g, &[(2, 1)], 1);
        assert_eq!(r.components, 2);
        assert_eq!(r.lcc_fraction, 0.5);
        assert!(r.reachability > 0.2 && r.reachability < 0.5);
        let none = removal_report(&g, &[], 1);
        assert_eq!((none.components, none.reachability), (1, 1.0));
    }
}
