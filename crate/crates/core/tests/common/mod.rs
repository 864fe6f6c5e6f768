#![allow(dead_code)]

use bdindex::query::{accumulate_tau, evaluate, TauVector};
use bdindex::{BDIndex, Graph};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn path(n: usize) -> Graph {
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    Graph::from_unweighted(n, &edges).unwrap()
}

pub fn cycle(n: usize) -> Graph {
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    Graph::from_unweighted(n, &edges).unwrap()
}

pub fn grid(rows: usize, cols: usize) -> Graph {
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let v = r * cols + c;
            if c + 1 < cols {
                edges.push((v, v + 1));
            }
            if r + 1 < rows {
                edges.push((v, v + cols));
            }
        }
    }
    Graph::from_unweighted(rows * cols, &edges).unwrap()
}

pub fn random_tree(n: usize, rng: &mut ChaCha8Rng) -> Graph {
    let edges: Vec<_> = (1..n).map(|i| (rng.gen_range(0..i), i)).collect();
    Graph::from_unweighted(n, &edges).unwrap()
}

/// Erdős–Rényi graph with `p = 2 ln n / n`, redrawn until connected.
pub fn erdos_renyi(n: usize, rng: &mut ChaCha8Rng) -> Graph {
    let p = if n <= 2 { 1.0 } else { (2.0 * (n as f64).ln() / n as f64).min(1.0) };
    loop {
        let mut edges = Vec::new();
        for u in 0..n {
            for w in u + 1..n {
                if rng.gen_bool(p) {
                    edges.push((u, w));
                }
            }
        }
        let g = Graph::from_unweighted(n, &edges).unwrap();
        if g.is_connected() {
            return g;
        }
    }
}

/// Connected graph with random positive weights on a spanning tree plus
/// extra random edges.
pub fn weighted(n: usize, extra: usize, rng: &mut ChaCha8Rng) -> Graph {
    let mut edges: Vec<(usize, usize, f64)> = (1..n)
        .map(|i| (rng.gen_range(0..i), i, rng.gen_range(0.1..5.0)))
        .collect();
    for _ in 0..extra {
        let (u, w) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if u != w && !edges.iter().any(|&(a, b, _)| (a, b) == (u, w) || (a, b) == (w, u)) {
            edges.push((u, w, rng.gen_range(0.1..5.0)));
        }
    }
    Graph::from_edges(n, &edges).unwrap()
}

/// Two random blobs that share exactly one vertex, which is returned.
pub fn with_cut_vertex(left: usize, right: usize, rng: &mut ChaCha8Rng) -> (Graph, usize) {
    let a = erdos_renyi(left, rng);
    let b = erdos_renyi(right, rng);
    let cut = left - 1;
    let shift = |v: usize| if v == 0 { cut } else { v + left - 1 };
    let mut edges: Vec<(usize, usize)> = a.edges().map(|(u, w, _)| (u, w)).collect();
    edges.extend(b.edges().map(|(u, w, _)| (shift(u), shift(w))));
    (Graph::from_unweighted(left + right - 1, &edges).unwrap(), cut)
}

/// Mixed corpus of connected graphs with sizes in `[2, max_n]`.
pub fn corpus(count: usize, max_n: usize, rng: &mut ChaCha8Rng) -> Vec<(String, Graph)> {
    (0..count)
        .map(|i| {
            let n = rng.gen_range(2..=max_n);
            match i % 3 {
                0 => (format!("er(n={n})"), erdos_renyi(n, rng)),
                1 => {
                    let rows = rng.gen_range(1..=((n as f64).sqrt() as usize).max(1));
                    let cols = (n / rows).max(2);
                    (format!("grid({rows}x{cols})"), grid(rows, cols))
                }
                _ => (format!("tree(n={n})"), random_tree(n, rng)),
            }
        })
        .collect()
}

pub fn shuffled(items: &[usize], rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut v = items.to_vec();
    v.shuffle(rng);
    v
}

/// `τ̃_v` for every vertex, so all-pairs sweeps accumulate each only once.
pub fn all_taus(idx: &BDIndex) -> Vec<TauVector> {
    (0..idx.n())
        .map(|v| {
            let mut tau = TauVector::new(idx.n());
            accumulate_tau(idx, v, &mut tau).unwrap();
            tau
        })
        .collect()
}

pub fn cached_bd(taus: &[TauVector], s: usize, t: usize) -> f64 {
    if s == t {
        0.0
    } else {
        evaluate(&taus[s], &taus[t], taus.len())
    }
}

pub fn relative_error(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / reference.abs().max(1.0)
}
