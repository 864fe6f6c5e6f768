use std::collections::{BTreeSet, HashSet};

use super::{HierarchyError, HierarchyTree};
use crate::graph::Graph;

/// Minimum-degree elimination with fill-in.
///
/// Returns the elimination order together with, for every vertex, its
/// neighbors in the filled graph at the moment it was eliminated. Ties are
/// broken by smallest degree, then smallest id; degree counts neighbors in the
/// current (filled) graph, not edge weight.
pub fn min_degree_order(g: &Graph) -> (Vec<usize>, Vec<Vec<usize>>) {
    let n = g.n();
    let mut adj: Vec<HashSet<usize>> = (0..n)
        .map(|v| g.neighbor_ids(v).iter().copied().collect())
        .collect();
    let mut queue: BTreeSet<(usize, usize)> = (0..n).map(|v| (adj[v].len(), v)).collect();
    let mut order = Vec::with_capacity(n);
    let mut frontier = vec![Vec::new(); n];
    while let Some((_, v)) = queue.pop_first() {
        let mut nbrs: Vec<usize> = adj[v].drain().collect();
        nbrs.sort_unstable();
        for &u in &nbrs {
            queue.remove(&(adj[u].len(), u));
            adj[u].remove(&v);
        }
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[i + 1..] {
                if adj[a].insert(b) {
                    adj[b].insert(a);
                }
            }
        }
        for &u in &nbrs {
            queue.insert((adj[u].len(), u));
        }
        order.push(v);
        frontier[v] = nbrs;
    }
    (order, frontier)
}

/// Elimination-tree hierarchy of the minimum-degree order.
///
/// The parent of `v` is the earliest-eliminated vertex among its filled-graph
/// neighbors at elimination time; the last vertex eliminated is the root.
pub fn build_min_degree_hierarchy(g: &Graph) -> Result<HierarchyTree, HierarchyError> {
    g.require_connected()?;
    let n = g.n();
    let (order, frontier) = min_degree_order(g);
    let mut rank = vec![0usize; n];
    for (i, &v) in order.iter().enumerate() {
        rank[v] = i;
    }
    let parent = (0..n)
        .map(|v| {
            frontier[v]
                .iter()
                .copied()
                .min_by_key(|&u| rank[u])
                .unwrap_or(v)
        })
        .collect();
    HierarchyTree::from_parents(parent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::validate_hierarchy;

    #[test]
    fn path_of_three() {
        let g = Graph::from_unweighted(3, &[(0, 1), (1, 2)]).unwrap();
        let (order, _) = min_degree_order(&g);
        assert_eq!(order, vec![0, 1, 2]);
        let t = build_min_degree_hierarchy(&g).unwrap();
        assert_eq!(t.parents(), &[1, 2, 2]);
        assert_eq!((t.root(), t.height()), (2, 3));
    }

    #[test]
    fn triangle_is_a_chain() {
        let g = Graph::from_unweighted(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let t = build_min_degree_hierarchy(&g).unwrap();
        assert_eq!(t.height(), 3);
        assert!(validate_hierarchy(&g, &t).is_empty());
    }

    #[test]
    fn single_vertex() {
        let g = Graph::from_unweighted(1, &[]).unwrap();
        let t = build_min_degree_hierarchy(&g).unwrap();
        assert_eq!((t.root(), t.height()), (0, 1));
    }

    #[test]
    fn fill_keeps_cycle_valid() {
        let edges: Vec<_> = (0..6).map(|i| (i, (i + 1) % 6)).collect();
        let g = Graph::from_unweighted(6, &edges).unwrap();
        let t = build_min_degree_hierarchy(&g).unwrap();
        assert!(validate_hierarchy(&g, &t).is_empty());
    }
}
