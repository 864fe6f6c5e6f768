use std::collections::VecDeque;

use super::{HierarchyError, HierarchyTree};
use crate::graph::Graph;

/// Induced subgraph handed to a [`SeparatorProvider`].
///
/// Vertices are addressed by local ids `0..len()`; local order follows
/// ascending global id, so the lowest local id is also the lowest global id.
#[derive(Debug, Clone)]
pub struct Subgraph {
    vertices: Vec<usize>,
    adj: Vec<Vec<usize>>,
}

impl Subgraph {
    pub fn from_graph(g: &Graph) -> Self {
        Self {
            vertices: (0..g.n()).collect(),
            adj: (0..g.n()).map(|v| g.neighbor_ids(v).to_vec()).collect(),
        }
    }

    /// Builds a subgraph from global ids and local adjacency lists directly.
    pub fn from_parts(vertices: Vec<usize>, adj: Vec<Vec<usize>>) -> Self {
        Self { vertices, adj }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Global id of local vertex `i`.
    pub fn global(&self, i: usize) -> usize {
        self.vertices[i]
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    /// Local neighbors of local vertex `i`, ascending.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    /// Connected components after deleting `removed` (local ids), each as an
    /// induced subgraph. Components are ordered by their smallest vertex.
    fn split(&self, removed: &[usize]) -> Vec<Subgraph> {
        let n = self.len();
        const NONE: usize = usize::MAX;
        let mut comp = vec![NONE; n];
        let mut blocked = vec![false; n];
        for &r in removed {
            blocked[r] = true;
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for start in 0..n {
            if blocked[start] || comp[start] != NONE {
                continue;
            }
            let id = groups.len();
            let mut members = vec![start];
            comp[start] = id;
            let mut head = 0;
            while head < members.len() {
                let v = members[head];
                head += 1;
                for &w in &self.adj[v] {
                    if !blocked[w] && comp[w] == NONE {
                        comp[w] = id;
                        members.push(w);
                    }
                }
            }
            members.sort_unstable();
            groups.push(members);
        }
        let mut local = vec![0usize; n];
        groups
            .into_iter()
            .map(|members| {
                for (i, &v) in members.iter().enumerate() {
                    local[v] = i;
                }
                let id = comp[members[0]];
                let adj = members
                    .iter()
                    .map(|&v| {
                        self.adj[v]
                            .iter()
                            .filter(|&&w| comp[w] == id)
                            .map(|&w| local[w])
                            .collect()
                    })
                    .collect();
                Subgraph {
                    vertices: members.iter().map(|&v| self.vertices[v]).collect(),
                    adj,
                }
            })
            .collect()
    }

    fn min_degree_vertex(&self) -> usize {
        (0..self.len())
            .min_by_key(|&i| (self.adj[i].len(), i))
            .unwrap_or(0)
    }
}

/// Supplies vertex cuts for the recursive hierarchy builder.
pub trait SeparatorProvider {
    /// Returns local ids of a nonempty proper subset of `sub` whose removal
    /// disconnects it (or at least shrinks it). `sub` is connected and has at
    /// least two vertices.
    fn separator(&self, sub: &Subgraph) -> Vec<usize>;
}

impl<F> SeparatorProvider for F
where
    F: Fn(&Subgraph) -> Vec<usize>,
{
    fn separator(&self, sub: &Subgraph) -> Vec<usize> {
        self(sub)
    }
}

/// Default provider: level-structure bisection, see [`bfs_bisection_separator`].
#[derive(Debug, Clone, Copy, Default)]
pub struct BfsBisection;

impl SeparatorProvider for BfsBisection {
    fn separator(&self, sub: &Subgraph) -> Vec<usize> {
        bfs_bisection_separator(sub)
    }
}

fn bfs_levels(sub: &Subgraph, source: usize) -> Vec<usize> {
    let mut level = vec![usize::MAX; sub.len()];
    level[source] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        for &w in sub.neighbors(v) {
            if level[w] == usize::MAX {
                level[w] = level[v] + 1;
                queue.push_back(w);
            }
        }
    }
    level
}

fn farthest(level: &[usize]) -> usize {
    // Smallest id among the vertices at maximum distance.
    let max = level.iter().copied().max().unwrap_or(0);
    level.iter().position(|&l| l == max).unwrap_or(0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct CandidateKey {
    size: usize,
    larger_side: usize,
    boundary: usize,
    upper: bool,
}

/// Fallback ordering when no cover is balanced: most balanced first.
type BalanceKey = (usize, usize, usize, bool);

/// Level-structure separator for a connected subgraph.
///
/// Roots a BFS at a pseudo-peripheral vertex (the end of two BFS sweeps from
/// the lowest vertex). For every boundary between consecutive levels `b` and
/// `b + 1` there are two vertex covers of the crossing edges: the endpoints in
/// level `b` and the endpoints in level `b + 1`. Among covers leaving both
/// sides nonempty and neither side above `⌈2n/3⌉`, the smallest cover wins;
/// without a balanced cover the most balanced one wins. Graphs of diameter one
/// have no such cover and yield their lowest vertex.
pub fn bfs_bisection_separator(sub: &Subgraph) -> Vec<usize> {
    let n = sub.len();
    if n < 2 {
        return Vec::new();
    }
    let a = farthest(&bfs_levels(sub, 0));
    let b = farthest(&bfs_levels(sub, a));
    let level = bfs_levels(sub, b);
    let max_level = level.iter().copied().max().unwrap_or(0);
    if max_level < 1 {
        return vec![0];
    }

    let mut per_level = vec![0usize; max_level + 1];
    for &l in &level {
        per_level[l] += 1;
    }
    // Level-b endpoints of edges into b+1, and level-(b+1) endpoints of edges back to b.
    let mut lower: Vec<Vec<usize>> = vec![Vec::new(); max_level];
    let mut upper: Vec<Vec<usize>> = vec![Vec::new(); max_level];
    for v in 0..n {
        let l = level[v];
        let nbrs = sub.neighbors(v);
        if l < max_level && nbrs.iter().any(|&w| level[w] == l + 1) {
            lower[l].push(v);
        }
        if l > 0 && nbrs.iter().any(|&w| level[w] == l - 1) {
            upper[l - 1].push(v);
        }
    }

    let limit = (2 * n).div_ceil(3);
    let mut best_balanced: Option<(CandidateKey, &Vec<usize>)> = None;
    let mut best_any: Option<(BalanceKey, &Vec<usize>)> = None;
    let mut up_to = 0usize;
    for boundary in 0..max_level {
        up_to += per_level[boundary];
        for (is_upper, cover) in [(false, &lower[boundary]), (true, &upper[boundary])] {
            let (before, after) = if is_upper {
                (up_to, n - up_to - cover.len())
            } else {
                (up_to - cover.len(), n - up_to)
            };
            if before == 0 || after == 0 {
                continue;
            }
            let larger = before.max(after);
            let key = CandidateKey {
                size: cover.len(),
                larger_side: larger,
                boundary,
                upper: is_upper,
            };
            if larger <= limit && best_balanced.as_ref().is_none_or(|(k, _)| key < *k) {
                best_balanced = Some((key, cover));
            }
            let any_key = (larger, cover.len(), boundary, is_upper);
            if best_any.as_ref().is_none_or(|(k, _)| any_key < *k) {
                best_any = Some((any_key, cover));
            }
        }
    }
    let mut chosen = match (best_balanced, best_any) {
        (Some((_, c)), _) => c.clone(),
        (None, Some((_, c))) => c.clone(),
        (None, None) => vec![0],
    };
    chosen.sort_unstable();
    chosen
}

fn sanitize(cut: Vec<usize>, sub: &Subgraph) -> Option<Vec<usize>> {
    let n = sub.len();
    let mut cut = cut;
    cut.sort_unstable();
    cut.dedup();
    if cut.is_empty() || cut.len() >= n || cut.iter().any(|&c| c >= n) {
        return None;
    }
    Some(cut)
}

/// Recursive vertex-cut hierarchy.
///
/// Each cut becomes a downward chain in ascending id order, and every
/// component left after removing the cut hangs below the chain's bottom
/// vertex. A provider answer that is empty or not a proper subset is replaced
/// by the subgraph's minimum-degree vertex.
pub fn build_separator_hierarchy(
    g: &Graph,
    provider: &dyn SeparatorProvider,
) -> Result<HierarchyTree, HierarchyError> {
    g.require_connected()?;
    let n = g.n();
    let mut parent = vec![usize::MAX; n];
    let mut stack: Vec<(Subgraph, Option<usize>)> = vec![(Subgraph::from_graph(g), None)];
    let mut rounds = 0usize;
    while let Some((sub, above)) = stack.pop() {
        rounds += 1;
        if rounds > n {
            return Err(HierarchyError::DepthExceeded(n));
        }
        let attach = |v: usize, parent: &mut Vec<usize>| {
            parent[v] = above.unwrap_or(v);
        };
        if sub.len() == 1 {
            attach(sub.global(0), &mut parent);
            continue;
        }
        let cut = sanitize(provider.separator(&sub), &sub)
            .unwrap_or_else(|| vec![sub.min_degree_vertex()]);
        let mut bottom = above;
        for &c in &cut {
            let v = sub.global(c);
            parent[v] = bottom.unwrap_or(v);
            bottom = Some(v);
        }
        for part in sub.split(&cut).into_iter().rev() {
            stack.push((part, bottom));
        }
    }
    HierarchyTree::from_parents(parent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::validate_hierarchy;

    fn sub(g: &Graph) -> Subgraph {
        Subgraph::from_graph(g)
    }

    #[test]
    fn bisection_examples() {
        let p3 = Graph::from_unweighted(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(bfs_bisection_separator(&sub(&p3)), vec![1]);
        let star = Graph::from_unweighted(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        assert_eq!(bfs_bisection_separator(&sub(&star)), vec![0]);
        let star = Graph::from_unweighted(5, &[(3, 0), (3, 1), (3, 2), (3, 4)]).unwrap();
        assert_eq!(bfs_bisection_separator(&sub(&star)), vec![3]);
        let k2 = Graph::from_unweighted(2, &[(0, 1)]).unwrap();
        assert_eq!(bfs_bisection_separator(&sub(&k2)), vec![0]);
    }

    #[test]
    fn hierarchy_from_fixed_cuts() {
        let p3 = Graph::from_unweighted(3, &[(0, 1), (1, 2)]).unwrap();
        let t = build_separator_hierarchy(&p3, &|_: &Subgraph| vec![1]).unwrap();
        assert_eq!(t.root(), 1);
        assert_eq!(t.children(1), &[0, 2]);
        assert_eq!(t.height(), 2);

        let c4 = Graph::from_unweighted(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let t = build_separator_hierarchy(&c4, &|s: &Subgraph| {
            if s.len() == 4 {
                vec![2, 0]
            } else {
                vec![0]
            }
        })
        .unwrap();
        assert_eq!(t.root(), 0);
        assert_eq!(t.children(0), &[2]);
        assert_eq!(t.children(2), &[1, 3]);
        assert_eq!(t.height(), 3);
    }

    #[test]
    fn single_vertex() {
        let g = Graph::from_unweighted(1, &[]).unwrap();
        let t = build_separator_hierarchy(&g, &BfsBisection).unwrap();
        assert_eq!((t.root(), t.height()), (0, 1));
    }

    #[test]
    fn improper_cut_falls_back_to_min_degree() {
        let g = Graph::from_unweighted(4, &[(0, 1), (1, 2), (2, 3), (1, 3)]).unwrap();
        let everything = |s: &Subgraph| (0..s.len()).collect::<Vec<_>>();
        let t = build_separator_hierarchy(&g, &everything).unwrap();
        assert!(validate_hierarchy(&g, &t).is_empty());
        // Vertex 0 has the minimum degree and becomes the root.
        assert_eq!(t.root(), 0);
        let empty = |_: &Subgraph| Vec::new();
        let t = build_separator_hierarchy(&g, &empty).unwrap();
        assert!(validate_hierarchy(&g, &t).is_empty());
    }

    #[test]
    fn disconnected_rejected() {
        let g = Graph::from_unweighted(4, &[(0, 1), (2, 3)]).unwrap();
        assert!(build_separator_hierarchy(&g, &BfsBisection).is_err());
    }
}
