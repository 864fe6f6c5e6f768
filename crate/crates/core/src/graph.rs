//! Undirected weighted graphs with dense internal ids.
//!
//! A [`Graph`] is immutable once constructed. Adjacency is stored in CSR form
//! with each neighbor list sorted by internal id, and every vertex keeps the
//! external label it was loaded with so results can be reported in the
//! caller's vocabulary.

use std::collections::hash_map::Entry;
use std::collections::{HashMap, VecDeque};
use std::io::BufRead;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: self-loop on vertex {label}")]
    SelfLoop { line: usize, label: String },
    #[error("edge ({u}, {w}) listed with conflicting weights {first} and {second}")]
    ConflictingWeights {
        u: String,
        w: String,
        first: f64,
        second: f64,
    },
    #[error("graph is disconnected: {a} and {b} lie in different components")]
    Disconnected { a: String, b: String },
    #[error("graph has no vertices")]
    Empty,
    #[error("vertex id {id} out of range for a graph with {n} vertices")]
    OutOfRange { id: usize, n: usize },
    #[error("edge ({u}, {w}) has invalid weight {weight}; weights must be finite and positive")]
    InvalidWeight { u: String, w: String, weight: f64 },
    #[error("dimacs header declares {declared} {what} but {found} were found")]
    HeaderMismatch {
        what: &'static str,
        declared: usize,
        found: usize,
    },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Input encodings accepted by [`load_edge_list`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EdgeListFormat {
    /// `u w [weight]` per line, `#` or `%` comments.
    #[default]
    Plain,
    /// DIMACS shortest-path format (`p sp n m`, `a u w weight`).
    DimacsGr,
}

impl FromStr for EdgeListFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "plain" => Ok(Self::Plain),
            "dimacs" | "dimacs-gr" | "gr" => Ok(Self::DimacsGr),
            other => Err(format!("unknown graph format '{other}' (expected plain or dimacs)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<f64>,
    degrees: Vec<f64>,
    labels: Vec<String>,
    label_index: HashMap<String, usize>,
}

impl Graph {
    /// Builds a graph on vertices `0..n` labelled by their decimal ids.
    ///
    /// Duplicate edges are collapsed when their weights agree. Connectivity is
    /// not required here; see [`Graph::require_connected`].
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self, GraphError> {
        let labels = (0..n).map(|v| v.to_string()).collect();
        Self::from_labelled_edges(labels, edges)
    }

    /// Unit-weight convenience wrapper around [`Graph::from_edges`].
    pub fn from_unweighted(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let weighted: Vec<_> = edges.iter().map(|&(u, w)| (u, w, 1.0)).collect();
        Self::from_edges(n, &weighted)
    }

    pub fn from_labelled_edges(
        labels: Vec<String>,
        edges: &[(usize, usize, f64)],
    ) -> Result<Self, GraphError> {
        let n = labels.len();
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut seen: HashMap<(usize, usize), f64> = HashMap::with_capacity(edges.len());
        let mut unique = Vec::with_capacity(edges.len());
        for (line, &(u, w, weight)) in edges.iter().enumerate() {
            for id in [u, w] {
                if id >= n {
                    return Err(GraphError::OutOfRange { id, n });
                }
            }
            if u == w {
                return Err(GraphError::SelfLoop {
                    line: line + 1,
                    label: labels[u].clone(),
                });
            }
            if !(weight.is_finite() && weight > 0.0) {
                return Err(GraphError::InvalidWeight {
                    u: labels[u].clone(),
                    w: labels[w].clone(),
                    weight,
                });
            }
            let key = (u.min(w), u.max(w));
            match seen.entry(key) {
                Entry::Occupied(e) => {
                    if *e.get() != weight {
                        return Err(GraphError::ConflictingWeights {
                            u: labels[key.0].clone(),
                            w: labels[key.1].clone(),
                            first: *e.get(),
                            second: weight,
                        });
                    }
                }
                Entry::Vacant(e) => {
                    e.insert(weight);
                    unique.push((key.0, key.1, weight));
                }
            }
        }

        let mut counts = vec![0usize; n];
        for &(u, w, _) in &unique {
            counts[u] += 1;
            counts[w] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for c in &counts {
            offsets.push(offsets.last().unwrap() + c);
        }
        let mut fill = offsets[..n].to_vec();
        let mut targets = vec![0usize; offsets[n]];
        let mut weights = vec![0f64; offsets[n]];
        for &(u, w, weight) in &unique {
            targets[fill[u]] = w;
            weights[fill[u]] = weight;
            fill[u] += 1;
            targets[fill[w]] = u;
            weights[fill[w]] = weight;
            fill[w] += 1;
        }
        for v in 0..n {
            let range = offsets[v]..offsets[v + 1];
            let mut pairs: Vec<_> = targets[range.clone()]
                .iter()
                .copied()
                .zip(weights[range.clone()].iter().copied())
                .collect();
            pairs.sort_unstable_by_key(|p| p.0);
            for (slot, (t, wt)) in range.zip(pairs) {
                targets[slot] = t;
                weights[slot] = wt;
            }
        }
        let degrees = (0..n)
            .map(|v| weights[offsets[v]..offsets[v + 1]].iter().sum())
            .collect();
        let label_index = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i))
            .collect();
        Ok(Self {
            offsets,
            targets,
            weights,
            degrees,
            labels,
            label_index,
        })
    }

    pub fn n(&self) -> usize {
        self.degrees.len()
    }

    /// Number of undirected edges.
    pub fn m(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn degree(&self, v: usize) -> f64 {
        self.degrees[v]
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    /// Neighbor ids of `v`, ascending.
    pub fn neighbor_ids(&self, v: usize) -> &[usize] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Weights aligned with [`Graph::neighbor_ids`].
    pub fn neighbor_weights(&self, v: usize) -> &[f64] {
        &self.weights[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Iterator over `(neighbor, weight)` pairs sorted by neighbor id.
    pub fn adjacent(&self, v: usize) -> impl ExactSizeIterator<Item = (usize, f64)> + '_ {
        self.neighbor_ids(v)
            .iter()
            .copied()
            .zip(self.neighbor_weights(v).iter().copied())
    }

    /// Checked neighbor lookup.
    pub fn neighbors(&self, v: usize) -> Result<Vec<(usize, f64)>, GraphError> {
        if v >= self.n() {
            return Err(GraphError::OutOfRange { id: v, n: self.n() });
        }
        Ok(self.adjacent(v).collect())
    }

    /// Weight of edge `(u, w)`, or `None` when absent.
    pub fn weight(&self, u: usize, w: usize) -> Option<f64> {
        let ids = self.neighbor_ids(u);
        ids.binary_search(&w)
            .ok()
            .map(|i| self.neighbor_weights(u)[i])
    }

    /// Each undirected edge once, as `(u, w, weight)` with `u < w`, in
    /// lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n()).flat_map(move |u| {
            self.adjacent(u)
                .filter(move |&(w, _)| w > u)
                .map(move |(w, wt)| (u, w, wt))
        })
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn id_of(&self, label: &str) -> Option<usize> {
        self.label_index.get(label).copied()
    }

    pub fn is_connected(&self) -> bool {
        self.first_unreached().is_none()
    }

    /// Errors with a witness pair when the graph has more than one component.
    pub fn require_connected(&self) -> Result<(), GraphError> {
        match self.first_unreached() {
            None => Ok(()),
            Some(v) => Err(GraphError::Disconnected {
                a: self.labels[0].clone(),
                b: self.labels[v].clone(),
            }),
        }
    }

    fn first_unreached(&self) -> Option<usize> {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &w in self.neighbor_ids(v) {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen.iter().position(|s| !s)
    }
}

/// Parses an edge list and returns a connected graph.
///
/// Internal ids follow first appearance in the stream.
pub fn load_edge_list<R: BufRead>(source: R, format: EdgeListFormat) -> Result<Graph, GraphError> {
    let graph = match format {
        EdgeListFormat::Plain => parse_plain(source)?,
        EdgeListFormat::DimacsGr => parse_dimacs(source)?,
    };
    graph.require_connected()?;
    Ok(graph)
}

#[derive(Default)]
struct Interner {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl Interner {
    fn intern(&mut self, label: String) -> usize {
        match self.index.entry(label) {
            Entry::Occupied(e) => *e.get(),
            Entry::Vacant(e) => {
                let id = self.labels.len();
                self.labels.push(e.key().clone());
                e.insert(id);
                id
            }
        }
    }
}

fn parse_label(token: &str, line: usize) -> Result<String, GraphError> {
    token
        .parse::<u64>()
        .map(|v| v.to_string())
        .map_err(|_| GraphError::Parse {
            line,
            message: format!("expected a nonnegative integer vertex label, found '{token}'"),
        })
}

fn parse_weight(token: &str, line: usize) -> Result<f64, GraphError> {
    token.parse::<f64>().map_err(|_| GraphError::Parse {
        line,
        message: format!("expected a decimal weight, found '{token}'"),
    })
}

/// Self-loops are reported with their source line, so they are rejected here
/// rather than in the graph constructor.
fn push_edge(
    interner: &mut Interner,
    edges: &mut Vec<(usize, usize, f64)>,
    u: String,
    w: String,
    weight: f64,
    line: usize,
) -> Result<(), GraphError> {
    if u == w {
        return Err(GraphError::SelfLoop { line, label: u });
    }
    let ui = interner.intern(u);
    let wi = interner.intern(w);
    edges.push((ui, wi, weight));
    Ok(())
}

fn parse_plain<R: BufRead>(source: R) -> Result<Graph, GraphError> {
    let mut interner = Interner::default();
    let mut edges = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with('%') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        let weight = match tokens.len() {
            2 => 1.0,
            3 => parse_weight(tokens[2], line_no)?,
            k => {
                return Err(GraphError::Parse {
                    line: line_no,
                    message: format!("expected 2 or 3 fields, found {k}"),
                })
            }
        };
        let u = parse_label(tokens[0], line_no)?;
        let w = parse_label(tokens[1], line_no)?;
        push_edge(&mut interner, &mut edges, u, w, weight, line_no)?;
    }
    Graph::from_labelled_edges(interner.labels, &edges)
}

fn parse_dimacs<R: BufRead>(source: R) -> Result<Graph, GraphError> {
    let mut interner = Interner::default();
    let mut edges = Vec::new();
    let mut header: Option<(usize, usize)> = None;
    let mut arcs = 0usize;
    for (i, line) in source.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        match tokens[0] {
            "c" => continue,
            "p" => {
                if header.is_some() {
                    return Err(GraphError::Parse {
                        line: line_no,
                        message: "duplicate problem line".into(),
                    });
                }
                if tokens.len() != 4 || tokens[1] != "sp" {
                    return Err(GraphError::Parse {
                        line: line_no,
                        message: "expected 'p sp <n> <m>'".into(),
                    });
                }
                let parse = |t: &str| {
                    t.parse::<usize>().map_err(|_| GraphError::Parse {
                        line: line_no,
                        message: format!("invalid count '{t}' in problem line"),
                    })
                };
                header = Some((parse(tokens[2])?, parse(tokens[3])?));
            }
            "a" => {
                let Some((n, _)) = header else {
                    return Err(GraphError::Parse {
                        line: line_no,
                        message: "arc before problem line".into(),
                    });
                };
                if tokens.len() != 4 {
                    return Err(GraphError::Parse {
                        line: line_no,
                        message: "expected 'a <u> <w> <weight>'".into(),
                    });
                }
                let u = parse_label(tokens[1], line_no)?;
                let w = parse_label(tokens[2], line_no)?;
                for label in [&u, &w] {
                    let id: u64 = label.parse().unwrap_or(0);
                    if id == 0 || id > n as u64 {
                        return Err(GraphError::Parse {
                            line: line_no,
                            message: format!("vertex {label} outside 1..={n}"),
                        });
                    }
                }
                let weight = parse_weight(tokens[3], line_no)?;
                push_edge(&mut interner, &mut edges, u, w, weight, line_no)?;
                arcs += 1;
            }
            other => {
                return Err(GraphError::Parse {
                    line: line_no,
                    message: format!("unknown line type '{other}'"),
                })
            }
        }
    }
    let Some((n, m)) = header else {
        return Err(GraphError::Empty);
    };
    if arcs != m {
        return Err(GraphError::HeaderMismatch {
            what: "arcs",
            declared: m,
            found: arcs,
        });
    }
    // Declared vertices that never appear in an arc are isolated.
    if interner.labels.len() < n {
        let missing = (1..=n)
            .map(|v| v.to_string())
            .find(|l| !interner.index.contains_key(l))
            .expect("fewer labels than declared vertices");
        if interner.labels.is_empty() {
            return Err(GraphError::Empty);
        }
        return Err(GraphError::Disconnected {
            a: interner.labels[0].clone(),
            b: missing,
        });
    }
    Graph::from_labelled_edges(interner.labels, &edges)
}
