//! Undirected simple graphs: the substrate of every MkCS instance.
//!
//! Vertices are 0-based inside the library and 1-based in the DIMACS-style
//! text format handled by [`read_graph`] and [`write_graph`].

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("line {line}: malformed line {content:?}")]
    MalformedLine { line: usize, content: String },
    #[error("line {line}: vertex {vertex} out of range 1..={n}")]
    VertexOutOfRange { line: usize, vertex: usize, n: usize },
    #[error("line {line}: duplicate edge ({i}, {j})")]
    DuplicateEdge { line: usize, i: usize, j: usize },
    #[error("line {line}: self-loop on vertex {vertex}")]
    SelfLoop { line: usize, vertex: usize },
    #[error("missing `p edge <n> <m>` header")]
    MissingHeader,
    #[error("duplicate `p` header on line {line}")]
    DuplicateHeader { line: usize },
    #[error("header declares {declared} edges but {found} were listed")]
    EdgeCountMismatch { declared: usize, found: usize },
    #[error("edge probability {0} is not in [0, 1]")]
    InvalidProbability(f64),
}

/// An undirected simple graph on vertices `0..n`.
///
/// Edges are stored as `(i, j)` with `i < j`, sorted lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph from 0-based edges. Orientation of each pair is ignored.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, GraphError> {
        let mut set = BTreeSet::new();
        for (idx, (a, b)) in edges.into_iter().enumerate() {
            let line = idx + 1;
            if a == b {
                return Err(GraphError::SelfLoop { line, vertex: a + 1 });
            }
            for v in [a, b] {
                if v >= n {
                    return Err(GraphError::VertexOutOfRange { line, vertex: v + 1, n });
                }
            }
            let e = (a.min(b), a.max(b));
            if !set.insert(e) {
                return Err(GraphError::DuplicateEdge { line, i: e.0 + 1, j: e.1 + 1 });
            }
        }
        Ok(Self::from_sorted(n, set.into_iter().collect()))
    }

    fn from_sorted(n: usize, edges: Vec<(usize, usize)>) -> Self {
        let mut adjacency = vec![Vec::new(); n];
        for &(i, j) in &edges {
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Self { n, edges, adjacency }
    }

    pub fn empty(n: usize) -> Self {
        Self::from_sorted(n, Vec::new())
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        Self::from_sorted(n, edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Neighbors of `v` in ascending order.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edge_index(i, j).is_some()
    }

    /// Position of the edge `{i, j}` in [`Graph::edges`].
    pub fn edge_index(&self, i: usize, j: usize) -> Option<usize> {
        let key = (i.min(j), i.max(j));
        self.edges.binary_search(&key).ok()
    }
}

/// An edge probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Probability(f64);

impl Probability {
    pub fn new(p: f64) -> Result<Self, GraphError> {
        if (0.0..=1.0).contains(&p) {
            Ok(Self(p))
        } else {
            Err(GraphError::InvalidProbability(p))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Samples an Erdős–Rényi graph G(n, p).
///
/// The stream is ChaCha8 seeded through `SeedableRng::seed_from_u64(seed)`.
/// Candidate edges are visited in lexicographic order and each consumes one
/// `u64`; its top 53 bits form a uniform `u` in `[0, 1)` and the edge is kept
/// iff `u < p`.
pub fn er_generate(n: usize, p: Probability, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
            if u < p.get() {
                edges.push((i, j));
            }
        }
    }
    Graph::from_sorted(n, edges)
}

/// The clique K_{k+1}, on which any sub-unit edge penalty overshoots α_k.
pub fn clique_counterexample(k: usize) -> Graph {
    Graph::complete(k + 1)
}

/// K_{k+1} plus a pendant vertex attached to its last vertex; the witness
/// that a sub-unit multi-color penalty overshoots α_k.
pub fn pendant_counterexample(k: usize) -> Graph {
    let mut edges: Vec<_> = Graph::complete(k + 1).edges().to_vec();
    edges.push((k, k + 1));
    Graph::from_sorted(k + 2, edges)
}

/// Parses the DIMACS-style edge list: `p edge <n> <m>`, then `e <i> <j>` lines
/// with 1-based vertices. Lines starting with `c` and blank lines are ignored.
pub fn read_graph(text: &str) -> Result<Graph, GraphError> {
    let mut header: Option<(usize, usize)> = None;
    let mut seen = BTreeSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        let malformed = || GraphError::MalformedLine { line, content: raw.to_string() };
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        match tokens.as_slice() {
            ["p", "edge", n, m] => {
                if header.is_some() {
                    return Err(GraphError::DuplicateHeader { line });
                }
                let n = n.parse().map_err(|_| malformed())?;
                let m = m.parse().map_err(|_| malformed())?;
                header = Some((n, m));
            }
            ["e", a, b] => {
                let (n, _) = header.ok_or(GraphError::MissingHeader)?;
                let a: usize = a.parse().map_err(|_| malformed())?;
                let b: usize = b.parse().map_err(|_| malformed())?;
                if a == b {
                    return Err(GraphError::SelfLoop { line, vertex: a });
                }
                for v in [a, b] {
                    if v == 0 || v > n {
                        return Err(GraphError::VertexOutOfRange { line, vertex: v, n });
                    }
                }
                let e = (a.min(b) - 1, a.max(b) - 1);
                if !seen.insert(e) {
                    return Err(GraphError::DuplicateEdge { line, i: e.0 + 1, j: e.1 + 1 });
                }
            }
            _ => return Err(malformed()),
        }
    }
    let (n, m) = header.ok_or(GraphError::MissingHeader)?;
    if seen.len() != m {
        return Err(GraphError::EdgeCountMismatch { declared: m, found: seen.len() });
    }
    Ok(Graph::from_sorted(n, seen.into_iter().collect()))
}

pub fn write_graph(g: &Graph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "p edge {} {}", g.n(), g.num_edges());
    for &(i, j) in g.edges() {
        let _ = writeln!(out, "e {} {}", i + 1, j + 1);
    }
    out
}

/// One representative of every isomorphism class of graphs on `n` vertices.
///
/// Exhaustive over all labeled graphs, so only sensible for `n <= 6`.
pub fn nonisomorphic_graphs(n: usize) -> Vec<Graph> {
    assert!(n <= 6, "exhaustive isomorphism classes only for n <= 6");
    let pairs: Vec<(usize, usize)> = Graph::complete(n).edges().to_vec();
    let perms = permutations(n);
    let mut seen = BTreeSet::new();
    let mut reps = Vec::new();
    for mask in 0u32..(1u32 << pairs.len()) {
        let canonical = perms
            .iter()
            .map(|perm| {
                let mut relabeled = 0u32;
                for (bit, &(i, j)) in pairs.iter().enumerate() {
                    if mask >> bit & 1 == 1 {
                        let (a, b) = (perm[i].min(perm[j]), perm[i].max(perm[j]));
                        let pos = pairs.binary_search(&(a, b)).expect("pair exists");
                        relabeled |= 1 << pos;
                    }
                }
                relabeled
            })
            .min()
            .unwrap_or(0);
        if seen.insert(canonical) {
            let edges = pairs
                .iter()
                .enumerate()
                .filter(|(bit, _)| canonical >> bit & 1 == 1)
                .map(|(_, &e)| e)
                .collect();
            reps.push(Graph::from_sorted(n, edges));
        }
    }
    reps
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(current: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if current.len() == used.len() {
            out.push(current.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                current.push(v);
                rec(current, used, out);
                current.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}
