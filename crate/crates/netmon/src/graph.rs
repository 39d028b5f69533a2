//! Network snapshots and graph-level statistics.
//!
//! A [`Graph`] is one observation of the dynamic network: a symmetric
//! matrix of non-negative integer edge counts with a zero diagonal.
//! All path, clustering and centrality statistics are computed on the
//! binarized simple graph (an edge is present iff its count is positive);
//! the generative model's Poisson means are small, so counts are almost
//! always 0 or 1, and the classical definitions of these statistics
//! assume a simple graph.

use thiserror::Error;

mod stats;

pub use stats::{summary_statistic, summary_vector, StatisticKind, SummaryVector};

/// Sentinel distance for disconnected node pairs.
const UNREACHABLE: u32 = u32::MAX;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("adjacency matrix is not square: {rows} rows, {cols} cols")]
    NotSquare { rows: usize, cols: usize },
    #[error("adjacency matrix is not symmetric at ({i},{j})")]
    NotSymmetric { i: usize, j: usize },
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("node index {index} out of range for {n} nodes")]
    NodeOutOfRange { index: usize, n: usize },
}

/// One snapshot of the network: a symmetric non-negative integer
/// adjacency matrix with zero diagonal (self-loops are not allowed).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adj: Vec<u32>,
}

impl Graph {
    /// An edgeless graph on `n` nodes.
    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            adj: vec![0; n * n],
        }
    }

    /// Build from a dense matrix, validating symmetry and the zero diagonal.
    pub fn from_matrix(rows: Vec<Vec<u32>>) -> Result<Self, GraphError> {
        let n = rows.len();
        for r in &rows {
            if r.len() != n {
                return Err(GraphError::NotSquare {
                    rows: n,
                    cols: r.len(),
                });
            }
        }
        for i in 0..n {
            if rows[i][i] != 0 {
                return Err(GraphError::SelfLoop(i));
            }
            for j in (i + 1)..n {
                if rows[i][j] != rows[j][i] {
                    return Err(GraphError::NotSymmetric { i, j });
                }
            }
        }
        let mut g = Graph::empty(n);
        for (i, r) in rows.iter().enumerate() {
            for (j, &w) in r.iter().enumerate() {
                g.adj[i * n + j] = w;
            }
        }
        Ok(g)
    }

    /// Build an unweighted graph from an edge list (test and example helper).
    /// Repeated edges accumulate as counts.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut g = Graph::empty(n);
        for &(i, j) in edges {
            if i >= n {
                return Err(GraphError::NodeOutOfRange { index: i, n });
            }
            if j >= n {
                return Err(GraphError::NodeOutOfRange { index: j, n });
            }
            if i == j {
                return Err(GraphError::SelfLoop(i));
            }
            g.adj[i * n + j] += 1;
            g.adj[j * n + i] += 1;
        }
        Ok(g)
    }

    /// Number of nodes.
    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Edge count between `i` and `j` (zero on the diagonal).
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.adj[i * self.n + j]
    }

    /// Set the symmetric pair (`i`,`j`) and (`j`,`i`). Panics on the diagonal.
    #[inline]
    pub(crate) fn set_pair(&mut self, i: usize, j: usize, w: u32) {
        assert_ne!(i, j, "self-loops are not allowed");
        self.adj[i * self.n + j] = w;
        self.adj[j * self.n + i] = w;
    }

    /// Weighted degree of `v`: the sum of edge counts incident to it.
    pub fn weighted_degree(&self, v: usize) -> u64 {
        self.row(v).iter().map(|&w| w as u64).sum()
    }

    /// Degree of `v` on the binarized graph.
    pub fn binary_degree(&self, v: usize) -> usize {
        self.row(v).iter().filter(|&&w| w > 0).count()
    }

    #[inline]
    pub(crate) fn row(&self, v: usize) -> &[u32] {
        &self.adj[v * self.n..(v + 1) * self.n]
    }

    /// Binarized edge list (unordered pairs i < j with positive count).
    pub fn binary_edges(&self) -> Vec<(usize, usize)> {
        let mut edges = Vec::new();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if self.get(i, j) > 0 {
                    edges.push((i, j));
                }
            }
        }
        edges
    }

    /// Total edge count of the binarized graph.
    pub fn binary_edge_count(&self) -> usize {
        (0..self.n)
            .map(|i| ((i + 1)..self.n).filter(|&j| self.get(i, j) > 0).count())
            .sum()
    }
}

/// Threshold all positive counts to 1. Idempotent; preserves symmetry
/// and the zero diagonal.
pub fn binarize(g: &Graph) -> Graph {
    let mut out = Graph::empty(g.n);
    for (dst, &src) in out.adj.iter_mut().zip(&g.adj) {
        *dst = u32::from(src > 0);
    }
    out
}

/// Geodesic distances on the binarized graph, from BFS out of every node.
/// Disconnected pairs are recorded as unreachable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    dist: Vec<u32>,
}

impl DistanceMatrix {
    /// Number of nodes.
    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Geodesic distance, or `None` when `j` is unreachable from `i`.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Option<u32> {
        let d = self.dist[i * self.n + j];
        (d != UNREACHABLE).then_some(d)
    }
}

/// Neighbor lists of the binarized graph.
pub(crate) fn neighbor_lists(g: &Graph) -> Vec<Vec<usize>> {
    (0..g.node_count())
        .map(|v| {
            g.row(v)
                .iter()
                .enumerate()
                .filter(|(_, &w)| w > 0)
                .map(|(u, _)| u)
                .collect()
        })
        .collect()
}

/// Exact unweighted shortest-path lengths on `binarize(g)`.
pub fn geodesic_distances(g: &Graph) -> DistanceMatrix {
    let n = g.node_count();
    let neighbors = neighbor_lists(g);
    let mut dist = vec![UNREACHABLE; n * n];
    let mut queue = std::collections::VecDeque::new();
    for s in 0..n {
        let row = &mut dist[s * n..(s + 1) * n];
        row[s] = 0;
        queue.clear();
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            let dv = row[v];
            for &u in &neighbors[v] {
                if row[u] == UNREACHABLE {
                    row[u] = dv + 1;
                    queue.push_back(u);
                }
            }
        }
    }
    DistanceMatrix { n, dist }
}

/// Edge count of the binarized subgraph induced by the nodes at geodesic
/// distance at most `k` from `v`. For `k = 0` this is the degree of `v`
/// on the binarized graph.
pub fn scan_neighborhood_count(g: &Graph, v: usize, k: u32, dist: &DistanceMatrix) -> u64 {
    if k == 0 {
        return g.binary_degree(v) as u64;
    }
    let n = g.node_count();
    let in_ball = |u: usize| dist.get(v, u).is_some_and(|d| d <= k);
    let mut count = 0u64;
    for i in 0..n {
        if !in_ball(i) {
            continue;
        }
        for j in (i + 1)..n {
            if g.get(i, j) > 0 && in_ball(j) {
                count += 1;
            }
        }
    }
    count
}

/// All scan counts for one snapshot: `counts[k][v]` is the k-th order
/// neighborhood edge count of node `v`, for k = 0, 1, 2.
///
/// Equivalent to calling [`scan_neighborhood_count`] for every `(v, k)`,
/// but walks the edge list once per node instead of the full matrix.
pub fn scan_counts(g: &Graph) -> [Vec<u64>; 3] {
    let n = g.node_count();
    let dist = geodesic_distances(g);
    let edges = g.binary_edges();
    let mut counts = [vec![0u64; n], vec![0u64; n], vec![0u64; n]];
    for v in 0..n {
        counts[0][v] = g.binary_degree(v) as u64;
        for k in [1u32, 2u32] {
            let mut c = 0u64;
            for &(i, j) in &edges {
                let di = dist.get(v, i).is_some_and(|d| d <= k);
                let dj = dist.get(v, j).is_some_and(|d| d <= k);
                if di && dj {
                    c += 1;
                }
            }
            counts[k as usize][v] = c;
        }
    }
    counts
}
