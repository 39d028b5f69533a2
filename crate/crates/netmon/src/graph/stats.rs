//! The twelve global summary statistics monitored by the EWMA charts.
//!
//! Conventions on disconnected or degenerate graphs: statistics defined
//! over an empty reachable set are 0, assortativity is 0 when the endpoint
//! degree correlation is undefined, and the local clustering coefficient
//! of a node with degree < 2 is 0 (and is included in the average). These
//! keep every statistic finite so the charts never see a NaN.

use super::{binarize, geodesic_distances, neighbor_lists, DistanceMatrix, Graph};

/// Power-iteration tolerance on the L2 difference of successive iterates.
const EIGEN_TOL: f64 = 1e-10;
const EIGEN_MAX_ITERS: usize = 10_000;

/// The twelve global summary statistics, in chart order (methods 1..=12).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StatisticKind {
    AvgDegree,
    AvgEigenvector,
    AvgBetweenness,
    MaxBetweenness,
    AvgCloseness,
    MaxCloseness,
    GlobalClustering,
    AvgLocalClustering,
    Diameter,
    AvgShortestPath,
    AvgEccentricity,
    Assortativity,
}

impl StatisticKind {
    /// All twelve kinds in chart order.
    pub const ALL: [StatisticKind; 12] = [
        StatisticKind::AvgDegree,
        StatisticKind::AvgEigenvector,
        StatisticKind::AvgBetweenness,
        StatisticKind::MaxBetweenness,
        StatisticKind::AvgCloseness,
        StatisticKind::MaxCloseness,
        StatisticKind::GlobalClustering,
        StatisticKind::AvgLocalClustering,
        StatisticKind::Diameter,
        StatisticKind::AvgShortestPath,
        StatisticKind::AvgEccentricity,
        StatisticKind::Assortativity,
    ];
}

/// All twelve statistics of one snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryVector {
    pub avg_degree: f64,
    pub avg_eigenvector: f64,
    pub avg_betweenness: f64,
    pub max_betweenness: f64,
    pub avg_closeness: f64,
    pub max_closeness: f64,
    pub global_clustering: f64,
    pub avg_local_clustering: f64,
    pub diameter: f64,
    pub avg_shortest_path: f64,
    pub avg_eccentricity: f64,
    pub assortativity: f64,
}

impl SummaryVector {
    /// Component lookup by statistic kind.
    pub fn get(&self, kind: StatisticKind) -> f64 {
        match kind {
            StatisticKind::AvgDegree => self.avg_degree,
            StatisticKind::AvgEigenvector => self.avg_eigenvector,
            StatisticKind::AvgBetweenness => self.avg_betweenness,
            StatisticKind::MaxBetweenness => self.max_betweenness,
            StatisticKind::AvgCloseness => self.avg_closeness,
            StatisticKind::MaxCloseness => self.max_closeness,
            StatisticKind::GlobalClustering => self.global_clustering,
            StatisticKind::AvgLocalClustering => self.avg_local_clustering,
            StatisticKind::Diameter => self.diameter,
            StatisticKind::AvgShortestPath => self.avg_shortest_path,
            StatisticKind::AvgEccentricity => self.avg_eccentricity,
            StatisticKind::Assortativity => self.assortativity,
        }
    }
}

/// One named statistic of `g`, computed on the binarized graph.
pub fn summary_statistic(g: &Graph, kind: StatisticKind) -> f64 {
    summary_vector(g).get(kind)
}

/// All twelve statistics of `g`. The geodesic distance matrix and the
/// betweenness sweep are computed once and shared across components.
pub fn summary_vector(g: &Graph) -> SummaryVector {
    let b = binarize(g);
    let n = b.node_count();
    let neighbors = neighbor_lists(&b);
    let dist = geodesic_distances(&b);
    let betweenness = brandes_betweenness(&neighbors);

    let degrees: Vec<usize> = neighbors.iter().map(Vec::len).collect();
    let avg_degree = mean_or_zero(degrees.iter().map(|&d| d as f64), n);

    let closeness: Vec<f64> = (0..n).map(|v| closeness_of(&dist, v)).collect();

    let (mut diameter, mut path_sum, mut pair_count) = (0u32, 0u64, 0u64);
    for i in 0..n {
        for j in (i + 1)..n {
            if let Some(d) = dist.get(i, j) {
                diameter = diameter.max(d);
                path_sum += d as u64;
                pair_count += 1;
            }
        }
    }
    let avg_shortest_path = if pair_count > 0 {
        path_sum as f64 / pair_count as f64
    } else {
        0.0
    };

    let eccentricities = (0..n).map(|v| {
        (0..n)
            .filter_map(|u| dist.get(v, u))
            .max()
            .unwrap_or(0) as f64
    });
    let avg_eccentricity = mean_or_zero(eccentricities, n);

    let (global_clustering, avg_local_clustering) = clustering_coefficients(&b, &neighbors);

    SummaryVector {
        avg_degree,
        avg_eigenvector: avg_eigenvector(&neighbors),
        avg_betweenness: mean_or_zero(betweenness.iter().copied(), n),
        max_betweenness: betweenness.iter().copied().fold(0.0, f64::max),
        avg_closeness: mean_or_zero(closeness.iter().copied(), n),
        max_closeness: closeness.iter().copied().fold(0.0, f64::max),
        global_clustering,
        avg_local_clustering,
        diameter: diameter as f64,
        avg_shortest_path,
        avg_eccentricity,
        assortativity: assortativity(&b, &degrees),
    }
}

fn mean_or_zero(values: impl Iterator<Item = f64>, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    values.sum::<f64>() / n as f64
}

/// Closeness of `v`: (number of other nodes reachable from `v`) divided by
/// the sum of geodesic distances to them; 0 when nothing is reachable.
fn closeness_of(dist: &DistanceMatrix, v: usize) -> f64 {
    let mut reachable = 0u64;
    let mut total = 0u64;
    for u in 0..dist.node_count() {
        if u == v {
            continue;
        }
        if let Some(d) = dist.get(v, u) {
            reachable += 1;
            total += d as u64;
        }
    }
    if total == 0 {
        0.0
    } else {
        reachable as f64 / total as f64
    }
}

/// Brandes' algorithm on an unweighted simple graph: unnormalized
/// betweenness with fractional counting over multiple geodesics, summed
/// over unordered pairs excluding the endpoint node. The standard sweep
/// accumulates each unordered pair from both endpoints, hence the final
/// halving.
fn brandes_betweenness(neighbors: &[Vec<usize>]) -> Vec<f64> {
    let n = neighbors.len();
    let mut centrality = vec![0.0f64; n];
    let mut stack: Vec<usize> = Vec::with_capacity(n);
    let mut queue = std::collections::VecDeque::new();
    for s in 0..n {
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut sigma = vec![0.0f64; n];
        let mut dist = vec![-1i64; n];
        sigma[s] = 1.0;
        dist[s] = 0;
        stack.clear();
        queue.clear();
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            stack.push(v);
            for &w in &neighbors[v] {
                if dist[w] < 0 {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        let mut delta = vec![0.0f64; n];
        while let Some(w) = stack.pop() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                centrality[w] += delta[w];
            }
        }
    }
    for c in &mut centrality {
        *c /= 2.0;
    }
    centrality
}

/// Global transitivity (3 x triangles / connected triples) and the mean
/// local clustering coefficient, in one pass over neighbor pairs.
fn clustering_coefficients(b: &Graph, neighbors: &[Vec<usize>]) -> (f64, f64) {
    let n = b.node_count();
    let mut triangle_paths = 0u64; // closed wedges, counted once per center
    let mut wedges = 0u64;
    let mut local_sum = 0.0f64;
    for v in 0..n {
        let around = &neighbors[v];
        let d = around.len();
        if d < 2 {
            continue;
        }
        let mut closed = 0u64;
        for (a, &i) in around.iter().enumerate() {
            for &j in &around[a + 1..] {
                if b.get(i, j) > 0 {
                    closed += 1;
                }
            }
        }
        let possible = (d * (d - 1) / 2) as u64;
        wedges += possible;
        triangle_paths += closed;
        local_sum += closed as f64 / possible as f64;
    }
    let global = if wedges > 0 {
        triangle_paths as f64 / wedges as f64
    } else {
        0.0
    };
    let avg_local = if n > 0 { local_sum / n as f64 } else { 0.0 };
    (global, avg_local)
}

/// Newman degree assortativity: the Pearson correlation of endpoint
/// degrees over the symmetrized edge list (each undirected edge
/// contributes both orientations). 0 when the correlation is undefined.
fn assortativity(b: &Graph, degrees: &[usize]) -> f64 {
    let n = b.node_count();
    let mut m = 0u64;
    let (mut sx, mut sxx, mut sxy) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..n {
        for j in (i + 1)..n {
            if b.get(i, j) == 0 {
                continue;
            }
            let (di, dj) = (degrees[i] as f64, degrees[j] as f64);
            m += 2;
            sx += di + dj;
            sxx += di * di + dj * dj;
            sxy += 2.0 * di * dj;
        }
    }
    if m == 0 {
        return 0.0;
    }
    let mf = m as f64;
    let mean = sx / mf;
    let var = sxx / mf - mean * mean;
    if var <= 1e-15 {
        return 0.0;
    }
    let cov = sxy / mf - mean * mean;
    cov / var
}

/// Mean entry of the unit-L2 principal eigenvector of the binarized
/// adjacency matrix, by power iteration. The sign is fixed so the entry
/// sum is non-negative. An edgeless graph yields 0.
fn avg_eigenvector(neighbors: &[Vec<usize>]) -> f64 {
    let n = neighbors.len();
    if n == 0 {
        return 0.0;
    }
    let mut v = vec![1.0f64 / (n as f64).sqrt(); n];
    let mut next = vec![0.0f64; n];
    for _ in 0..EIGEN_MAX_ITERS {
        for (i, slot) in next.iter_mut().enumerate() {
            let mut acc = 0.0;
            for &j in &neighbors[i] {
                acc += v[j];
            }
            *slot = acc;
        }
        let norm = next.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return 0.0;
        }
        for x in &mut next {
            *x /= norm;
        }
        // Compare against the iterate with matching sign: the dominant
        // eigenvalue of an adjacency matrix is non-negative, but the
        // normalized iterate may flip when the start vector's projection
        // is negative.
        let dot: f64 = v.iter().zip(&next).map(|(a, b)| a * b).sum();
        let sign = if dot < 0.0 { -1.0 } else { 1.0 };
        let diff: f64 = v
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - sign * b) * (a - sign * b))
            .sum::<f64>()
            .sqrt();
        std::mem::swap(&mut v, &mut next);
        if diff < EIGEN_TOL {
            break;
        }
    }
    let sum: f64 = v.iter().sum();
    let sign = if sum < 0.0 { -1.0 } else { 1.0 };
    sign * sum / n as f64
}
