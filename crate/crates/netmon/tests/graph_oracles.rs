//! Brute-force oracles for the graph statistics.
//!
//! Everything here recomputes the summary statistics from first
//! principles on small graphs: Floyd-Warshall distances, explicit
//! enumeration of all geodesics for betweenness, direct triangle counts,
//! a direct Pearson correlation for assortativity, and a dense
//! eigendecomposition for the eigenvector statistic. None of it shares
//! code with the BFS/Brandes/power-iteration implementations it checks.

use netmon::graph::{
    binarize, geodesic_distances, scan_neighborhood_count, summary_statistic, summary_vector,
    Graph, StatisticKind,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod support;
use support::{eigen_magnitude_ratio, random_graph, Oracle, INF};



#[test]
fn all_statistics_match_brute_force_on_small_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0;
    while checked < 200 {
        let n = rng.random_range(2..=8);
        let density = rng.random_range(0.1..0.9);
        let g = random_graph(n, density, &mut rng);
        let b = binarize(&g);
        let oracle = Oracle::new(&b);
        let vector = summary_vector(&g);
        let eigen_comparable = eigen_magnitude_ratio(&b) < 0.995;
        for kind in StatisticKind::ALL {
            if kind == StatisticKind::AvgEigenvector && !eigen_comparable {
                continue;
            }
            let got = vector.get(kind);
            let want = oracle.statistic(kind);
            assert!(
                (got - want).abs() < 1e-8,
                "{kind:?} on n={n} graph: got {got}, oracle {want}\n{g:?}"
            );
        }
        checked += 1;
    }
}

#[test]
fn distances_match_floyd_warshall() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let n = rng.random_range(2..=8);
        let g = random_graph(n, 0.35, &mut rng);
        let oracle = Oracle::new(&g);
        let dist = geodesic_distances(&g);
        for i in 0..n {
            for j in 0..n {
                let want = (oracle.dist[i][j] < INF).then_some(oracle.dist[i][j]);
                assert_eq!(dist.get(i, j), want, "pair ({i},{j})");
            }
        }
    }
}

#[test]
fn scan_counts_match_induced_subgraph_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..50 {
        let n = rng.random_range(3..=8);
        let g = random_graph(n, 0.4, &mut rng);
        let oracle = Oracle::new(&g);
        let dist = geodesic_distances(&g);
        for v in 0..n {
            for k in 0..3u32 {
                let mut want = 0u64;
                for i in 0..n {
                    for j in (i + 1)..n {
                        let inside = oracle.dist[v][i] <= k && oracle.dist[v][j] <= k;
                        if inside && oracle.adj[i][j] {
                            want += 1;
                        }
                    }
                }
                if k == 0 {
                    want = oracle.degree(v) as u64;
                }
                assert_eq!(scan_neighborhood_count(&g, v, k, &dist), want);
            }
        }
    }
}

/// The sum of betweenness over nodes equals the sum over reachable
/// unordered pairs of the expected number of interior vertices on a
/// random geodesic.
#[test]
fn betweenness_sum_matches_interior_vertex_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..50 {
        let n = rng.random_range(2..=8);
        let g = random_graph(n, 0.35, &mut rng);
        let oracle = Oracle::new(&g);
        let total_betweenness =
            summary_statistic(&g, StatisticKind::AvgBetweenness) * n as f64;
        let mut interior = 0.0f64;
        for s in 0..n {
            for t in (s + 1)..n {
                if oracle.dist[s][t] < INF {
                    // Every geodesic from s to t has dist - 1 interior
                    // vertices, and the fractional counting averages to
                    // exactly that per pair.
                    interior += (oracle.dist[s][t] as f64 - 1.0).max(0.0);
                }
            }
        }
        assert!(
            (total_betweenness - interior).abs() < 1e-8,
            "betweenness sum {total_betweenness} vs interior count {interior}"
        );
    }
}

fn permuted(g: &Graph, perm: &[usize]) -> Graph {
    let n = g.node_count();
    let mut rows = vec![vec![0u32; n]; n];
    for i in 0..n {
        for j in 0..n {
            rows[i][j] = g.get(perm[i], perm[j]);
        }
    }
    Graph::from_matrix(rows).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn statistics_invariant_under_relabeling(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(2..=8usize);
        let g = random_graph(n, 0.4, &mut rng);
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = rng.random_range(0..=i);
            perm.swap(i, j);
        }
        let h = permuted(&g, &perm);
        let a = summary_vector(&g);
        let b = summary_vector(&h);
        for kind in StatisticKind::ALL {
            prop_assert!(
                (a.get(kind) - b.get(kind)).abs() < 1e-9,
                "{:?} changed under relabeling: {} vs {}",
                kind, a.get(kind), b.get(kind)
            );
        }
    }

    #[test]
    fn binarize_idempotent_and_entry_bounded(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(2..=10usize);
        let mut rows = vec![vec![0u32; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let w = rng.random_range(0..4u32);
                rows[i][j] = w;
                rows[j][i] = w;
            }
        }
        let g = Graph::from_matrix(rows).unwrap();
        let b = binarize(&g);
        prop_assert_eq!(&binarize(&b), &b);
        for i in 0..n {
            for j in 0..n {
                prop_assert!(b.get(i, j) <= 1);
                prop_assert_eq!(b.get(i, j), b.get(j, i));
            }
        }
    }

    #[test]
    fn scan_counts_monotone_in_k(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(2..=9usize);
        let g = random_graph(n, 0.3, &mut rng);
        let dist = geodesic_distances(&g);
        for v in 0..n {
            let c0 = scan_neighborhood_count(&g, v, 0, &dist);
            let c1 = scan_neighborhood_count(&g, v, 1, &dist);
            let c2 = scan_neighborhood_count(&g, v, 2, &dist);
            prop_assert!(c0 <= c1 && c1 <= c2);
        }
    }
}
