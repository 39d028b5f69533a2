//! Shewhart charts on the estimated block propensity matrix (method 14).
//!
//! Each unique entry of `P_hat` gets its own individuals chart with
//! limits `mu_hat +/- 3 sigma_hat`, where `mu_hat` is the Phase I sample
//! mean and `sigma_hat` the moving-range estimate
//! `sqrt(pi) / (2 (m - 1)) * sum |P_hat_j - P_hat_{j-1}|`.
//!
//! All k(k+1)/2 unique entries including the diagonals are charted:
//! within-community intensification moves a diagonal entry, so diagonal
//! charts are required for the method to detect it.

use super::{mean, CommunityLabels, MonitorError, MonitorId, Observation, SIGMA_FLOOR};
use crate::graph::Graph;

/// Empirical block propensities: entry (r, s) is the total edge weight
/// between communities r and s divided by `n_r * n_s` (the same
/// normalization for diagonal entries; Phase I limits absorb the
/// constant bias of not using the exact pair count there).
pub fn estimate_p_hat(g: &Graph, labels: &CommunityLabels) -> Vec<Vec<f64>> {
    let k = labels.community_count();
    let c = labels.labels();
    let mut weight = vec![0.0f64; k * k];
    let n = g.node_count();
    for i in 0..n {
        for j in (i + 1)..n {
            let w = g.get(i, j);
            if w > 0 {
                let (r, s) = (c[i].min(c[j]), c[i].max(c[j]));
                weight[r * k + s] += w as f64;
            }
        }
    }
    let mut p_hat = vec![vec![0.0f64; k]; k];
    for r in 0..k {
        for s in r..k {
            let value = weight[r * k + s] / (labels.size(r) as f64 * labels.size(s) as f64);
            p_hat[r][s] = value;
            p_hat[s][r] = value;
        }
    }
    p_hat
}

/// One fitted individuals chart.
#[derive(Debug, Clone, Copy, PartialEq)]
struct EntryChart {
    mu_hat: f64,
    sigma_hat: f64,
    lower: f64,
    upper: f64,
}

/// Fitted state: one chart per unique (r, s) with r <= s.
#[derive(Debug, Clone, PartialEq)]
pub struct ShewhartPState {
    k: usize,
    charts: Vec<EntryChart>,
}

impl ShewhartPState {
    /// Fit from the Phase I sequence of propensity matrices (m >= 2).
    pub fn fit(phase1: &[Vec<Vec<f64>>], k: usize) -> Result<Self, MonitorError> {
        let m = phase1.len();
        if m < 2 {
            return Err(MonitorError::TooFewObservations { needed: 2, got: m });
        }
        let mut charts = Vec::with_capacity(k * (k + 1) / 2);
        for r in 0..k {
            for s in r..k {
                let series: Vec<f64> = phase1.iter().map(|p| p[r][s]).collect();
                let mu_hat = mean(&series);
                let moving_range: f64 = series.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
                let sigma_hat = (std::f64::consts::PI.sqrt() / (2.0 * (m - 1) as f64)
                    * moving_range)
                    .max(SIGMA_FLOOR);
                charts.push(EntryChart {
                    mu_hat,
                    sigma_hat,
                    lower: mu_hat - 3.0 * sigma_hat,
                    upper: mu_hat + 3.0 * sigma_hat,
                });
            }
        }
        Ok(ShewhartPState { k, charts })
    }

    /// True when any unique-entry chart is outside its limits.
    pub fn check(&self, p_hat: &[Vec<f64>]) -> bool {
        let mut idx = 0;
        for r in 0..self.k {
            for s in r..self.k {
                let chart = &self.charts[idx];
                let v = p_hat[r][s];
                if v < chart.lower || v > chart.upper {
                    return true;
                }
                idx += 1;
            }
        }
        false
    }

    /// Number of charts: k(k+1)/2.
    pub fn chart_count(&self) -> usize {
        self.charts.len()
    }

    fn chart(&self, r: usize, s: usize) -> &EntryChart {
        let (r, s) = (r.min(s), r.max(s));
        // Row-major over the upper triangle.
        let idx = r * self.k - r * (r + 1) / 2 + s;
        &self.charts[idx]
    }

    pub fn limits(&self, r: usize, s: usize) -> (f64, f64) {
        let c = self.chart(r, s);
        (c.lower, c.upper)
    }

    pub fn mean_of(&self, r: usize, s: usize) -> f64 {
        self.chart(r, s).mu_hat
    }

    pub fn sd_of(&self, r: usize, s: usize) -> f64 {
        self.chart(r, s).sigma_hat
    }
}

/// Monitor wrapper (method 14).
pub struct ShewhartPMonitor {
    labels: CommunityLabels,
    state: Option<ShewhartPState>,
}

impl ShewhartPMonitor {
    pub fn new(labels: CommunityLabels) -> Self {
        ShewhartPMonitor {
            labels,
            state: None,
        }
    }
}

impl super::Monitor for ShewhartPMonitor {
    fn id(&self) -> MonitorId {
        MonitorId::new(14).unwrap()
    }

    fn fit(&mut self, phase1: &[Observation<'_>]) -> Result<(), MonitorError> {
        let series: Vec<Vec<Vec<f64>>> = phase1
            .iter()
            .map(|o| estimate_p_hat(o.graph(), &self.labels))
            .collect();
        self.state = Some(ShewhartPState::fit(
            &series,
            self.labels.community_count(),
        )?);
        Ok(())
    }

    fn update(&mut self, obs: &Observation<'_>) -> bool {
        let state = self
            .state
            .as_ref()
            .expect("Shewhart monitor updated before fit");
        state.check(&estimate_p_hat(obs.graph(), &self.labels))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn labels_2_3() -> CommunityLabels {
        CommunityLabels::new(&[0, 0, 1, 1, 1]).unwrap()
    }

    #[test]
    fn p_hat_of_empty_graph_is_zero() {
        let g = Graph::empty(5);
        let p = estimate_p_hat(&g, &labels_2_3());
        for row in p {
            for v in row {
                assert_eq!(v, 0.0);
            }
        }
    }

    #[test]
    fn p_hat_complete_bipartite() {
        // K_{2,3} between the communities: m_12 = 6, P_12 = 6 / (2*3) = 1.
        let edges = [(0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4)];
        let g = Graph::from_edges(5, &edges).unwrap();
        let p = estimate_p_hat(&g, &labels_2_3());
        assert_abs_diff_eq!(p[0][1], 1.0);
        assert_abs_diff_eq!(p[1][0], 1.0);
        assert_abs_diff_eq!(p[0][0], 0.0);
        assert_abs_diff_eq!(p[1][1], 0.0);
    }

    #[test]
    fn p_hat_diagonal_uses_squared_size() {
        // One triangle inside a community of 3: m_11 = 3, P_11 = 3/9.
        let labels = CommunityLabels::new(&[0, 0, 0, 1]).unwrap();
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let p = estimate_p_hat(&g, &labels);
        assert_abs_diff_eq!(p[0][0], 1.0 / 3.0);
    }

    #[test]
    fn p_hat_counts_edge_weight() {
        let labels = CommunityLabels::new(&[0, 1]).unwrap();
        let g = Graph::from_matrix(vec![vec![0, 5], vec![5, 0]]).unwrap();
        let p = estimate_p_hat(&g, &labels);
        assert_abs_diff_eq!(p[0][1], 5.0);
    }

    fn single_entry_series(values: &[f64]) -> Vec<Vec<Vec<f64>>> {
        values.iter().map(|&v| vec![vec![v]]).collect()
    }

    #[test]
    fn moving_range_sigma_example() {
        // (0.1, 0.2, 0.1): sigma = sqrt(pi)/4 * 0.2.
        let state = ShewhartPState::fit(&single_entry_series(&[0.1, 0.2, 0.1]), 1).unwrap();
        assert_abs_diff_eq!(state.sd_of(0, 0), 0.0886226925452758, epsilon = 1e-10);
    }

    #[test]
    fn moving_range_constant_is_floored() {
        let state = ShewhartPState::fit(&single_entry_series(&[0.3; 6]), 1).unwrap();
        assert_abs_diff_eq!(state.sd_of(0, 0), SIGMA_FLOOR);
        // Degenerate Phase I: any deviation signals.
        assert!(state.check(&[vec![0.3001]]));
        assert!(!state.check(&[vec![0.3]]));
    }

    #[test]
    fn moving_range_constant_matches_individuals_chart_d2() {
        // sqrt(pi)/2 = 0.8862 is 1/d2 for the classical d2 = 1.128.
        assert_abs_diff_eq!(
            std::f64::consts::PI.sqrt() / 2.0,
            1.0 / 1.1283791670955126,
            epsilon = 1e-12
        );
    }

    #[test]
    fn fit_needs_two_observations() {
        assert!(matches!(
            ShewhartPState::fit(&single_entry_series(&[0.1]), 1),
            Err(MonitorError::TooFewObservations { needed: 2, got: 1 })
        ));
    }

    #[test]
    fn check_against_limits() {
        let state = ShewhartPState::fit(
            &single_entry_series(&[0.10, 0.14, 0.10, 0.14, 0.10, 0.14]),
            1,
        )
        .unwrap();
        let mu = state.mean_of(0, 0);
        let sigma = state.sd_of(0, 0);
        assert!(state.check(&[vec![mu + 4.0 * sigma]]));
        assert!(!state.check(&[vec![mu]]));
        assert!(state.check(&[vec![mu - 4.0 * sigma]]));
    }

    #[test]
    fn chart_count_is_unique_entries() {
        let series: Vec<Vec<Vec<f64>>> = (0..5)
            .map(|t| {
                let v = t as f64 * 0.01;
                vec![
                    vec![0.1 + v, 0.2, 0.3],
                    vec![0.2, 0.4 + v, 0.5],
                    vec![0.3, 0.5, 0.6 + v],
                ]
            })
            .collect();
        let state = ShewhartPState::fit(&series, 3).unwrap();
        assert_eq!(state.chart_count(), 6);
    }

    #[test]
    fn p_hat_invariant_under_within_community_permutation() {
        let labels = CommunityLabels::new(&[0, 0, 0, 1, 1]).unwrap();
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (0, 3), (2, 4), (3, 4)]).unwrap();
        // Swap nodes 0 and 2 (same community).
        let perm = [2usize, 1, 0, 3, 4];
        let mut rows = vec![vec![0u32; 5]; 5];
        for i in 0..5 {
            for j in 0..5 {
                rows[i][j] = g.get(perm[i], perm[j]);
            }
        }
        let h = Graph::from_matrix(rows).unwrap();
        let pg = estimate_p_hat(&g, &labels);
        let ph = estimate_p_hat(&h, &labels);
        for r in 0..2 {
            for s in 0..2 {
                assert_abs_diff_eq!(pg[r][s], ph[r][s]);
            }
        }
    }
}
