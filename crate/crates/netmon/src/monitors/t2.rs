//! Compositional T² chart on degree-parameter estimates (method 15).
//!
//! Per snapshot and community, the degree-parameter estimates are the
//! weighted degrees scaled so their community sum equals the community
//! size; their ilr (isometric log-ratio) coordinates are monitored with a
//! Hotelling T² statistic against the Phase I mean and the
//! successive-difference covariance estimate. The upper control limit is
//! `((n_r - 1)(m + 1)(m - 1)) / (m² - m(n_r - 1)) * F_{0.9}(n_r - 1, m - n_r + 1)`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::{fdist::f_quantile, CommunityLabels, MonitorError, MonitorId, Observation};
use crate::graph::Graph;

/// Entries below this are floored before the log-ratio transform, and the
/// community is re-normalized to keep the sum constraint; the transform
/// needs strict positivity and an isolated node yields an exact zero.
const THETA_HAT_FLOOR: f64 = 1e-6;

/// F-quantile level of the upper control limit.
const UCL_LEVEL: f64 = 0.9;

/// Degree-parameter estimates from one snapshot: node i gets
/// `n_r * d_i / sum(d_j over its community)` with `d_i` the weighted
/// degree, so per-community sums equal the community sizes exactly.
pub fn estimate_theta_hat(g: &Graph, labels: &CommunityLabels) -> Result<Vec<f64>, MonitorError> {
    let k = labels.community_count();
    let c = labels.labels();
    let degrees: Vec<f64> = (0..g.node_count())
        .map(|v| g.weighted_degree(v) as f64)
        .collect();
    let mut totals = vec![0.0f64; k];
    for (i, &ci) in c.iter().enumerate() {
        totals[ci] += degrees[i];
    }
    if let Some(r) = totals.iter().position(|&t| t <= 0.0) {
        return Err(MonitorError::ZeroCommunityDegree(r));
    }
    Ok(degrees
        .iter()
        .zip(c)
        .map(|(&d, &ci)| labels.size(ci) as f64 * d / totals[ci])
        .collect())
}

/// Isometric log-ratio coordinates of a positive composition:
/// `z_i = sqrt(i / (i + 1)) * ln(theta_{i+1} / gm(theta_1..theta_i))`
/// for i = 1..len-1, with gm the geometric mean of the first i parts.
pub fn ilr_transform(theta: &[f64]) -> Result<Vec<f64>, MonitorError> {
    if let Some(i) = theta.iter().position(|&t| t <= 0.0) {
        return Err(MonitorError::NonPositiveThetaHat(i));
    }
    let logs: Vec<f64> = theta.iter().map(|&t| t.ln()).collect();
    let mut prefix = 0.0f64;
    let mut z = Vec::with_capacity(theta.len().saturating_sub(1));
    for i in 1..theta.len() {
        prefix += logs[i - 1];
        let i_f = i as f64;
        z.push((i_f / (i_f + 1.0)).sqrt() * (logs[i] - prefix / i_f));
    }
    Ok(z)
}

/// Floor tiny entries and re-normalize the composition to sum to `total`.
fn floor_and_renormalize(theta: &mut [f64], total: f64) {
    let mut changed = false;
    for t in theta.iter_mut() {
        if *t < THETA_HAT_FLOOR {
            *t = THETA_HAT_FLOOR;
            changed = true;
        }
    }
    if changed {
        let sum: f64 = theta.iter().sum();
        for t in theta.iter_mut() {
            *t *= total / sum;
        }
    }
}

/// One community's fitted T² chart: Phase I mean of the ilr coordinates,
/// Cholesky factor of the successive-difference covariance, and the UCL.
#[derive(Debug, Clone)]
pub struct T2Core {
    mu: DVector<f64>,
    chol: Cholesky<f64, Dyn>,
    ucl: f64,
}

impl T2Core {
    /// Fit from the Phase I coordinate vectors of one community.
    /// `n_r` is the community size (coordinate dimension + 1).
    pub fn fit(z: &[DVector<f64>], n_r: usize, community: usize) -> Result<Self, MonitorError> {
        let m = z.len();
        if m <= n_r {
            return Err(MonitorError::PhaseTooShort { community, m, n_r });
        }
        let dim = n_r - 1;
        let mut mu = DVector::zeros(dim);
        for v in z {
            mu += v;
        }
        mu /= m as f64;

        let mut sigma = DMatrix::zeros(dim, dim);
        for w in z.windows(2) {
            let d = &w[1] - &w[0];
            sigma.ger(1.0, &d, &d, 1.0);
        }
        sigma /= 2.0 * (m - 1) as f64;

        let chol = match Cholesky::new(sigma.clone()) {
            Some(c) => c,
            None => {
                // One ridge attempt before giving up on the community.
                let ridge = 1e-10 * sigma.trace() / dim.max(1) as f64;
                for i in 0..dim {
                    sigma[(i, i)] += ridge;
                }
                Cholesky::new(sigma).ok_or(MonitorError::SingularCovariance(community))?
            }
        };

        let (n_r_f, m_f) = (n_r as f64, m as f64);
        let factor = ((n_r_f - 1.0) * (m_f + 1.0) * (m_f - 1.0))
            / (m_f * m_f - m_f * (n_r_f - 1.0));
        let ucl = factor * f_quantile(UCL_LEVEL, (n_r - 1) as u64, (m - n_r + 1) as u64)?;
        Ok(T2Core { mu, chol, ucl })
    }

    /// Hotelling statistic `(z - mu)' Sigma^{-1} (z - mu)`.
    pub fn t2(&self, z: &DVector<f64>) -> f64 {
        let centered = z - &self.mu;
        let solved = self.chol.solve(&centered);
        centered.dot(&solved)
    }

    pub fn ucl(&self) -> f64 {
        self.ucl
    }

    pub fn exceeds(&self, z: &DVector<f64>) -> bool {
        self.t2(z) > self.ucl
    }
}

/// Monitor wrapper (method 15): one T² chart per community; the method
/// signals when any community's statistic exceeds its UCL.
pub struct T2Monitor {
    labels: CommunityLabels,
    charts: Vec<T2Core>,
}

impl T2Monitor {
    pub fn new(labels: CommunityLabels) -> Self {
        T2Monitor {
            labels,
            charts: Vec::new(),
        }
    }

    /// ilr coordinates per community for one snapshot.
    fn coordinates(&self, g: &Graph) -> Result<Vec<DVector<f64>>, MonitorError> {
        let theta_hat = estimate_theta_hat(g, &self.labels)?;
        let mut per_community = Vec::with_capacity(self.labels.community_count());
        for r in 0..self.labels.community_count() {
            let mut part: Vec<f64> = self
                .labels
                .members(r)
                .into_iter()
                .map(|i| theta_hat[i])
                .collect();
            floor_and_renormalize(&mut part, self.labels.size(r) as f64);
            per_community.push(DVector::from_vec(ilr_transform(&part)?));
        }
        Ok(per_community)
    }
}

impl super::Monitor for T2Monitor {
    fn id(&self) -> MonitorId {
        MonitorId::new(15).unwrap()
    }

    fn fit(&mut self, phase1: &[Observation<'_>]) -> Result<(), MonitorError> {
        let m = phase1.len();
        if m < 2 {
            return Err(MonitorError::TooFewObservations { needed: 2, got: m });
        }
        let mut per_community: Vec<Vec<DVector<f64>>> =
            vec![Vec::with_capacity(m); self.labels.community_count()];
        for obs in phase1 {
            for (r, z) in self.coordinates(obs.graph())?.into_iter().enumerate() {
                per_community[r].push(z);
            }
        }
        self.charts = per_community
            .into_iter()
            .enumerate()
            .map(|(r, z)| T2Core::fit(&z, self.labels.size(r), r))
            .collect::<Result<_, _>>()?;
        Ok(())
    }

    fn update(&mut self, obs: &Observation<'_>) -> bool {
        assert!(!self.charts.is_empty(), "T² monitor updated before fit");
        match self.coordinates(obs.graph()) {
            Ok(zs) => zs
                .iter()
                .zip(&self.charts)
                .any(|(z, chart)| chart.exceeds(z)),
            // A Phase II snapshot with a fully silent community has no
            // defined coordinates; treat it as no signal.
            Err(_) => false,
        }
    }
}
