//! DCSBM sampling, dependent network dynamics, and the change-scenario
//! catalog.
//!
//! Edge counts are independent Poisson draws with mean
//! `theta[i] * theta[j] * p[c[i]][c[j]]`. A sequence evolves by keeping
//! each pair's count from the previous snapshot with probability
//! `1 - alpha` and redrawing it from the model with probability `alpha`,
//! so `alpha = 1` yields independent snapshots and `alpha = 0` freezes
//! the network.

use crate::graph::Graph;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use thiserror::Error;

/// Tolerance on the per-community degree-parameter sum constraint.
const THETA_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum GeneratorError {
    #[error("degree parameter at index {0} is not strictly positive")]
    NonPositiveTheta(usize),
    #[error("community label {label} at node {node} out of range for {k} communities")]
    LabelOutOfRange { node: usize, label: usize, k: usize },
    #[error("community {0} has no members")]
    EmptyCommunity(usize),
    #[error("propensity matrix is not symmetric at ({0},{1})")]
    AsymmetricPropensity(usize, usize),
    #[error("propensity entry ({0},{1}) is negative")]
    NegativePropensity(usize, usize),
    #[error("theta sum in community {community} is {sum}, expected {expected}")]
    ThetaSumViolation {
        community: usize,
        sum: f64,
        expected: f64,
    },
    #[error("alpha {0} outside [0, 1]")]
    AlphaOutOfRange(f64),
    #[error("node count mismatch: graph has {prev}, model has {model}")]
    DimensionMismatch { prev: usize, model: usize },
    #[error("change time {t_star} outside 1..={max}")]
    ChangeTimeOutOfRange { t_star: usize, max: usize },
    #[error("node configuration ({0}, {1}) not on the study grid")]
    InvalidNodeConfiguration(f64, f64),
    #[error("unknown scenario name `{0}`")]
    UnknownScenario(String),
}

/// DCSBM parameters: community labels `c`, the symmetric propensity
/// matrix `P`, and degree parameters `theta` with per-community sums
/// pinned to the community sizes (the model's identifiability constraint).
#[derive(Debug, Clone, PartialEq)]
pub struct DcsbmParams {
    n: usize,
    k: usize,
    labels: Vec<usize>,
    propensity: Vec<f64>, // k x k, row-major
    theta: Vec<f64>,
}

impl DcsbmParams {
    pub fn new(
        k: usize,
        labels: Vec<usize>,
        propensity: Vec<Vec<f64>>,
        theta: Vec<f64>,
    ) -> Result<Self, GeneratorError> {
        let n = labels.len();
        for (node, &label) in labels.iter().enumerate() {
            if label >= k {
                return Err(GeneratorError::LabelOutOfRange { node, label, k });
            }
        }
        let mut flat = vec![0.0; k * k];
        for (r, row) in propensity.iter().enumerate() {
            for (s, &p) in row.iter().enumerate() {
                if p < 0.0 {
                    return Err(GeneratorError::NegativePropensity(r, s));
                }
                flat[r * k + s] = p;
            }
        }
        for r in 0..k {
            for s in (r + 1)..k {
                if (flat[r * k + s] - flat[s * k + r]).abs() > 0.0 {
                    return Err(GeneratorError::AsymmetricPropensity(r, s));
                }
            }
        }
        let params = DcsbmParams {
            n,
            k,
            labels,
            propensity: flat,
            theta,
        };
        params.check_theta()?;
        Ok(params)
    }

    fn check_theta(&self) -> Result<(), GeneratorError> {
        for (i, &t) in self.theta.iter().enumerate() {
            if t <= 0.0 {
                return Err(GeneratorError::NonPositiveTheta(i));
            }
        }
        let sizes = self.community_sizes()?;
        let mut sums = vec![0.0f64; self.k];
        for (i, &c) in self.labels.iter().enumerate() {
            sums[c] += self.theta[i];
        }
        for r in 0..self.k {
            if (sums[r] - sizes[r] as f64).abs() > THETA_SUM_TOL {
                return Err(GeneratorError::ThetaSumViolation {
                    community: r,
                    sum: sums[r],
                    expected: sizes[r] as f64,
                });
            }
        }
        Ok(())
    }

    fn community_sizes(&self) -> Result<Vec<usize>, GeneratorError> {
        let mut sizes = vec![0usize; self.k];
        for &c in &self.labels {
            sizes[c] += 1;
        }
        if let Some(r) = sizes.iter().position(|&s| s == 0) {
            return Err(GeneratorError::EmptyCommunity(r));
        }
        Ok(sizes)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn community_count(&self) -> usize {
        self.k
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Propensity between communities `r` and `s`.
    pub fn propensity(&self, r: usize, s: usize) -> f64 {
        self.propensity[r * self.k + s]
    }

    /// Poisson mean for the pair (`i`, `j`).
    #[inline]
    pub fn pair_mean(&self, i: usize, j: usize) -> f64 {
        self.theta[i] * self.theta[j] * self.propensity(self.labels[i], self.labels[j])
    }

    /// Expected degree of every node with all theta pinned at 1
    /// (the structural skeleton used for size rescaling).
    pub fn skeleton_expected_degrees(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                (0..self.n)
                    .filter(|&j| j != i)
                    .map(|j| self.propensity(self.labels[i], self.labels[j]))
                    .sum()
            })
            .collect()
    }
}

/// A generative model: DCSBM parameters plus the continuity parameter
/// `alpha`, the probability that a pair's connection is freshly resampled
/// at each step rather than copied from the previous snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct DcsbmModel {
    pub params: DcsbmParams,
    alpha: f64,
}

impl DcsbmModel {
    pub fn new(params: DcsbmParams, alpha: f64) -> Result<Self, GeneratorError> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(GeneratorError::AlphaOutOfRange(alpha));
        }
        Ok(DcsbmModel { params, alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// Scale raw positive degree parameters so that within each community the
/// sum equals the community's node count.
pub fn scale_theta(raw: &[f64], labels: &[usize], k: usize) -> Result<Vec<f64>, GeneratorError> {
    if let Some(i) = raw.iter().position(|&t| t <= 0.0) {
        return Err(GeneratorError::NonPositiveTheta(i));
    }
    let mut sums = vec![0.0f64; k];
    let mut sizes = vec![0usize; k];
    for (i, &c) in labels.iter().enumerate() {
        sums[c] += raw[i];
        sizes[c] += 1;
    }
    Ok(raw
        .iter()
        .zip(labels)
        .map(|(&t, &c)| t * sizes[c] as f64 / sums[c])
        .collect())
}

/// Draw raw degree parameters i.i.d. uniform on (`lo`, `hi`) and scale
/// them to the per-community sum constraint.
pub fn sample_theta<R: Rng + ?Sized>(
    n: usize,
    labels: &[usize],
    k: usize,
    lo: f64,
    hi: f64,
    rng: &mut R,
) -> Result<Vec<f64>, GeneratorError> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(lo..hi)).collect();
    scale_theta(&raw, labels, k)
}

#[inline]
fn poisson_draw<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u32 {
    if mean <= 0.0 {
        return 0;
    }
    let d = Poisson::new(mean).expect("positive finite Poisson mean");
    d.sample(rng) as u32
}

/// Draw one snapshot: independent Poisson counts per unordered pair.
pub fn sample_graph<R: Rng + ?Sized>(params: &DcsbmParams, rng: &mut R) -> Graph {
    let n = params.node_count();
    let mut g = Graph::empty(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let w = poisson_draw(params.pair_mean(i, j), rng);
            if w > 0 {
                g.set_pair(i, j, w);
            }
        }
    }
    g
}

/// Advance one step: per unordered pair, keep the previous count with
/// probability `1 - alpha`, otherwise redraw it from the model.
pub fn evolve<R: Rng + ?Sized>(
    prev: &Graph,
    model: &DcsbmModel,
    rng: &mut R,
) -> Result<Graph, GeneratorError> {
    let n = model.params.node_count();
    if prev.node_count() != n {
        return Err(GeneratorError::DimensionMismatch {
            prev: prev.node_count(),
            model: n,
        });
    }
    let mut g = Graph::empty(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let w = if rng.random::<f64>() < model.alpha {
                poisson_draw(model.params.pair_mean(i, j), rng)
            } else {
                prev.get(i, j)
            };
            if w > 0 {
                g.set_pair(i, j, w);
            }
        }
    }
    Ok(g)
}

/// The nine change scenarios of the study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    NoChange,
    Global,
    Local,
    Propensity,
    Intensified,
    Split,
    Merge,
    Form,
    Fragment,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 9] = [
        ScenarioKind::NoChange,
        ScenarioKind::Global,
        ScenarioKind::Local,
        ScenarioKind::Propensity,
        ScenarioKind::Intensified,
        ScenarioKind::Split,
        ScenarioKind::Merge,
        ScenarioKind::Form,
        ScenarioKind::Fragment,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::NoChange => "no_change",
            ScenarioKind::Global => "global",
            ScenarioKind::Local => "local",
            ScenarioKind::Propensity => "propensity",
            ScenarioKind::Intensified => "intensified",
            ScenarioKind::Split => "split",
            ScenarioKind::Merge => "merge",
            ScenarioKind::Form => "form",
            ScenarioKind::Fragment => "fragment",
        }
    }

    pub fn parse(name: &str) -> Result<Self, GeneratorError> {
        Self::ALL
            .into_iter()
            .find(|s| s.name() == name)
            .ok_or_else(|| GeneratorError::UnknownScenario(name.to_string()))
    }

    /// Whether the scenario is defined on a two-community network
    /// (and therefore varies with the node configuration).
    pub fn is_two_community(self) -> bool {
        matches!(
            self,
            ScenarioKind::Intensified
                | ScenarioKind::Split
                | ScenarioKind::Merge
                | ScenarioKind::Form
                | ScenarioKind::Fragment
        )
    }

    /// Human-readable parameter-change representation at n = 40.
    pub fn change_representation(self) -> &'static str {
        match self {
            ScenarioKind::NoChange => "p: 0.2 (no change)",
            ScenarioKind::Global => "p: 0.2 -> 0.25",
            ScenarioKind::Local => "p: 0.2 -> 0.4 for n/5 nodes",
            ScenarioKind::Propensity => "theta: U(0.5, 1.5) -> U(0.5, 3)",
            ScenarioKind::Intensified => "P: [[0.3,0.1],[0.1,0.3]] -> [[0.4,0.1],[0.1,0.3]]",
            ScenarioKind::Split => "P: [[0.2,0.2],[0.2,0.2]] -> [[0.3,0.1],[0.1,0.3]]",
            ScenarioKind::Merge => "P: [[0.3,0.1],[0.1,0.3]] -> [[0.2,0.2],[0.2,0.2]]",
            ScenarioKind::Form => "P: [[0.4,0.2],[0.2,0.1]] -> [[0.3,0.1],[0.1,0.3]]",
            ScenarioKind::Fragment => "P: [[0.3,0.1],[0.1,0.3]] -> [[0.4,0.2],[0.2,0.1]]",
        }
    }
}

impl std::fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Relative community sizes (n1/n, n2/n) for two-community scenarios.
/// The study grid allows fractions in {0.1, 0.25, 0.5, 0.75, 0.9}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeConfiguration {
    first: f64,
}

impl NodeConfiguration {
    const GRID: [f64; 5] = [0.1, 0.25, 0.5, 0.75, 0.9];

    pub fn new(first: f64, second: f64) -> Result<Self, GeneratorError> {
        let on_grid = |x: f64| Self::GRID.iter().any(|&g| (g - x).abs() < 1e-12);
        if !on_grid(first) || !on_grid(second) || (first + second - 1.0).abs() > 1e-12 {
            return Err(GeneratorError::InvalidNodeConfiguration(first, second));
        }
        Ok(NodeConfiguration { first })
    }

    pub fn balanced() -> Self {
        NodeConfiguration { first: 0.5 }
    }

    pub fn fractions(&self) -> (f64, f64) {
        (self.first, 1.0 - self.first)
    }

    /// Community sizes at network size `n` (the grid keeps them integral
    /// for the study sizes 40 and 100).
    pub fn sizes(&self, n: usize) -> (usize, usize) {
        let n1 = (self.first * n as f64).round() as usize;
        (n1, n - n1)
    }

    /// Parse "50-50", "25-75", "10-90" style percent pairs.
    pub fn parse(text: &str) -> Result<Self, GeneratorError> {
        let bad = || GeneratorError::InvalidNodeConfiguration(f64::NAN, f64::NAN);
        let (a, b) = text.split_once('-').ok_or_else(bad)?;
        let a: f64 = a.trim().parse().map_err(|_| bad())?;
        let b: f64 = b.trim().parse().map_err(|_| bad())?;
        NodeConfiguration::new(a / 100.0, b / 100.0)
    }
}

impl std::fmt::Display for NodeConfiguration {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (a, b) = self.fractions();
        write!(f, "{:.0}-{:.0}", a * 100.0, b * 100.0)
    }
}

/// A fully parameterized change scenario: the baseline model before
/// `t_star`, the changed model from `t_star` on, and the community
/// structure the model-based monitors are entitled to know about.
///
/// The monitoring labels can differ from the generation labels: the local
/// change is generated with a two-block propensity structure, but the
/// network is conceptually one community and is monitored as such.
#[derive(Debug, Clone, PartialEq)]
pub struct ChangeScenario {
    pub kind: ScenarioKind,
    pub baseline: DcsbmModel,
    pub changed: DcsbmModel,
    pub t_star: usize,
    monitor_labels: Vec<usize>,
    monitor_k: usize,
}

impl ChangeScenario {
    /// Assemble a scenario from explicit models (for scenarios outside
    /// the catalog). The models must agree on node count and alpha, and
    /// the monitoring labels must cover every node.
    pub fn custom(
        kind: ScenarioKind,
        baseline: DcsbmModel,
        changed: DcsbmModel,
        t_star: usize,
        monitor_labels: Vec<usize>,
    ) -> Result<Self, GeneratorError> {
        let n = baseline.params.node_count();
        if changed.params.node_count() != n || monitor_labels.len() != n {
            return Err(GeneratorError::DimensionMismatch {
                prev: changed.params.node_count(),
                model: n,
            });
        }
        if baseline.alpha() != changed.alpha() {
            return Err(GeneratorError::AlphaOutOfRange(changed.alpha()));
        }
        let monitor_k = monitor_labels.iter().max().map_or(1, |&m| m + 1);
        Ok(ChangeScenario {
            kind,
            baseline,
            changed,
            t_star,
            monitor_labels,
            monitor_k,
        })
    }

    pub fn node_count(&self) -> usize {
        self.baseline.params.node_count()
    }

    /// Ground-truth community labels for the model-based monitors.
    pub fn monitor_labels(&self) -> &[usize] {
        &self.monitor_labels
    }

    /// Number of communities the monitors chart.
    pub fn monitor_community_count(&self) -> usize {
        self.monitor_k
    }

    /// Move the change time (the catalog default is 201, the study layout).
    pub fn with_change_time(mut self, t_star: usize) -> Self {
        self.t_star = t_star;
        self
    }
}

/// Per-pair Poisson samplers of one model, precomputed once so a long
/// sequence does not rebuild the distributions at every step.
struct PairSampler {
    n: usize,
    alpha: f64,
    dists: Vec<Option<Poisson<f64>>>,
}

impl PairSampler {
    fn new(model: &DcsbmModel) -> Self {
        let params = &model.params;
        let n = params.node_count();
        let mut dists = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                let mean = params.pair_mean(i, j);
                dists.push(
                    (mean > 0.0).then(|| Poisson::new(mean).expect("positive finite mean")),
                );
            }
        }
        PairSampler {
            n,
            alpha: model.alpha,
            dists,
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Graph {
        let mut g = Graph::empty(self.n);
        let mut idx = 0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if let Some(d) = &self.dists[idx] {
                    let w = d.sample(rng) as u32;
                    if w > 0 {
                        g.set_pair(i, j, w);
                    }
                }
                idx += 1;
            }
        }
        g
    }

    fn evolve<R: Rng + ?Sized>(&self, prev: &Graph, rng: &mut R) -> Graph {
        let mut g = Graph::empty(self.n);
        let mut idx = 0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let w = if rng.random::<f64>() < self.alpha {
                    match &self.dists[idx] {
                        Some(d) => d.sample(rng) as u32,
                        None => 0,
                    }
                } else {
                    prev.get(i, j)
                };
                if w > 0 {
                    g.set_pair(i, j, w);
                }
                idx += 1;
            }
        }
        g
    }
}

/// Generate an ordered sequence of `len` snapshots. The model in effect
/// at time t (1-based) is the baseline for `t < t_star` and the changed
/// model for `t >= t_star`; the first snapshot is drawn fresh from the
/// model in effect at t = 1 and later snapshots evolve from their
/// predecessor.
pub fn generate_sequence<R: Rng + ?Sized>(
    scenario: &ChangeScenario,
    len: usize,
    rng: &mut R,
) -> Result<Vec<Graph>, GeneratorError> {
    if scenario.t_star < 1 || scenario.t_star > len + 1 {
        return Err(GeneratorError::ChangeTimeOutOfRange {
            t_star: scenario.t_star,
            max: len + 1,
        });
    }
    let baseline = PairSampler::new(&scenario.baseline);
    let changed = PairSampler::new(&scenario.changed);
    let sampler_at = |t: usize| {
        if t < scenario.t_star {
            &baseline
        } else {
            &changed
        }
    };
    let mut graphs: Vec<Graph> = Vec::with_capacity(len);
    for t in 1..=len {
        let sampler = sampler_at(t);
        let g = match graphs.last() {
            None => sampler.sample(rng),
            Some(prev) => sampler.evolve(prev, rng),
        };
        graphs.push(g);
    }
    Ok(graphs)
}

/// Size-rescaling factor map: entry (r,s) of the n=40 matrix is multiplied
/// by `sizes40`-to-`sizes` ratios that preserve each node's expected degree
/// under the baseline skeleton (theta pinned at 1). Diagonal entries scale
/// by (n_r - 1)/(n'_r - 1) and off-diagonal entries by n_s/n'_s.
fn rescale_matrix(p40: &[Vec<f64>], sizes40: &[usize], sizes: &[usize]) -> Vec<Vec<f64>> {
    let k = p40.len();
    let mut out = vec![vec![0.0; k]; k];
    for r in 0..k {
        for s in 0..k {
            let factor = if r == s {
                (sizes40[r] as f64 - 1.0) / (sizes[r] as f64 - 1.0)
            } else {
                sizes40[s] as f64 / sizes[s] as f64
            };
            out[r][s] = p40[r][s] * factor;
        }
    }
    out
}

/// The reference network size at which the catalog matrices are stated.
const REFERENCE_N: usize = 40;

/// Baseline draw range for the degree parameters.
const THETA_RANGE: (f64, f64) = (0.5, 1.5);
/// Post-change draw range for the propensity scenario.
const THETA_RANGE_CHANGED: (f64, f64) = (0.5, 3.0);

/// Change time of the study layout: 200 baseline snapshots, change at 201.
const STUDY_CHANGE_TIME: usize = 201;

/// Build a catalog scenario. The propensity matrices are stated at n = 40
/// and rescaled for other sizes so that every node's expected degree under
/// the baseline is preserved; degree parameters are drawn fresh from `rng`
/// (once per replication) and shared between the baseline and changed
/// models except in the propensity scenario, which redraws them.
pub fn scenario_catalog<R: Rng + ?Sized>(
    kind: ScenarioKind,
    n: usize,
    alpha: f64,
    node_config: NodeConfiguration,
    rng: &mut R,
) -> Result<ChangeScenario, GeneratorError> {
    // Generation-block structure: community sizes at the reference size
    // and at n, plus the baseline/changed matrices stated at n = 40.
    struct Blueprint {
        sizes40: Vec<usize>,
        sizes: Vec<usize>,
        p_base: Vec<Vec<f64>>,
        p_changed: Vec<Vec<f64>>,
        monitor_k: usize,
    }

    let two_community = |p_base: Vec<Vec<f64>>, p_changed: Vec<Vec<f64>>| {
        let (a40, b40) = node_config.sizes(REFERENCE_N);
        let (a, b) = node_config.sizes(n);
        Blueprint {
            sizes40: vec![a40, b40],
            sizes: vec![a, b],
            p_base,
            p_changed,
            monitor_k: 2,
        }
    };

    let bp = match kind {
        ScenarioKind::NoChange => Blueprint {
            sizes40: vec![REFERENCE_N],
            sizes: vec![n],
            p_base: vec![vec![0.2]],
            p_changed: vec![vec![0.2]],
            monitor_k: 1,
        },
        ScenarioKind::Global => Blueprint {
            sizes40: vec![REFERENCE_N],
            sizes: vec![n],
            p_base: vec![vec![0.2]],
            p_changed: vec![vec![0.25]],
            monitor_k: 1,
        },
        ScenarioKind::Propensity => Blueprint {
            sizes40: vec![REFERENCE_N],
            sizes: vec![n],
            p_base: vec![vec![0.2]],
            p_changed: vec![vec![0.2]],
            monitor_k: 1,
        },
        ScenarioKind::Local => {
            // Anomalous block: the first n/5 nodes. The network is
            // conceptually one community, so both matrices rescale by the
            // single-community factor and only the within-block entry rises.
            let block = n / 5;
            Blueprint {
                sizes40: vec![REFERENCE_N], // placeholder, unused for local
                sizes: vec![block, n - block],
                p_base: vec![vec![0.2, 0.2], vec![0.2, 0.2]],
                p_changed: vec![vec![0.4, 0.2], vec![0.2, 0.2]],
                monitor_k: 1,
            }
        }
        ScenarioKind::Intensified => two_community(
            vec![vec![0.3, 0.1], vec![0.1, 0.3]],
            vec![vec![0.4, 0.1], vec![0.1, 0.3]],
        ),
        ScenarioKind::Split => two_community(
            vec![vec![0.2, 0.2], vec![0.2, 0.2]],
            vec![vec![0.3, 0.1], vec![0.1, 0.3]],
        ),
        ScenarioKind::Merge => two_community(
            vec![vec![0.3, 0.1], vec![0.1, 0.3]],
            vec![vec![0.2, 0.2], vec![0.2, 0.2]],
        ),
        ScenarioKind::Form => two_community(
            vec![vec![0.4, 0.2], vec![0.2, 0.1]],
            vec![vec![0.3, 0.1], vec![0.1, 0.3]],
        ),
        ScenarioKind::Fragment => two_community(
            vec![vec![0.3, 0.1], vec![0.1, 0.3]],
            vec![vec![0.4, 0.2], vec![0.2, 0.1]],
        ),
    };

    let (p_base, p_changed) = if kind == ScenarioKind::Local {
        // Conceptually a single community: every entry rescales by the
        // one-community factor (n40 - 1)/(n - 1).
        let factor = (REFERENCE_N as f64 - 1.0) / (n as f64 - 1.0);
        let scale = |m: &[Vec<f64>]| {
            m.iter()
                .map(|row| row.iter().map(|&p| p * factor).collect())
                .collect::<Vec<Vec<f64>>>()
        };
        (scale(&bp.p_base), scale(&bp.p_changed))
    } else if n == REFERENCE_N {
        (bp.p_base.clone(), bp.p_changed.clone())
    } else {
        (
            rescale_matrix(&bp.p_base, &bp.sizes40, &bp.sizes),
            rescale_matrix(&bp.p_changed, &bp.sizes40, &bp.sizes),
        )
    };

    let gen_k = bp.sizes.len();
    let mut labels = Vec::with_capacity(n);
    for (community, &size) in bp.sizes.iter().enumerate() {
        labels.extend(std::iter::repeat_n(community, size));
    }

    let theta = sample_theta(n, &labels, gen_k, THETA_RANGE.0, THETA_RANGE.1, rng)?;
    let theta_changed = if kind == ScenarioKind::Propensity {
        sample_theta(
            n,
            &labels,
            gen_k,
            THETA_RANGE_CHANGED.0,
            THETA_RANGE_CHANGED.1,
            rng,
        )?
    } else {
        theta.clone()
    };

    let baseline = DcsbmModel::new(
        DcsbmParams::new(gen_k, labels.clone(), p_base, theta)?,
        alpha,
    )?;
    let changed = DcsbmModel::new(
        DcsbmParams::new(gen_k, labels.clone(), p_changed, theta_changed)?,
        alpha,
    )?;

    let monitor_labels = if bp.monitor_k == 1 {
        vec![0; n]
    } else {
        labels
    };

    Ok(ChangeScenario {
        kind,
        baseline,
        changed,
        t_star: STUDY_CHANGE_TIME,
        monitor_labels,
        monitor_k: bp.monitor_k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn scale_theta_uniform_input_gives_ones() {
        let labels = vec![0, 0, 1, 1, 1];
        let out = scale_theta(&[0.7; 5], &labels, 2).unwrap();
        for t in out {
            assert_abs_diff_eq!(t, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn scale_theta_single_community_example() {
        let out = scale_theta(&[1.0, 1.0, 1.0, 5.0], &[0, 0, 0, 0], 1).unwrap();
        assert_abs_diff_eq!(out[0], 0.5);
        assert_abs_diff_eq!(out[1], 0.5);
        assert_abs_diff_eq!(out[2], 0.5);
        assert_abs_diff_eq!(out[3], 2.5);
    }

    #[test]
    fn scale_theta_rejects_non_positive() {
        let err = scale_theta(&[1.0, 0.0], &[0, 0], 1).unwrap_err();
        assert_eq!(err, GeneratorError::NonPositiveTheta(1));
    }

    #[test]
    fn scale_theta_community_sums_match_sizes() {
        let mut r = rng(3);
        for _ in 0..50 {
            let labels: Vec<usize> = (0..20).map(|_| r.random_range(0..3usize)).collect();
            if (0..3).any(|c| !labels.contains(&c)) {
                continue;
            }
            let raw: Vec<f64> = (0..20).map(|_| r.random_range(0.1..5.0)).collect();
            let theta = scale_theta(&raw, &labels, 3).unwrap();
            for c in 0..3 {
                let size = labels.iter().filter(|&&l| l == c).count() as f64;
                let sum: f64 = theta
                    .iter()
                    .zip(&labels)
                    .filter(|(_, &l)| l == c)
                    .map(|(&t, _)| t)
                    .sum();
                assert_abs_diff_eq!(sum, size, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn sample_theta_degenerate_range_gives_ones() {
        let labels = vec![0; 6];
        let theta = sample_theta(6, &labels, 1, 1.0, 1.0 + 1e-12, &mut rng(1)).unwrap();
        for t in theta {
            assert_abs_diff_eq!(t, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn sample_graph_with_zero_propensity_is_empty() {
        let params = DcsbmParams::new(1, vec![0; 8], vec![vec![0.0]], vec![1.0; 8]).unwrap();
        let g = sample_graph(&params, &mut rng(9));
        assert_eq!(g.binary_edge_count(), 0);
    }

    #[test]
    fn sample_graph_er_mean_degree() {
        // theta = 1, k = 1, p = 0.2, n = 40: expected node degree 7.8.
        let params = DcsbmParams::new(1, vec![0; 40], vec![vec![0.2]], vec![1.0; 40]).unwrap();
        let mut r = rng(11);
        let reps = 2000;
        let mut total = 0.0;
        for _ in 0..reps {
            let g = sample_graph(&params, &mut r);
            let deg_sum: u64 = (0..40).map(|v| g.weighted_degree(v)).sum();
            total += deg_sum as f64 / 40.0;
        }
        let mean = total / reps as f64;
        // SD of the per-graph average degree is about 0.62, so the mean of
        // 2000 draws has standard error about 0.014.
        assert!((mean - 7.8).abs() < 0.06, "mean degree {mean}");
    }

    #[test]
    fn sample_graph_pair_mean_spot_check() {
        let labels = vec![0, 0, 1, 1];
        let theta = scale_theta(&[0.5, 1.5, 1.0, 1.0], &labels, 2).unwrap();
        let params = DcsbmParams::new(
            2,
            labels,
            vec![vec![0.5, 0.2], vec![0.2, 0.4]],
            theta.clone(),
        )
        .unwrap();
        let mut r = rng(13);
        let reps = 10_000;
        let mut sum01 = 0u64;
        let mut sum02 = 0u64;
        for _ in 0..reps {
            let g = sample_graph(&params, &mut r);
            sum01 += g.get(0, 1) as u64;
            sum02 += g.get(0, 2) as u64;
        }
        let want01 = theta[0] * theta[1] * 0.5;
        let want02 = theta[0] * theta[2] * 0.2;
        let se = |lambda: f64| (lambda / reps as f64).sqrt();
        assert!((sum01 as f64 / reps as f64 - want01).abs() < 4.0 * se(want01));
        assert!((sum02 as f64 / reps as f64 - want02).abs() < 4.0 * se(want02));
    }

    fn er_model(n: usize, p: f64, alpha: f64) -> DcsbmModel {
        let params = DcsbmParams::new(1, vec![0; n], vec![vec![p]], vec![1.0; n]).unwrap();
        DcsbmModel::new(params, alpha).unwrap()
    }

    #[test]
    fn evolve_alpha_zero_copies_exactly() {
        let model = er_model(12, 0.3, 0.0);
        let mut r = rng(17);
        let prev = sample_graph(&model.params, &mut r);
        let next = evolve(&prev, &model, &mut r).unwrap();
        assert_eq!(prev, next);
    }

    #[test]
    fn evolve_alpha_one_ignores_previous() {
        // With P = 0 every refreshed pair is 0; alpha = 1 must erase prev.
        let model = er_model(10, 0.0, 1.0);
        let prev = Graph::from_edges(10, &[(0, 1), (2, 3), (4, 5)]).unwrap();
        let next = evolve(&prev, &model, &mut rng(19)).unwrap();
        assert_eq!(next.binary_edge_count(), 0);
    }

    #[test]
    fn evolve_copy_fraction_matches_alpha() {
        // Previous graph has every pair set to 1; the model draws fresh
        // zeros (P = 0), so surviving ones mark copied pairs.
        let n = 30;
        let pairs = n * (n - 1) / 2;
        let model = er_model(n, 0.0, 0.5);
        let mut prev = Graph::empty(n);
        for i in 0..n {
            for j in (i + 1)..n {
                prev.set_pair(i, j, 1);
            }
        }
        let mut copied = 0u64;
        let mut total = 0u64;
        let mut r = rng(23);
        for _ in 0..200 {
            let next = evolve(&prev, &model, &mut r).unwrap();
            copied += next.binary_edge_count() as u64;
            total += pairs as u64;
        }
        let frac = copied as f64 / total as f64;
        // 87,000 fair coins: 4 standard errors is about 0.007.
        assert!((frac - 0.5).abs() < 0.007, "copy fraction {frac}");
    }

    #[test]
    fn evolve_dimension_mismatch_errors() {
        let model = er_model(5, 0.2, 0.5);
        let prev = Graph::empty(4);
        assert!(matches!(
            evolve(&prev, &model, &mut rng(1)),
            Err(GeneratorError::DimensionMismatch { prev: 4, model: 5 })
        ));
    }

    #[test]
    fn sequence_layout_and_determinism() {
        let mut r = rng(31);
        let scenario = scenario_catalog(
            ScenarioKind::Global,
            40,
            1.0,
            NodeConfiguration::balanced(),
            &mut r,
        )
        .unwrap();
        assert_eq!(scenario.t_star, 201);
        let scenario = scenario.with_change_time(3);
        let a = generate_sequence(&scenario, 5, &mut rng(77)).unwrap();
        let b = generate_sequence(&scenario, 5, &mut rng(77)).unwrap();
        assert_eq!(a.len(), 5);
        assert_eq!(a, b);
    }

    #[test]
    fn sequence_with_immediate_change_draws_from_changed_model() {
        // Baseline P = 0.2, changed P = 0; t_star = 1 must produce empty
        // graphs from the start.
        let base = er_model(10, 0.2, 1.0);
        let changed = er_model(10, 0.0, 1.0);
        let scenario = ChangeScenario {
            kind: ScenarioKind::Global,
            baseline: base,
            changed,
            t_star: 1,
            monitor_labels: vec![0; 10],
            monitor_k: 1,
        };
        let graphs = generate_sequence(&scenario, 4, &mut rng(41)).unwrap();
        for g in graphs {
            assert_eq!(g.binary_edge_count(), 0);
        }
    }

    #[test]
    fn sequence_rejects_bad_change_time() {
        let mut r = rng(5);
        let scenario = scenario_catalog(
            ScenarioKind::NoChange,
            40,
            1.0,
            NodeConfiguration::balanced(),
            &mut r,
        )
        .unwrap()
        .with_change_time(7);
        assert!(matches!(
            generate_sequence(&scenario, 5, &mut r),
            Err(GeneratorError::ChangeTimeOutOfRange { t_star: 7, max: 6 })
        ));
    }

    #[test]
    fn no_change_scenario_has_identical_models() {
        let scenario = scenario_catalog(
            ScenarioKind::NoChange,
            40,
            0.5,
            NodeConfiguration::balanced(),
            &mut rng(43),
        )
        .unwrap();
        assert_eq!(scenario.baseline, scenario.changed);
    }

    #[test]
    fn catalog_global_at_reference_size() {
        let s = scenario_catalog(
            ScenarioKind::Global,
            40,
            1.0,
            NodeConfiguration::balanced(),
            &mut rng(47),
        )
        .unwrap();
        assert_abs_diff_eq!(s.baseline.params.propensity(0, 0), 0.2);
        assert_abs_diff_eq!(s.changed.params.propensity(0, 0), 0.25);
        assert_eq!(s.monitor_community_count(), 1);
    }

    #[test]
    fn catalog_global_rescaled_preserves_expected_degree() {
        let s = scenario_catalog(
            ScenarioKind::Global,
            100,
            1.0,
            NodeConfiguration::balanced(),
            &mut rng(53),
        )
        .unwrap();
        // 0.2 * 39/99 preserves the expected degree 7.8 exactly.
        assert_abs_diff_eq!(
            s.baseline.params.propensity(0, 0),
            0.2 * 39.0 / 99.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            s.baseline.params.skeleton_expected_degrees()[0],
            7.8,
            epsilon = 1e-9
        );
    }

    #[test]
    fn catalog_merge_matrices() {
        let s = scenario_catalog(
            ScenarioKind::Merge,
            40,
            1.0,
            NodeConfiguration::balanced(),
            &mut rng(59),
        )
        .unwrap();
        let b = &s.baseline.params;
        let c = &s.changed.params;
        assert_abs_diff_eq!(b.propensity(0, 0), 0.3);
        assert_abs_diff_eq!(b.propensity(0, 1), 0.1);
        assert_abs_diff_eq!(b.propensity(1, 1), 0.3);
        assert_abs_diff_eq!(c.propensity(0, 0), 0.2);
        assert_abs_diff_eq!(c.propensity(0, 1), 0.2);
        assert_abs_diff_eq!(c.propensity(1, 1), 0.2);
        assert_eq!(s.monitor_community_count(), 2);
        assert_eq!(s.monitor_labels().iter().filter(|&&l| l == 0).count(), 20);
    }

    #[test]
    fn catalog_local_block_is_first_fifth() {
        let s = scenario_catalog(
            ScenarioKind::Local,
            40,
            1.0,
            NodeConfiguration::balanced(),
            &mut rng(61),
        )
        .unwrap();
        let c = &s.changed.params;
        assert_abs_diff_eq!(c.propensity(0, 0), 0.4);
        assert_abs_diff_eq!(c.propensity(0, 1), 0.2);
        assert_abs_diff_eq!(c.propensity(1, 1), 0.2);
        assert_eq!(c.labels().iter().filter(|&&l| l == 0).count(), 8);
        assert!(c.labels()[..8].iter().all(|&l| l == 0));
        // Monitored as one community.
        assert_eq!(s.monitor_community_count(), 1);
        assert!(s.monitor_labels().iter().all(|&l| l == 0));
    }

    #[test]
    fn catalog_expected_degree_preserved_across_sizes() {
        for kind in ScenarioKind::ALL {
            let configs: &[NodeConfiguration] = if kind.is_two_community() {
                &[
                    NodeConfiguration::new(0.5, 0.5).unwrap(),
                    NodeConfiguration::new(0.25, 0.75).unwrap(),
                    NodeConfiguration::new(0.1, 0.9).unwrap(),
                ]
            } else {
                &[NodeConfiguration::balanced()]
            };
            for &nc in configs {
                let mut r = rng(67);
                let s40 = scenario_catalog(kind, 40, 1.0, nc, &mut r).unwrap();
                let s100 = scenario_catalog(kind, 100, 1.0, nc, &mut r).unwrap();
                let d40 = s40.baseline.params.skeleton_expected_degrees();
                let d100 = s100.baseline.params.skeleton_expected_degrees();
                // Compare one representative node per generation block.
                let l40 = s40.baseline.params.labels();
                let l100 = s100.baseline.params.labels();
                for c in 0..s40.baseline.params.community_count() {
                    let i40 = l40.iter().position(|&l| l == c).unwrap();
                    let i100 = l100.iter().position(|&l| l == c).unwrap();
                    let (a, b) = (d40[i40], d100[i100]);
                    assert!(
                        (a - b).abs() / a < 0.02,
                        "{kind:?} {nc}: degree {a} vs {b}"
                    );
                }
            }
        }
    }

    #[test]
    fn catalog_propensity_redraws_theta() {
        let s = scenario_catalog(
            ScenarioKind::Propensity,
            40,
            1.0,
            NodeConfiguration::balanced(),
            &mut rng(71),
        )
        .unwrap();
        assert_ne!(s.baseline.params.theta(), s.changed.params.theta());
        let sum: f64 = s.changed.params.theta().iter().sum();
        assert_abs_diff_eq!(sum, 40.0, epsilon = 1e-9);
    }

    #[test]
    fn unknown_scenario_name_errors() {
        assert!(matches!(
            ScenarioKind::parse("globel"),
            Err(GeneratorError::UnknownScenario(_))
        ));
    }

    #[test]
    fn node_configuration_parse_and_display() {
        let nc = NodeConfiguration::parse("25-75").unwrap();
        assert_eq!(nc.sizes(40), (10, 30));
        assert_eq!(nc.to_string(), "25-75");
        assert!(NodeConfiguration::parse("30-70").is_err());
    }
}
