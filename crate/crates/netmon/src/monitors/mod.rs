//! The fifteen monitoring methods behind a common fit/update lifecycle.
//!
//! Methods 1..=12 are EWMA charts on the twelve global summary statistics,
//! method 13 is the moving-window scan statistic, method 14 charts the
//! estimated block propensities with Shewhart limits, and method 15 charts
//! the ilr-transformed degree-parameter estimates with a Hotelling T²
//! statistic per community. The ids are the stable public identifiers
//! used in configs and output files.

use std::cell::OnceCell;

use thiserror::Error;

use crate::graph::{summary_vector, Graph, StatisticKind, SummaryVector};

mod ewma;
pub mod fdist;
mod scan;
mod shewhart;
mod t2;

pub use ewma::{EwmaMonitor, EwmaState};
pub use fdist::f_quantile;
pub use scan::ScanMonitor;
pub use shewhart::{estimate_p_hat, ShewhartPMonitor, ShewhartPState};
pub use t2::{estimate_theta_hat, ilr_transform, T2Core, T2Monitor};

/// EWMA smoothing parameter for methods 1..=12.
pub const EWMA_LAMBDA: f64 = 0.5;

/// Floor applied to a fitted standard deviation of zero, so chart limits
/// stay defined; any deviation from a degenerate baseline then signals.
pub(crate) const SIGMA_FLOOR: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum MonitorError {
    #[error("monitor {0} out of range 1..=15")]
    UnknownId(u8),
    #[error("monitor {0} requires community labels")]
    LabelsRequired(u8),
    #[error("phase I needs at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },
    #[error("smoothing parameter {0} outside (0, 1]")]
    InvalidLambda(f64),
    #[error("labels are empty")]
    EmptyLabels,
    #[error("community {0} has no members")]
    EmptyCommunity(usize),
    #[error("community {0} has zero total degree")]
    ZeroCommunityDegree(usize),
    #[error("degree-parameter estimate at index {0} is not strictly positive")]
    NonPositiveThetaHat(usize),
    #[error("phase I length {m} must exceed community size {n_r} (community {community})")]
    PhaseTooShort {
        community: usize,
        m: usize,
        n_r: usize,
    },
    #[error("singular successive-difference covariance in community {0}")]
    SingularCovariance(usize),
    #[error("invalid F-distribution parameters: p={p}, d1={d1}, d2={d2}")]
    InvalidFParameters { p: f64, d1: u64, d2: u64 },
    #[error("monitor not fitted")]
    NotFitted,
}

/// Monitor identifier, 1..=15, matching the study's numbering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MonitorId(u8);

impl MonitorId {
    pub fn new(id: u8) -> Result<Self, MonitorError> {
        if (1..=15).contains(&id) {
            Ok(MonitorId(id))
        } else {
            Err(MonitorError::UnknownId(id))
        }
    }

    /// All fifteen ids in order.
    pub fn all() -> impl Iterator<Item = MonitorId> {
        (1..=15).map(MonitorId)
    }

    pub fn get(self) -> u8 {
        self.0
    }

    /// Short method name.
    pub fn name(self) -> &'static str {
        match self.0 {
            1 => "avg. degree",
            2 => "avg. eigenvector",
            3 => "avg. betweenness",
            4 => "max betweenness",
            5 => "avg. closeness",
            6 => "max.closeness",
            7 => "global.cluster.coeff",
            8 => "avg.local.cluster.coeff",
            9 => "diameter",
            10 => "avg.shortest.path",
            11 => "max.shortest.path",
            12 => "assortativity",
            13 => "Priebe",
            14 => "Wilson",
            15 => "Yu",
            _ => unreachable!(),
        }
    }

    /// One-line description.
    pub fn description(self) -> &'static str {
        match self.0 {
            1 => "EWMA chart on averaged degree over all nodes",
            2 => "EWMA chart on averaged eigenvector centrality over all nodes",
            3 => "EWMA chart on averaged betweenness over all nodes",
            4 => "EWMA chart on maximum betweenness over all nodes",
            5 => "EWMA chart on averaged closeness over all nodes",
            6 => "EWMA chart on maximum closeness over all nodes",
            7 => "EWMA chart on the global clustering coefficient",
            8 => "EWMA chart on the averaged local clustering coefficient",
            9 => "EWMA chart on the diameter (largest geodesic distance)",
            10 => "EWMA chart on shortest path length averaged over node pairs",
            11 => "EWMA chart on maximum shortest path averaged over all nodes",
            12 => "EWMA chart on assortativity",
            13 => "moving-window scan statistics on neighborhood edge counts",
            14 => "Shewhart charts on the estimated block propensity matrix",
            15 => "compositional T² chart on degree-parameter estimates",
            _ => unreachable!(),
        }
    }

    /// Statistic kind charted by the EWMA methods (ids 1..=12).
    pub fn statistic_kind(self) -> Option<StatisticKind> {
        (self.0 <= 12).then(|| StatisticKind::ALL[self.0 as usize - 1])
    }

    /// Whether the method needs community labels (ids 14 and 15).
    pub fn needs_labels(self) -> bool {
        self.0 >= 14
    }
}

impl std::fmt::Display for MonitorId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Validated community labels: contiguous ids 0..k, every community
/// non-empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommunityLabels {
    labels: Vec<usize>,
    sizes: Vec<usize>,
}

impl CommunityLabels {
    pub fn new(labels: &[usize]) -> Result<Self, MonitorError> {
        if labels.is_empty() {
            return Err(MonitorError::EmptyLabels);
        }
        let k = labels.iter().max().unwrap() + 1;
        let mut sizes = vec![0usize; k];
        for &c in labels {
            sizes[c] += 1;
        }
        if let Some(r) = sizes.iter().position(|&s| s == 0) {
            return Err(MonitorError::EmptyCommunity(r));
        }
        Ok(CommunityLabels {
            labels: labels.to_vec(),
            sizes,
        })
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn community_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn size(&self, r: usize) -> usize {
        self.sizes[r]
    }

    /// Node indices of community `r`, in index order.
    pub fn members(&self, r: usize) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == r)
            .map(|(i, _)| i)
            .collect()
    }
}

/// One network observation, with the summary-statistic vector computed
/// lazily and shared among all EWMA charts reading the same snapshot.
pub struct Observation<'a> {
    graph: &'a Graph,
    summary: OnceCell<SummaryVector>,
}

impl<'a> Observation<'a> {
    pub fn new(graph: &'a Graph) -> Self {
        Observation {
            graph,
            summary: OnceCell::new(),
        }
    }

    pub fn graph(&self) -> &Graph {
        self.graph
    }

    pub fn summary(&self) -> &SummaryVector {
        self.summary.get_or_init(|| summary_vector(self.graph))
    }
}

/// The common lifecycle: fit once on the Phase I observations, then feed
/// each Phase II observation and read back signal / no-signal.
pub trait Monitor {
    fn id(&self) -> MonitorId;

    fn fit(&mut self, phase1: &[Observation<'_>]) -> Result<(), MonitorError>;

    /// Process one Phase II observation; true means the chart signals.
    fn update(&mut self, obs: &Observation<'_>) -> bool;
}

/// Construct the monitor for `id`. Methods 14 and 15 require community
/// labels; the others ignore them.
pub fn make_monitor(
    id: MonitorId,
    labels: Option<&[usize]>,
) -> Result<Box<dyn Monitor>, MonitorError> {
    match id.get() {
        1..=12 => Ok(Box::new(EwmaMonitor::new(id, EWMA_LAMBDA)?)),
        13 => Ok(Box::new(ScanMonitor::new())),
        14 => {
            let labels = labels.ok_or(MonitorError::LabelsRequired(14))?;
            Ok(Box::new(ShewhartPMonitor::new(CommunityLabels::new(
                labels,
            )?)))
        }
        15 => {
            let labels = labels.ok_or(MonitorError::LabelsRequired(15))?;
            Ok(Box::new(T2Monitor::new(CommunityLabels::new(labels)?)))
        }
        _ => unreachable!("MonitorId is validated at construction"),
    }
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (divisor m - 1); 0 for fewer than 2 values.
pub(crate) fn sample_sd(values: &[f64]) -> f64 {
    let m = values.len();
    if m < 2 {
        return 0.0;
    }
    let mu = mean(values);
    let ss: f64 = values.iter().map(|v| (v - mu) * (v - mu)).sum();
    (ss / (m - 1) as f64).sqrt()
}
