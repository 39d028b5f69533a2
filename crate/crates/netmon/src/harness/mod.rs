//! Experiment orchestration: replications, detection metrics, and the
//! study grid.
//!
//! Each replication generates `phase1_len` baseline snapshots followed by
//! `phase2_len` post-change snapshots, fits every monitor on Phase I, and
//! streams Phase II recording the first signal index (the run length) per
//! monitor. Replications derive their seeds from (master seed, cell key,
//! replication index), so results are bit-reproducible regardless of
//! thread count and merge-order independent across partitions of the
//! replication range.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::community::{self, CommunityError};
use crate::generator::{
    generate_sequence, scenario_catalog, ChangeScenario, GeneratorError, NodeConfiguration,
    ScenarioKind,
};
use crate::graph::Graph;
use crate::monitors::{make_monitor, Monitor, MonitorError, MonitorId, Observation};
use crate::seed;

pub mod output;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error(transparent)]
    Community(#[from] CommunityError),
    #[error(transparent)]
    Monitor(#[from] MonitorError),
    #[error("failed to build thread pool: {0}")]
    ThreadPool(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed results file: {0}")]
    MalformedResults(String),
}

/// One experiment cell: a scenario at one point of the study grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: ScenarioKind,
    pub n: usize,
    pub alpha: f64,
    pub node_config: NodeConfiguration,
    /// Phase I length m.
    pub phase1_len: usize,
    /// Phase II (post-change) length.
    pub phase2_len: usize,
    /// Detection time limit d.
    pub detection_limit: usize,
    pub replications: usize,
    pub monitors: Vec<MonitorId>,
    pub known_labels: bool,
    pub master_seed: u64,
}

impl ExperimentConfig {
    /// Study defaults: m = 200 baseline snapshots, 50 post-change
    /// snapshots, detection limit 50, all fifteen monitors.
    pub fn new(scenario: ScenarioKind, n: usize, alpha: f64) -> Self {
        ExperimentConfig {
            scenario,
            n,
            alpha,
            node_config: NodeConfiguration::balanced(),
            phase1_len: 200,
            phase2_len: 50,
            detection_limit: 50,
            replications: 1000,
            monitors: MonitorId::all().collect(),
            known_labels: true,
            master_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let fail = |msg: String| Err(HarnessError::InvalidConfig(msg));
        if self.n != 40 && self.n != 100 {
            return fail(format!("n must be 40 or 100, got {}", self.n));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return fail(format!("alpha must lie in [0, 1], got {}", self.alpha));
        }
        if self.phase1_len < 2 {
            return fail(format!("phase1_len must be >= 2, got {}", self.phase1_len));
        }
        if self.detection_limit > self.phase2_len {
            return fail(format!(
                "detection limit {} exceeds phase2_len {}",
                self.detection_limit, self.phase2_len
            ));
        }
        if self.replications == 0 {
            return fail("replications must be >= 1".into());
        }
        if self.monitors.is_empty() {
            return fail("at least one monitor is required".into());
        }
        Ok(())
    }

    /// Canonical key of the data-generating process of this cell; the
    /// per-replication seeds depend only on this and the master seed, so
    /// known- and unknown-label runs see identical network sequences.
    fn cell_key(&self) -> String {
        format!(
            "scenario={};n={};alpha={};nc={};m={};p2={}",
            self.scenario,
            self.n,
            self.alpha,
            self.node_config,
            self.phase1_len,
            self.phase2_len
        )
    }

    /// Displayed node configuration: two-community scenarios only.
    pub fn node_config_display(&self) -> Option<String> {
        self.scenario
            .is_two_community()
            .then(|| self.node_config.to_string())
    }
}

/// Per-replication outcome: the run length (index >= 1 of the first
/// Phase II signal, capped by the horizon) or no signal, per monitor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunResult {
    /// Parallel to the config's monitor list.
    pub run_lengths: Vec<Option<u32>>,
    /// True where the monitor could not be fitted on Phase I; such
    /// monitors record no signal.
    pub fit_errors: Vec<bool>,
}

/// Stream a generated sequence through freshly built monitors: fit on the
/// first `phase1_len` snapshots, then record the first signal index on
/// the rest. Phase I signals (possible only for the streaming scan
/// method) are discarded; only Phase II signals count toward run length.
pub fn evaluate_monitors(
    graphs: &[Graph],
    phase1_len: usize,
    monitor_ids: &[MonitorId],
    labels: &[usize],
) -> RunResult {
    let phase1: Vec<Observation> = graphs[..phase1_len].iter().map(Observation::new).collect();
    let mut monitors: Vec<Option<Box<dyn Monitor>>> = Vec::with_capacity(monitor_ids.len());
    let mut fit_errors = vec![false; monitor_ids.len()];
    for (slot, &id) in fit_errors.iter_mut().zip(monitor_ids) {
        let built = make_monitor(id, Some(labels)).and_then(|mut monitor| {
            monitor.fit(&phase1).map(|()| monitor)
        });
        match built {
            Ok(monitor) => monitors.push(Some(monitor)),
            Err(_) => {
                *slot = true;
                monitors.push(None);
            }
        }
    }

    let mut run_lengths = vec![None; monitor_ids.len()];
    let mut live = monitors.iter().filter(|m| m.is_some()).count();
    for (t, g) in graphs[phase1_len..].iter().enumerate() {
        if live == 0 {
            break;
        }
        let obs = Observation::new(g);
        for (i, monitor) in monitors.iter_mut().enumerate() {
            let Some(m) = monitor else { continue };
            if run_lengths[i].is_some() {
                continue;
            }
            if m.update(&obs) {
                run_lengths[i] = Some((t + 1) as u32);
                live -= 1;
            }
        }
    }
    RunResult {
        run_lengths,
        fit_errors,
    }
}

/// Run one replication of a cell: derive the replication seed, draw the
/// scenario's degree parameters, generate the sequence with the change at
/// `phase1_len + 1`, resolve community labels (ground truth or estimated
/// from the averaged Phase I network), and evaluate every monitor.
/// Deterministic given (config, index).
pub fn run_replication(cfg: &ExperimentConfig, index: u64) -> Result<RunResult, HarnessError> {
    let cell_seed = seed::derive(cfg.master_seed, &cfg.cell_key());
    let mut rng = ChaCha8Rng::seed_from_u64(seed::replication_seed(cell_seed, index));
    let scenario = scenario_catalog(cfg.scenario, cfg.n, cfg.alpha, cfg.node_config, &mut rng)?
        .with_change_time(cfg.phase1_len + 1);
    run_scenario_replication(&scenario, cfg, &mut rng)
}

/// As [`run_replication`], but on a caller-supplied scenario (the change
/// time is taken from the scenario itself).
pub fn run_scenario_replication(
    scenario: &ChangeScenario,
    cfg: &ExperimentConfig,
    rng: &mut ChaCha8Rng,
) -> Result<RunResult, HarnessError> {
    let total = cfg.phase1_len + cfg.phase2_len;
    let graphs = generate_sequence(scenario, total, rng)?;
    let labels: Vec<usize> = if cfg.known_labels {
        scenario.monitor_labels().to_vec()
    } else {
        let avg = community::average_graph(&graphs[..cfg.phase1_len])?;
        community::regularized_spectral(&avg, scenario.monitor_community_count(), rng)?
    };
    Ok(evaluate_monitors(
        &graphs,
        cfg.phase1_len,
        &cfg.monitors,
        &labels,
    ))
}

/// Fraction of replications with a run length in 1..=d.
pub fn detection_rate(run_lengths: &[Option<u32>], d: usize) -> f64 {
    if run_lengths.is_empty() {
        return 0.0;
    }
    let detected = run_lengths
        .iter()
        .filter(|rl| rl.is_some_and(|v| 1 <= v && v as usize <= d))
        .count();
    detected as f64 / run_lengths.len() as f64
}

/// Conditional expected delay: mean run length over replications with a
/// run length in 1..=d; undefined when there are none.
pub fn ced(run_lengths: &[Option<u32>], d: usize) -> Option<f64> {
    let detected: Vec<u32> = run_lengths
        .iter()
        .filter_map(|rl| rl.filter(|&v| 1 <= v && v as usize <= d))
        .collect();
    if detected.is_empty() {
        return None;
    }
    Some(detected.iter().map(|&v| v as f64).sum::<f64>() / detected.len() as f64)
}

/// Performance bands of the study's overview table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Good,
    Moderate,
    Poor,
    Unclassified,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Good => "good",
            Classification::Moderate => "moderate",
            Classification::Poor => "poor",
            Classification::Unclassified => "unclassified",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "good" => Some(Classification::Good),
            "moderate" => Some(Classification::Moderate),
            "poor" => Some(Classification::Poor),
            "unclassified" => Some(Classification::Unclassified),
            _ => None,
        }
    }

    /// Table symbol: good = double check, moderate = check, poor = cross,
    /// unclassified = dot.
    pub fn symbol(self) -> &'static str {
        match self {
            Classification::Good => "✓✓",
            Classification::Moderate => "✓",
            Classification::Poor => "×",
            Classification::Unclassified => "·",
        }
    }
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Band assignment: good needs a (near) 100% detection rate and CED below
/// 10; moderate needs at least 75% and CED in 10..=30; poor means the
/// rate never exceeds 25%. The bands are not exhaustive, so everything
/// else is unclassified rather than forced into a band.
pub fn classify(detection_rate: f64, ced: Option<f64>) -> Classification {
    match ced {
        Some(c) if detection_rate >= 0.99 && c < 10.0 => Classification::Good,
        Some(c) if detection_rate >= 0.75 && (10.0..=30.0).contains(&c) => {
            Classification::Moderate
        }
        _ if detection_rate <= 0.25 => Classification::Poor,
        _ => Classification::Unclassified,
    }
}

/// Aggregated metrics of one monitor in one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct MonitorSummary {
    pub monitor: MonitorId,
    pub replications: usize,
    pub detections: usize,
    pub detection_rate: f64,
    pub ced: Option<f64>,
    pub fit_errors: usize,
    pub classification: Classification,
}

/// All results of one cell: the raw run-length log (so metrics can be
/// recomputed without rerunning) plus the per-monitor summaries.
#[derive(Debug, Clone)]
pub struct CellResult {
    pub config: ExperimentConfig,
    /// `rl_log[replication][monitor]`.
    pub rl_log: Vec<Vec<Option<u32>>>,
    /// `fit_error_log[replication][monitor]`.
    pub fit_error_log: Vec<Vec<bool>>,
    pub summaries: Vec<MonitorSummary>,
}

impl CellResult {
    /// Run lengths of one monitor across replications.
    pub fn monitor_run_lengths(&self, position: usize) -> Vec<Option<u32>> {
        self.rl_log.iter().map(|rep| rep[position]).collect()
    }

    pub fn summary_for(&self, id: MonitorId) -> Option<&MonitorSummary> {
        self.summaries.iter().find(|s| s.monitor == id)
    }
}

/// Aggregate per-monitor metrics from replication results.
pub fn summarize(cfg: &ExperimentConfig, results: &[RunResult]) -> Vec<MonitorSummary> {
    cfg.monitors
        .iter()
        .enumerate()
        .map(|(i, &monitor)| {
            let rls: Vec<Option<u32>> = results.iter().map(|r| r.run_lengths[i]).collect();
            let rate = detection_rate(&rls, cfg.detection_limit);
            let delay = ced(&rls, cfg.detection_limit);
            let detections = rls
                .iter()
                .filter(|rl| rl.is_some_and(|v| v as usize <= cfg.detection_limit))
                .count();
            MonitorSummary {
                monitor,
                replications: results.len(),
                detections,
                detection_rate: rate,
                ced: delay,
                fit_errors: results.iter().filter(|r| r.fit_errors[i]).count(),
                classification: classify(rate, delay),
            }
        })
        .collect()
}

/// Worker pool for replications. `threads = 0` means the rayon default
/// (available parallelism).
pub struct WorkerPool {
    pool: Option<rayon::ThreadPool>,
}

impl WorkerPool {
    pub fn new(threads: usize) -> Result<Self, HarnessError> {
        let pool = if threads == 0 {
            None
        } else {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build()
                    .map_err(|e| HarnessError::ThreadPool(e.to_string()))?,
            )
        };
        Ok(WorkerPool { pool })
    }

    fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        match &self.pool {
            Some(pool) => pool.install(f),
            None => f(),
        }
    }
}

/// Run all replications of one cell (in parallel) and aggregate.
pub fn run_cell(cfg: &ExperimentConfig, pool: &WorkerPool) -> Result<CellResult, HarnessError> {
    cfg.validate()?;
    let results: Vec<RunResult> = pool.install(|| {
        (0..cfg.replications as u64)
            .into_par_iter()
            .map(|index| run_replication(cfg, index))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let summaries = summarize(cfg, &results);
    Ok(CellResult {
        config: cfg.clone(),
        rl_log: results.iter().map(|r| r.run_lengths.clone()).collect(),
        fit_error_log: results.iter().map(|r| r.fit_errors.clone()).collect(),
        summaries,
    })
}

/// Run every cell of a grid. Results are independent of the thread count
/// and of the order cells are listed in.
pub fn run_grid(
    configs: &[ExperimentConfig],
    threads: usize,
) -> Result<Vec<CellResult>, HarnessError> {
    let pool = WorkerPool::new(threads)?;
    configs.iter().map(|cfg| run_cell(cfg, &pool)).collect()
}
