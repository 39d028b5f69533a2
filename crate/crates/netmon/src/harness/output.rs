//! Grid configuration and result files.
//!
//! A run produces two files: `results.csv` with one row per
//! (cell, monitor) and `results.json` with the effective configuration
//! and the full per-replication run-length log, so every metric can be
//! recomputed without rerunning. Floating-point fields are rendered with
//! 6 significant digits.

use serde::{Deserialize, Serialize};

use super::{CellResult, Classification, ExperimentConfig, HarnessError};
use crate::generator::{NodeConfiguration, ScenarioKind};
use crate::monitors::MonitorId;

pub const CSV_HEADER: &str = "scenario,n,alpha,node_config,known_labels,monitor_id,monitor_name,\
replications,detections,detection_rate,ced,classification";

/// The grid specification read from a config file: one axis per study
/// dimension, expanded to the cartesian product (one-community scenarios
/// ignore the node-configuration axis). Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub scenarios: Vec<String>,
    pub sizes: Vec<usize>,
    pub alphas: Vec<f64>,
    pub node_configs: Vec<String>,
    pub known_labels: bool,
    /// Monitor ids 1..=15.
    pub monitors: Vec<u8>,
    pub phase1_len: usize,
    pub phase2_len: usize,
    pub detection_limit: usize,
    pub replications: usize,
    pub seed: u64,
    /// 0 means available parallelism.
    pub threads: usize,
    pub out_dir: String,
}

impl Default for GridConfig {
    /// The full study grid at a desk-friendly 200 replications.
    fn default() -> Self {
        GridConfig {
            scenarios: ScenarioKind::ALL.iter().map(|s| s.name().into()).collect(),
            sizes: vec![40, 100],
            alphas: vec![0.5, 1.0],
            node_configs: vec!["50-50".into(), "25-75".into(), "10-90".into()],
            known_labels: true,
            monitors: (1..=15).collect(),
            phase1_len: 200,
            phase2_len: 50,
            detection_limit: 50,
            replications: 200,
            seed: 0,
            threads: 0,
            out_dir: "results".into(),
        }
    }
}

impl GridConfig {
    /// Expand the axes into per-cell configs. Two-community scenarios take
    /// one cell per node configuration; one-community scenarios one cell.
    pub fn expand(&self) -> Result<Vec<ExperimentConfig>, HarnessError> {
        let bad = |msg: String| HarnessError::InvalidConfig(msg);
        let monitors: Vec<MonitorId> = self
            .monitors
            .iter()
            .map(|&id| MonitorId::new(id))
            .collect::<Result<_, _>>()
            .map_err(|e| bad(e.to_string()))?;
        let mut cells = Vec::new();
        for name in &self.scenarios {
            let scenario = ScenarioKind::parse(name).map_err(|e| bad(e.to_string()))?;
            let node_configs: Vec<NodeConfiguration> = if scenario.is_two_community() {
                self.node_configs
                    .iter()
                    .map(|t| NodeConfiguration::parse(t))
                    .collect::<Result<_, _>>()
                    .map_err(|e| bad(e.to_string()))?
            } else {
                vec![NodeConfiguration::balanced()]
            };
            for &n in &self.sizes {
                for &alpha in &self.alphas {
                    for &node_config in &node_configs {
                        let cfg = ExperimentConfig {
                            scenario,
                            n,
                            alpha,
                            node_config,
                            phase1_len: self.phase1_len,
                            phase2_len: self.phase2_len,
                            detection_limit: self.detection_limit,
                            replications: self.replications,
                            monitors: monitors.clone(),
                            known_labels: self.known_labels,
                            master_seed: self.seed,
                        };
                        cfg.validate()?;
                        cells.push(cfg);
                    }
                }
            }
        }
        if cells.is_empty() {
            return Err(bad("config expands to zero cells".into()));
        }
        Ok(cells)
    }

    /// Parse either a bare grid config or a results sidecar (which embeds
    /// the effective config under a `config` key).
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        #[derive(Deserialize)]
        struct Sidecar {
            config: GridConfig,
        }
        match serde_json::from_str::<GridConfig>(text) {
            Ok(cfg) => Ok(cfg),
            Err(direct_err) => serde_json::from_str::<Sidecar>(text)
                .map(|s| s.config)
                .map_err(|_| HarnessError::InvalidConfig(direct_err.to_string())),
        }
    }
}

/// Render a float with 6 significant digits.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let order = x.abs().log10().floor() as i32;
    let decimals = (5 - order).max(0) as usize;
    format!("{x:.decimals$}")
}

/// One CSV row per (cell, monitor).
pub fn render_csv(cells: &[CellResult]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for cell in cells {
        let cfg = &cell.config;
        let node_config = cfg.node_config_display().unwrap_or_else(|| "-".into());
        for summary in &cell.summaries {
            let ced = summary.ced.map(format_sig6).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                cfg.scenario,
                cfg.n,
                format_sig6(cfg.alpha),
                node_config,
                cfg.known_labels,
                summary.monitor,
                summary.monitor.name(),
                summary.replications,
                summary.detections,
                format_sig6(summary.detection_rate),
                ced,
                summary.classification,
            ));
        }
    }
    out
}

/// A parsed CSV row (for the report renderer and round-trip checks).
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub scenario: String,
    pub n: usize,
    pub alpha: f64,
    pub node_config: String,
    pub known_labels: bool,
    pub monitor_id: u8,
    pub monitor_name: String,
    pub replications: usize,
    pub detections: usize,
    pub detection_rate: f64,
    pub ced: Option<f64>,
    pub classification: Classification,
}

pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>, HarnessError> {
    let malformed = |msg: String| HarnessError::MalformedResults(msg);
    let mut lines = text.lines();
    match lines.next() {
        None => return Ok(Vec::new()),
        Some(header) if header == CSV_HEADER => {}
        Some(other) => {
            return Err(malformed(format!("unexpected header: {other}")));
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 12 {
            return Err(malformed(format!(
                "row {}: expected 12 fields, got {}",
                i + 2,
                fields.len()
            )));
        }
        let parse_err = |what: &str| malformed(format!("row {}: bad {what}", i + 2));
        rows.push(CsvRow {
            scenario: fields[0].to_string(),
            n: fields[1].parse().map_err(|_| parse_err("n"))?,
            alpha: fields[2].parse().map_err(|_| parse_err("alpha"))?,
            node_config: fields[3].to_string(),
            known_labels: fields[4].parse().map_err(|_| parse_err("known_labels"))?,
            monitor_id: fields[5].parse().map_err(|_| parse_err("monitor_id"))?,
            monitor_name: fields[6].to_string(),
            replications: fields[7].parse().map_err(|_| parse_err("replications"))?,
            detections: fields[8].parse().map_err(|_| parse_err("detections"))?,
            detection_rate: fields[9].parse().map_err(|_| parse_err("detection_rate"))?,
            ced: if fields[10].is_empty() {
                None
            } else {
                Some(fields[10].parse().map_err(|_| parse_err("ced"))?)
            },
            classification: Classification::parse(fields[11])
                .ok_or_else(|| parse_err("classification"))?,
        });
    }
    Ok(rows)
}

#[derive(Serialize)]
struct SidecarCell<'a> {
    scenario: &'a str,
    n: usize,
    alpha: f64,
    node_config: Option<String>,
    known_labels: bool,
    monitors: Vec<u8>,
    /// Replications with a failed Phase I fit, keyed by monitor id.
    fit_errors: std::collections::BTreeMap<String, usize>,
    /// Run length per replication, keyed by monitor id; null = no signal.
    rl: std::collections::BTreeMap<String, Vec<Option<u32>>>,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    config: &'a GridConfig,
    cells: Vec<SidecarCell<'a>>,
}

/// Render the JSON sidecar: effective config plus per-replication logs.
pub fn render_json(config: &GridConfig, cells: &[CellResult]) -> String {
    let cells = cells
        .iter()
        .map(|cell| {
            let cfg = &cell.config;
            let mut rl = std::collections::BTreeMap::new();
            let mut fit_errors = std::collections::BTreeMap::new();
            for (i, summary) in cell.summaries.iter().enumerate() {
                rl.insert(
                    summary.monitor.to_string(),
                    cell.monitor_run_lengths(i),
                );
                fit_errors.insert(summary.monitor.to_string(), summary.fit_errors);
            }
            SidecarCell {
                scenario: cfg.scenario.name(),
                n: cfg.n,
                alpha: cfg.alpha,
                node_config: cfg.node_config_display(),
                known_labels: cfg.known_labels,
                monitors: cfg.monitors.iter().map(|m| m.get()).collect(),
                fit_errors,
                rl,
            }
        })
        .collect();
    serde_json::to_string_pretty(&Sidecar { config, cells }).expect("sidecar serialization")
}
