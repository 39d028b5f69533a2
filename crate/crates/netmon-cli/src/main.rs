//! Command-line runner for the dynamic-network monitoring benchmark.
//!
//! `netmon run` executes an experiment grid and writes `results.csv` plus
//! a `results.json` sidecar with the effective config and the raw
//! run-length log; `netmon list` prints the scenario and monitor
//! inventories; `netmon report` renders a results CSV as a
//! scenario-by-monitor classification grid.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use netmon::generator::ScenarioKind;
use netmon::harness::output::{parse_csv, render_csv, render_json, CsvRow, GridConfig};
use netmon::harness::{run_cell, CellResult, WorkerPool};
use netmon::monitors::MonitorId;

#[derive(Parser)]
#[command(name = "netmon", version, about = "Dynamic-network monitoring benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment grid and write results.
    Run(RunArgs),
    /// List the scenario or monitor inventory.
    List {
        #[arg(value_enum)]
        what: ListWhat,
    },
    /// Render a results CSV as a classification grid.
    Report {
        /// Path to a results.csv produced by `run`.
        results: PathBuf,
    },
}

#[derive(Copy, Clone, ValueEnum)]
enum ListWhat {
    Scenarios,
    Monitors,
}

#[derive(Args)]
struct RunArgs {
    /// Grid config file (JSON); a results.json sidecar also works.
    /// Without it, the built-in study grid runs at 200 replications.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; all randomness derives from it (default 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Replications per cell.
    #[arg(long)]
    reps: Option<usize>,
    /// Worker threads (0 = available parallelism).
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Restrict the grid to one scenario.
    #[arg(long)]
    scenario: Option<String>,
    /// Restrict the grid to one network size (40 or 100).
    #[arg(long)]
    n: Option<usize>,
    /// Restrict the grid to one continuity parameter (0.5 or 1).
    #[arg(long)]
    alpha: Option<f64>,
    /// Restrict the grid to one node configuration (50-50, 25-75, 10-90).
    #[arg(long = "node-config")]
    node_config: Option<String>,
    /// Use ground-truth labels (true) or estimate them in Phase I (false).
    #[arg(long = "known-labels")]
    known_labels: Option<bool>,
    /// Monitor ids, comma separated; ranges allowed (e.g. 1-12,14).
    #[arg(long)]
    monitors: Option<String>,
}

#[derive(Debug)]
enum CliError {
    /// Bad configuration or arguments: exit code 2.
    Config(String),
    /// Failure while running or writing: exit code 1.
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Runtime(m) => m,
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::List { what } => cmd_list(what),
        Command::Report { results } => cmd_report(&results),
    };
    if let Err(err) = result {
        eprintln!("error: {}", err.message());
        std::process::exit(err.exit_code());
    }
}

/// Parse "1,3,14" or "1-12,14" into monitor ids.
fn parse_monitor_list(text: &str) -> Result<Vec<u8>, CliError> {
    let bad = |part: &str| CliError::Config(format!("bad monitor id list entry `{part}`"));
    let mut ids = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if let Some((a, b)) = part.split_once('-') {
            let lo: u8 = a.trim().parse().map_err(|_| bad(part))?;
            let hi: u8 = b.trim().parse().map_err(|_| bad(part))?;
            if lo > hi {
                return Err(bad(part));
            }
            ids.extend(lo..=hi);
        } else {
            ids.push(part.parse().map_err(|_| bad(part))?);
        }
    }
    for &id in &ids {
        MonitorId::new(id).map_err(|e| CliError::Config(e.to_string()))?;
    }
    if ids.is_empty() {
        return Err(CliError::Config("empty monitor list".into()));
    }
    Ok(ids)
}

fn load_grid(path: Option<&Path>) -> Result<GridConfig, CliError> {
    match path {
        None => Ok(GridConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| {
                CliError::Config(format!("cannot read config {}: {e}", p.display()))
            })?;
            GridConfig::from_json(&text)
                .map_err(|e| CliError::Config(format!("config {}: {e}", p.display())))
        }
    }
}

fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    let mut grid = load_grid(args.config.as_deref())?;
    if let Some(seed) = args.seed {
        grid.seed = seed;
    }
    if let Some(reps) = args.reps {
        grid.replications = reps;
    }
    if let Some(threads) = args.threads {
        grid.threads = threads;
    }
    if let Some(out) = args.out {
        grid.out_dir = out.display().to_string();
    }
    if let Some(scenario) = args.scenario {
        ScenarioKind::parse(&scenario).map_err(|e| CliError::Config(e.to_string()))?;
        grid.scenarios = vec![scenario];
    }
    if let Some(n) = args.n {
        grid.sizes = vec![n];
    }
    if let Some(alpha) = args.alpha {
        grid.alphas = vec![alpha];
    }
    if let Some(nc) = args.node_config {
        netmon::generator::NodeConfiguration::parse(&nc)
            .map_err(|e| CliError::Config(e.to_string()))?;
        grid.node_configs = vec![nc];
    }
    if let Some(known) = args.known_labels {
        grid.known_labels = known;
    }
    if let Some(monitors) = args.monitors {
        grid.monitors = parse_monitor_list(&monitors)?;
    }

    let cells = grid
        .expand()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let pool = WorkerPool::new(grid.threads).map_err(|e| CliError::Runtime(e.to_string()))?;

    let started = Instant::now();
    let mut results: Vec<CellResult> = Vec::with_capacity(cells.len());
    for (i, cfg) in cells.iter().enumerate() {
        let cell_started = Instant::now();
        let result = run_cell(cfg, &pool).map_err(|e| CliError::Runtime(e.to_string()))?;
        eprintln!(
            "[{}/{}] {} n={} alpha={} nc={} known={} reps={} ({:.1}s)",
            i + 1,
            cells.len(),
            cfg.scenario,
            cfg.n,
            cfg.alpha,
            cfg.node_config_display().unwrap_or_else(|| "-".into()),
            cfg.known_labels,
            cfg.replications,
            cell_started.elapsed().as_secs_f64()
        );
        results.push(result);
    }

    let out_dir = PathBuf::from(&grid.out_dir);
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", out_dir.display())))?;
    let csv_path = out_dir.join("results.csv");
    let json_path = out_dir.join("results.json");
    std::fs::write(&csv_path, render_csv(&results))
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", csv_path.display())))?;
    std::fs::write(&json_path, render_json(&grid, &results))
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", json_path.display())))?;
    eprintln!(
        "wrote {} and {} in {:.1}s",
        csv_path.display(),
        json_path.display(),
        started.elapsed().as_secs_f64()
    );
    Ok(())
}

fn cmd_list(what: ListWhat) -> Result<(), CliError> {
    match what {
        ListWhat::Scenarios => {
            for kind in ScenarioKind::ALL {
                println!("{:<12} {}", kind.name(), kind.change_representation());
            }
        }
        ListWhat::Monitors => {
            for id in MonitorId::all() {
                println!("{:>2}  {:<24} {}", id, id.name(), id.description());
            }
        }
    }
    Ok(())
}

/// Grid cell key of a CSV row (one report line per experiment cell).
fn row_key(row: &CsvRow) -> String {
    format!(
        "{}|{}|{}|{}|{}",
        row.scenario, row.n, row.alpha, row.node_config, row.known_labels
    )
}

fn cmd_report(path: &Path) -> Result<(), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", path.display())))?;
    let rows = parse_csv(&text).map_err(|e| CliError::Runtime(e.to_string()))?;

    let monitor_ids: Vec<u8> = MonitorId::all().map(|m| m.get()).collect();
    let mut header = format!(
        "{:<12} {:>3} {:>5} {:>6} {:>6}",
        "scenario", "n", "alpha", "nodes", "known"
    );
    for id in &monitor_ids {
        header.push_str(&format!(" {id:>3}"));
    }
    println!("{header}");

    let mut order: Vec<String> = Vec::new();
    let mut groups: std::collections::HashMap<String, Vec<&CsvRow>> =
        std::collections::HashMap::new();
    for row in &rows {
        let key = row_key(row);
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(row);
    }

    for key in order {
        let cell_rows = &groups[&key];
        let first = cell_rows[0];
        let mut line = format!(
            "{:<12} {:>3} {:>5} {:>6} {:>6}",
            first.scenario, first.n, first.alpha, first.node_config, first.known_labels
        );
        for id in &monitor_ids {
            let symbol = cell_rows
                .iter()
                .find(|r| r.monitor_id == *id)
                .map(|r| r.classification.symbol())
                .unwrap_or(" ");
            // The double check mark is two display columns; pad by chars.
            let pad = 4usize.saturating_sub(symbol.chars().count());
            line.push_str(&" ".repeat(pad));
            line.push_str(symbol);
        }
        println!("{line}");
    }
    Ok(())
}
