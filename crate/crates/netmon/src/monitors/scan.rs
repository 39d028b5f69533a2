//! Moving-window scan statistics on neighborhood edge counts.
//!
//! Per node v and order k in {0, 1, 2}, the raw statistic is the edge
//! count of the subgraph induced by the nodes within geodesic distance k
//! of v. Two standardizations run over sliding windows of length 20: the
//! first standardizes each raw count against that node's previous 20 raw
//! values, the second standardizes the per-step maximum against the
//! previous 20 maxima. A standard-deviation floor of 1 guards both
//! divisions. The chart signals when any second-stage statistic exceeds 5;
//! it needs 40 observations of history before it can signal at all.
//!
//! Window contents are never frozen on a signal: history enters the
//! windows regardless, so an undetected change is absorbed into the
//! baseline as the window slides.

use super::{sample_sd, MonitorError, MonitorId, Observation};
use crate::graph::scan_counts;

/// Window length of both standardization stages.
const WINDOW: usize = 20;
/// Signal threshold on the second-stage statistic.
const THRESHOLD: f64 = 5.0;

/// Fixed-capacity sliding window. Only the multiset of the last `cap`
/// values matters (mean and SD), so eviction order is a plain ring cursor.
#[derive(Debug, Clone)]
struct SlidingWindow {
    values: Vec<f64>,
    cap: usize,
    next: usize,
}

impl SlidingWindow {
    fn new(cap: usize) -> Self {
        SlidingWindow {
            values: Vec::with_capacity(cap),
            cap,
            next: 0,
        }
    }

    fn push(&mut self, v: f64) {
        if self.values.len() < self.cap {
            self.values.push(v);
        } else {
            self.values[self.next] = v;
            self.next = (self.next + 1) % self.cap;
        }
    }

    fn is_full(&self) -> bool {
        self.values.len() == self.cap
    }

    /// `(x - window mean) / max(window SD, 1)`.
    fn standardize(&self, x: f64) -> f64 {
        let mu = super::mean(&self.values);
        let sd = sample_sd(&self.values).max(1.0);
        (x - mu) / sd
    }
}

/// The moving-window scan monitor (method 13).
pub struct ScanMonitor {
    n: Option<usize>,
    /// Raw-count windows, indexed `k * n + v`.
    raw: Vec<SlidingWindow>,
    /// First-stage maxima windows, one per k.
    maxima: [SlidingWindow; 3],
}

impl ScanMonitor {
    pub fn new() -> Self {
        ScanMonitor {
            n: None,
            raw: Vec::new(),
            maxima: std::array::from_fn(|_| SlidingWindow::new(WINDOW)),
        }
    }

    fn ensure_buffers(&mut self, n: usize) {
        if self.n != Some(n) {
            self.n = Some(n);
            self.raw = (0..3 * n).map(|_| SlidingWindow::new(WINDOW)).collect();
            self.maxima = std::array::from_fn(|_| SlidingWindow::new(WINDOW));
        }
    }

    /// Feed one snapshot; true when any second-stage statistic exceeds the
    /// threshold. During warm-up this only accumulates the windows.
    pub fn observe(&mut self, g: &crate::graph::Graph) -> bool {
        let n = g.node_count();
        self.ensure_buffers(n);
        let counts = scan_counts(g);
        let mut signal = false;
        for k in 0..3 {
            let windows = &self.raw[k * n..(k + 1) * n];
            if windows.iter().all(SlidingWindow::is_full) {
                let t_k = (0..n)
                    .map(|v| windows[v].standardize(counts[k][v] as f64))
                    .fold(f64::NEG_INFINITY, f64::max);
                if self.maxima[k].is_full() {
                    let t_star = self.maxima[k].standardize(t_k);
                    signal |= t_star > THRESHOLD;
                }
                self.maxima[k].push(t_k);
            }
            for v in 0..n {
                self.raw[k * n + v].push(counts[k][v] as f64);
            }
        }
        signal
    }
}

impl Default for ScanMonitor {
    fn default() -> Self {
        Self::new()
    }
}

impl super::Monitor for ScanMonitor {
    fn id(&self) -> MonitorId {
        MonitorId::new(13).unwrap()
    }

    /// Streams the Phase I observations through the windows; any Phase I
    /// signals are discarded.
    fn fit(&mut self, phase1: &[Observation<'_>]) -> Result<(), MonitorError> {
        for obs in phase1 {
            self.observe(obs.graph());
        }
        Ok(())
    }

    fn update(&mut self, obs: &Observation<'_>) -> bool {
        self.observe(obs.graph())
    }
}
