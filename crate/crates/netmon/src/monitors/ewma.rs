//! EWMA control chart on a scalar summary statistic.
//!
//! The chart tracks `E_t = lambda * S_t + (1 - lambda) * E_{t-1}` started
//! at the Phase I mean, with steady-state limits
//! `mu_hat +/- 3 * sigma_hat * sqrt(lambda / (2 - lambda))` where `mu_hat`
//! and `sigma_hat` are the Phase I sample mean and sample standard
//! deviation of the statistic. The signal rule is two-sided: several
//! scenarios move statistics downward.

use super::{mean, sample_sd, MonitorError, MonitorId, Observation, SIGMA_FLOOR};
use crate::graph::StatisticKind;

/// Fitted EWMA chart state.
#[derive(Debug, Clone, PartialEq)]
pub struct EwmaState {
    lambda: f64,
    mu_hat: f64,
    sigma_hat: f64,
    e_prev: f64,
    lower: f64,
    upper: f64,
}

impl EwmaState {
    /// Fit from the Phase I statistic sequence (length >= 2).
    pub fn fit(phase1: &[f64], lambda: f64) -> Result<Self, MonitorError> {
        Self::fit_with_width_scale(phase1, lambda, 1.0)
    }

    /// Fit with the limit half-width multiplied by `width_scale`
    /// (1.0 is the standard chart; used to probe limit-width monotonicity).
    pub fn fit_with_width_scale(
        phase1: &[f64],
        lambda: f64,
        width_scale: f64,
    ) -> Result<Self, MonitorError> {
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(MonitorError::InvalidLambda(lambda));
        }
        if phase1.len() < 2 {
            return Err(MonitorError::TooFewObservations {
                needed: 2,
                got: phase1.len(),
            });
        }
        let mu_hat = mean(phase1);
        let sigma_hat = sample_sd(phase1).max(SIGMA_FLOOR);
        let half = 3.0 * sigma_hat * (lambda / (2.0 - lambda)).sqrt() * width_scale;
        Ok(EwmaState {
            lambda,
            mu_hat,
            sigma_hat,
            e_prev: mu_hat,
            lower: mu_hat - half,
            upper: mu_hat + half,
        })
    }

    /// Smooth in `s_t`, advance the state, and report the new value and
    /// whether it falls outside the control limits.
    pub fn update(&mut self, s_t: f64) -> (f64, bool) {
        let e_t = self.lambda * s_t + (1.0 - self.lambda) * self.e_prev;
        self.e_prev = e_t;
        (e_t, e_t < self.lower || e_t > self.upper)
    }

    pub fn mean(&self) -> f64 {
        self.mu_hat
    }

    pub fn sd(&self) -> f64 {
        self.sigma_hat
    }

    pub fn limits(&self) -> (f64, f64) {
        (self.lower, self.upper)
    }
}

/// Monitor wrapper: EWMA chart on one of the twelve summary statistics.
pub struct EwmaMonitor {
    id: MonitorId,
    kind: StatisticKind,
    lambda: f64,
    width_scale: f64,
    state: Option<EwmaState>,
}

impl EwmaMonitor {
    pub fn new(id: MonitorId, lambda: f64) -> Result<Self, MonitorError> {
        let kind = id.statistic_kind().ok_or(MonitorError::UnknownId(id.get()))?;
        Ok(EwmaMonitor {
            id,
            kind,
            lambda,
            width_scale: 1.0,
            state: None,
        })
    }

    /// Widen or narrow the limits by a factor (fit-time knob).
    pub fn with_width_scale(mut self, width_scale: f64) -> Self {
        self.width_scale = width_scale;
        self
    }
}

impl super::Monitor for EwmaMonitor {
    fn id(&self) -> MonitorId {
        self.id
    }

    fn fit(&mut self, phase1: &[Observation<'_>]) -> Result<(), MonitorError> {
        let stats: Vec<f64> = phase1.iter().map(|o| o.summary().get(self.kind)).collect();
        self.state = Some(EwmaState::fit_with_width_scale(
            &stats,
            self.lambda,
            self.width_scale,
        )?);
        Ok(())
    }

    fn update(&mut self, obs: &Observation<'_>) -> bool {
        let state = self.state.as_mut().expect("EWMA monitor updated before fit");
        state.update(obs.summary().get(self.kind)).1
    }
}
