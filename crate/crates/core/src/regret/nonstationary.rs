use crate::error::{Error, Result};
use crate::estimator::EstimatorMode;
use crate::regret::monte_carlo::{monte_carlo, ExperimentConfig, MonteCarloResult, OutputGrid};
use crate::sim::PolicySpec;

#[derive(Debug, Clone, PartialEq)]
pub struct MethodReport {
    pub name: &'static str,
    pub mode: EstimatorMode,
    pub result: MonteCarloResult,
}

/// Sliding window `w = 30` and EWMA `α = 0.1`.
pub const DEFAULT_METHODS: [EstimatorMode; 2] = [
    EstimatorMode::SlidingWindow { window: 30.0 },
    EstimatorMode::Ewma { alpha: 0.1 },
];

pub fn method_name(mode: EstimatorMode) -> &'static str {
    match mode {
        EstimatorMode::Full => "full",
        EstimatorMode::SlidingWindow { .. } => "sw",
        EstimatorMode::Ewma { .. } => "ewma",
    }
}

/// Runs the learned policy once per estimator mode against a piecewise `κ*`,
/// on a uniform one-second grid unless the base config says otherwise.
pub fn nonstationary_experiment(
    base: &ExperimentConfig,
    modes: &[EstimatorMode],
) -> Result<Vec<MethodReport>> {
    if base.schedule.is_none() {
        return Err(Error::param(
            "schedule",
            "the non-stationary experiment needs a kappa schedule",
        ));
    }
    modes
        .iter()
        .map(|&mode| {
            let grid = match base.grid {
                OutputGrid::LogSpaced { .. } => OutputGrid::Uniform { step: 1.0 },
                g => g,
            };
            let config = ExperimentConfig {
                policy: PolicySpec::Learned(mode),
                grid,
                ..base.clone()
            };
            Ok(MethodReport {
                name: method_name(mode),
                mode,
                result: monte_carlo(&config)?,
            })
        })
        .collect()
}

/// Error levels around one regime of the schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeTracking {
    pub start: f64,
    pub end: f64,
    /// Mean error one grid step after the regime starts.
    pub error_at_start: f64,
    /// Mean error one grid step before the regime ends.
    pub error_at_end: f64,
    /// Mean error one step before the switch that opened this regime, if any.
    pub error_before_switch: Option<f64>,
}

impl RegimeTracking {
    /// The estimate recovered within the regime.
    pub fn converged(&self, slack: f64) -> bool {
        self.error_at_end < self.error_at_start + slack
    }

    /// The switch into this regime raised the error.
    pub fn spiked(&self) -> Option<bool> {
        self.error_before_switch
            .map(|before| self.error_at_start > before)
    }
}

/// Per-regime summary of a mean error curve on a uniform grid of step `step`.
pub fn regime_tracking(
    times: &[f64],
    mean_error: &[f64],
    segments: &[(f64, f64)],
    horizon: f64,
    step: f64,
) -> Vec<RegimeTracking> {
    let at = |t: f64| {
        let i = times
            .iter()
            .position(|&s| (s - t).abs() < 1e-9 * step.max(1.0))
            .expect("time on the grid");
        mean_error[i]
    };
    segments
        .iter()
        .enumerate()
        .filter(|(_, &(start, _))| start < horizon)
        .map(|(i, &(start, _))| {
            let end = segments
                .get(i + 1)
                .map_or(horizon, |&(s, _)| s.min(horizon));
            RegimeTracking {
                start,
                end,
                error_at_start: at(start + step),
                error_at_end: at(end - step),
                error_before_switch: (i > 0).then(|| at(start - step)),
            }
        })
        .collect()
}
