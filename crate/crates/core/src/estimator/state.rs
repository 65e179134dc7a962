//! Online estimator: retained observations plus the current estimate.

use std::collections::VecDeque;
use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::estimator::likelihood::{solve_kappa, EstimatorConfig, EstimatorMode, FillObservation};
use crate::format::float;

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorState {
    observations: VecDeque<FillObservation>,
    /// Untruncated root `κ_N`; `kappa_init` before the first observation.
    pub kappa_raw: f64,
    /// `ϱ(κ_N)`.
    pub kappa_hat: f64,
    /// Observations fed so far, including ones no longer retained.
    pub seen: usize,
}

impl EstimatorState {
    pub fn new(config: &EstimatorConfig) -> Result<Self> {
        config.validate()?;
        Ok(EstimatorState {
            observations: VecDeque::new(),
            kappa_raw: config.kappa_init,
            kappa_hat: config.truncate(config.kappa_init),
            seen: 0,
        })
    }

    pub fn observations(&self) -> impl ExactSizeIterator<Item = &FillObservation> {
        self.observations.iter()
    }

    pub fn retained(&self) -> usize {
        self.observations.len()
    }

    /// Weights of the retained observations relative to the newest one;
    /// `None` outside EWMA mode.
    pub fn weights(&self, config: &EstimatorConfig) -> Option<Vec<f64>> {
        let EstimatorMode::Ewma { alpha } = config.mode else {
            return None;
        };
        let latest = self.observations.back().map_or(0.0, |o| o.time);
        Some(
            self.observations
                .iter()
                .map(|o| (-alpha * (latest - o.time)).exp())
                .collect(),
        )
    }

    /// Feeds one observation and re-solves from scratch over the retained set.
    pub fn update(mut self, obs: FillObservation, config: &EstimatorConfig) -> Result<Self> {
        if let Some(last) = self.observations.back() {
            if obs.time < last.time {
                return Err(Error::Ordering {
                    time: obs.time,
                    last: last.time,
                });
            }
        }
        self.observations.push_back(obs);
        self.seen += 1;
        if let EstimatorMode::SlidingWindow { window } = config.mode {
            while self
                .observations
                .front()
                .is_some_and(|o| obs.time - o.time > window)
            {
                self.observations.pop_front();
            }
        }
        let weights = self.weights(config);
        let est = solve_kappa(
            self.observations.make_contiguous(),
            config,
            weights.as_deref(),
        )?;
        self.kappa_raw = est.raw;
        self.kappa_hat = est.hat;
        Ok(self)
    }
}

/// One line of the estimate trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub event_index: usize,
    pub observation: FillObservation,
    pub kappa_raw: f64,
    pub kappa_hat: f64,
}

pub const TRACE_HEADER: &str = "event_index,time,depth,filled,kappa_raw,kappa_hat";

pub fn write_trace<W: Write>(mut out: W, rows: &[TraceRow]) -> io::Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.event_index,
            float(r.observation.time),
            r.observation.depth,
            u8::from(r.observation.filled),
            float(r.kappa_raw),
            float(r.kappa_hat)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::depth::Depth;

    fn feed(config: &EstimatorConfig, data: &[(f64, f64, bool)]) -> Vec<EstimatorState> {
        let mut state = EstimatorState::new(config).unwrap();
        let mut out = Vec::new();
        for &(t, d, y) in data {
            state = state
                .update(
                    FillObservation::new(t, Depth::Finite(d), y).unwrap(),
                    config,
                )
                .unwrap();
            out.push(state.clone());
        }
        out
    }

    #[test]
    fn initial_estimate_is_truncated_guess() {
        let cfg = EstimatorConfig {
            kappa_init: 500.0,
            ..Default::default()
        };
        let s = EstimatorState::new(&cfg).unwrap();
        assert_eq!(s.kappa_raw, 500.0);
        assert_eq!(s.kappa_hat, 100.0);
    }

    #[test]
    fn sliding_window_drops_old_observations() {
        let cfg =
            EstimatorConfig::default().with_mode(EstimatorMode::SlidingWindow { window: 2.0 });
        let states = feed(
            &cfg,
            &[
                (0.0, 0.1, true),
                (1.0, 0.1, false),
                (2.0, 0.1, true),
                (3.5, 0.1, false),
            ],
        );
        assert_eq!(
            states.iter().map(|s| s.retained()).collect::<Vec<_>>(),
            vec![1, 2, 3, 2]
        );
        assert_eq!(states[3].seen, 4);
    }

    #[test]
    fn out_of_order_rejected() {
        let cfg = EstimatorConfig::default();
        let s = feed(&cfg, &[(2.0, 0.1, true)]).pop().unwrap();
        let late = FillObservation::new(1.0, Depth::Finite(0.1), true).unwrap();
        assert_eq!(
            s.update(late, &cfg),
            Err(Error::Ordering {
                time: 1.0,
                last: 2.0
            })
        );
    }

    #[test]
    fn ewma_weights_decay_from_latest() {
        let cfg = EstimatorConfig::default().with_mode(EstimatorMode::Ewma { alpha: 0.5 });
        let s = feed(&cfg, &[(0.0, 0.1, true), (2.0, 0.1, false)])
            .pop()
            .unwrap();
        let w = s.weights(&cfg).unwrap();
        assert_eq!(w[1], 1.0);
        assert!((w[0] - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn trace_uses_inf_token() {
        let row = TraceRow {
            event_index: 0,
            observation: FillObservation::new(0.5, Depth::Infinite, false).unwrap(),
            kappa_raw: 5.0,
            kappa_hat: 5.0,
        };
        let mut buf = Vec::new();
        write_trace(&mut buf, &[row]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text.lines().nth(1).unwrap(),
            "0,5.0000000000000000e-1,inf,0,5.0000000000000000e0,5.0000000000000000e0"
        );
    }
}
