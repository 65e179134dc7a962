use crate::error::{Error, Result};

/// Piecewise-constant true sensitivity `κ*_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct KappaSchedule {
    segments: Vec<(f64, f64)>,
}

impl KappaSchedule {
    pub fn constant(kappa_star: f64) -> Self {
        KappaSchedule {
            segments: vec![(0.0, kappa_star)],
        }
    }

    /// `segments` are `(start_time, κ*)`; the first must start at 0 and starts
    /// must increase strictly.
    pub fn new(segments: Vec<(f64, f64)>) -> Result<Self> {
        match segments.first() {
            None => return Err(Error::EmptyInput("kappa schedule")),
            Some(&(t, _)) if t != 0.0 => {
                return Err(Error::param(
                    "schedule",
                    format!("first segment must start at 0, got {t}"),
                ));
            }
            _ => {}
        }
        for w in segments.windows(2) {
            if !(w[1].0 > w[0].0) || !w[1].0.is_finite() {
                return Err(Error::param(
                    "schedule",
                    format!("start times must increase: {} then {}", w[0].0, w[1].0),
                ));
            }
        }
        if let Some(&(_, k)) = segments.iter().find(|(_, k)| !(*k > 0.0 && k.is_finite())) {
            return Err(Error::param(
                "schedule",
                format!("kappa_star must be finite and > 0, got {k}"),
            ));
        }
        Ok(KappaSchedule { segments })
    }

    /// Equal-length regimes: `kappas[i]` is active on `[i·period, (i+1)·period)`.
    pub fn regimes(kappas: &[f64], period: f64) -> Result<Self> {
        Self::new(
            kappas
                .iter()
                .enumerate()
                .map(|(i, &k)| (i as f64 * period, k))
                .collect(),
        )
    }

    pub fn segments(&self) -> &[(f64, f64)] {
        &self.segments
    }

    pub fn is_constant(&self) -> bool {
        self.segments.len() == 1
    }

    pub fn at(&self, t: f64) -> f64 {
        let i = self.segments.partition_point(|&(s, _)| s <= t);
        self.segments[i.saturating_sub(1)].1
    }

    /// First switch strictly after `t`, or `+∞`.
    pub fn next_switch(&self, t: f64) -> f64 {
        let i = self.segments.partition_point(|&(s, _)| s <= t);
        self.segments.get(i).map_or(f64::INFINITY, |&(s, _)| s)
    }

    /// Switch times inside `(0, horizon)`.
    pub fn switch_times(&self, horizon: f64) -> impl Iterator<Item = f64> + '_ {
        self.segments
            .iter()
            .skip(1)
            .map(|&(s, _)| s)
            .filter(move |&s| s < horizon)
    }

    /// `∫₀ᵗ g(κ*_s) ds`.
    pub fn integrate(&self, t: f64, g: impl Fn(usize, f64) -> f64) -> f64 {
        let mut total = 0.0;
        for (i, &(start, k)) in self.segments.iter().enumerate() {
            if start >= t {
                break;
            }
            let end = self.segments.get(i + 1).map_or(t, |&(s, _)| s.min(t));
            total += g(i, k) * (end - start);
        }
        total
    }
}
