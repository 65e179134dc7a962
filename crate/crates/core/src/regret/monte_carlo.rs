use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimator::EstimatorConfig;
use crate::hjb::ergodic_constant;
use crate::params::ModelParams;
use crate::regret::fit::{fit_regret_curves, FitResult};
use crate::rng::RngSpec;
use crate::sim::{
    simulate, KappaSchedule, PolicySpec, SimOptions, SimulationSetup, TrajectoryRecord,
};

/// Times at which each path is observed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OutputGrid {
    /// `points` log-spaced times in `[T/1000, T)` followed by `T`.
    LogSpaced { points: usize },
    /// `0, step, 2·step, …` up to and including `T`.
    Uniform { step: f64 },
}

impl OutputGrid {
    pub fn times(&self, horizon: f64) -> Vec<f64> {
        match *self {
            OutputGrid::LogSpaced { points } => {
                let t0 = horizon / 1000.0;
                let mut v: Vec<f64> = (0..points)
                    .map(|k| t0 * 1000f64.powf(k as f64 / points as f64))
                    .collect();
                v.push(horizon);
                v
            }
            OutputGrid::Uniform { step } => {
                let n = (horizon / step).floor() as usize;
                let mut v: Vec<f64> = (0..=n).map(|k| k as f64 * step).collect();
                if v.last() != Some(&horizon) {
                    v.push(horizon);
                }
                v
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    /// `kappa` is the true `κ*` unless a schedule is given.
    pub model: ModelParams,
    pub estimator: EstimatorConfig,
    pub policy: PolicySpec,
    pub horizon: f64,
    pub scenarios: usize,
    pub master_seed: u64,
    pub schedule: Option<KappaSchedule>,
    pub initial_inventory: i32,
    pub grid: OutputGrid,
}

impl ExperimentConfig {
    /// 500 scenarios of `T = 1000` on the reference regret market.
    pub fn regret_reference(policy: PolicySpec, master_seed: u64) -> Self {
        ExperimentConfig {
            model: ModelParams::regret_reference(),
            estimator: EstimatorConfig::default(),
            policy,
            horizon: 1000.0,
            scenarios: 500,
            master_seed,
            schedule: None,
            initial_inventory: 0,
            grid: OutputGrid::LogSpaced { points: 200 },
        }
    }

    pub fn kappa_schedule(&self) -> KappaSchedule {
        self.schedule
            .clone()
            .unwrap_or_else(|| KappaSchedule::constant(self.model.kappa))
    }

    pub fn setup(&self) -> SimulationSetup {
        SimulationSetup {
            params: self.model,
            kappa_star: self.kappa_schedule(),
            policy: self.policy,
            estimator: self.estimator,
            horizon: self.horizon,
            initial_inventory: self.initial_inventory,
        }
    }
}

/// Optimal reward rate over time: `γ(κ*_t)`, piecewise constant.
#[derive(Debug, Clone, PartialEq)]
pub struct Oracle {
    schedule: KappaSchedule,
    gammas: Vec<f64>,
}

impl Oracle {
    pub fn constant(gamma_star: f64) -> Self {
        Oracle {
            schedule: KappaSchedule::constant(1.0),
            gammas: vec![gamma_star],
        }
    }

    pub fn for_schedule(schedule: &KappaSchedule, params: &ModelParams) -> Result<Self> {
        let gammas = schedule
            .segments()
            .iter()
            .map(|&(_, k)| ergodic_constant(&params.with_kappa(k)))
            .collect::<Result<_>>()?;
        Ok(Oracle {
            schedule: schedule.clone(),
            gammas,
        })
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    /// `∫₀ᵗ γ(κ*_s) ds`.
    pub fn integral(&self, t: f64) -> f64 {
        self.schedule.integrate(t, |i, _| self.gammas[i])
    }
}

/// `R(t) = ∫₀ᵗ γ(κ*_s) ds - ∫₀ᵗ f ds` at each sampled time of the path.
pub fn regret_trajectory(traj: &TrajectoryRecord, oracle: &Oracle) -> Vec<(f64, f64)> {
    traj.samples
        .iter()
        .map(|s| (s.time, oracle.integral(s.time) - s.reward_integral))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub regret: Vec<f64>,
    /// `|κ̂_t - κ*_t|`; `None` for policies that do not learn.
    pub error: Option<Vec<f64>>,
    pub terminal_regret: f64,
}

pub fn run_scenario(
    config: &ExperimentConfig,
    oracle: &Oracle,
    times: &[f64],
    scenario: u64,
) -> Result<ScenarioResult> {
    let options = SimOptions {
        sample_times: times.to_vec(),
        record_events: false,
        mid_price: false,
    };
    let traj = simulate(
        &config.setup(),
        RngSpec::new(config.master_seed),
        scenario,
        &options,
    )?;
    let regret: Vec<f64> = regret_trajectory(&traj, oracle)
        .into_iter()
        .map(|(_, r)| r)
        .collect();
    let error = config.policy.learns().then(|| {
        traj.samples
            .iter()
            .map(|s| (s.kappa_hat.unwrap_or(f64::NAN) - s.kappa_star).abs())
            .collect()
    });
    Ok(ScenarioResult {
        terminal_regret: oracle.integral(config.horizon) - traj.reward_integral,
        regret,
        error,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloResult {
    pub times: Vec<f64>,
    pub mean_regret: Vec<f64>,
    pub std_regret: Vec<f64>,
    /// Normal-approximation 95% band for the mean.
    pub ci_low: Vec<f64>,
    pub ci_high: Vec<f64>,
    pub mean_error: Option<Vec<f64>>,
    pub fit: FitResult,
    pub scenarios: Vec<ScenarioResult>,
}

impl MonteCarloResult {
    /// Per-scenario least-squares slope of regret over grid times in
    /// `[from, to]`, summarised as `(mean, standard error)`.
    pub fn slope_between(&self, from: f64, to: f64) -> (f64, f64) {
        let idx: Vec<usize> = (0..self.times.len())
            .filter(|&i| self.times[i] >= from && self.times[i] <= to)
            .collect();
        let xs: Vec<f64> = idx.iter().map(|&i| self.times[i]).collect();
        let slopes: Vec<f64> = self
            .scenarios
            .iter()
            .map(|s| {
                let ys: Vec<f64> = idx.iter().map(|&i| s.regret[i]).collect();
                crate::estimator::consistency::ols_slope(&xs, &ys)
            })
            .collect();
        mean_and_se(&slopes)
    }

    /// Mean regret at the grid time closest to `t`.
    pub fn mean_at(&self, t: f64) -> f64 {
        let i = self
            .times
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))
            .map(|(i, _)| i)
            .unwrap_or(0);
        self.mean_regret[i]
    }
}

pub(crate) fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Pointwise mean and sample standard deviation of equal-length rows.
pub(crate) fn column_moments<'a>(
    rows: impl Iterator<Item = &'a [f64]> + Clone,
    len: usize,
) -> (Vec<f64>, Vec<f64>) {
    let n = rows.clone().count() as f64;
    let mut mean = vec![0.0; len];
    for r in rows.clone() {
        mean.iter_mut().zip(r).for_each(|(m, x)| *m += x);
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; len];
    for r in rows {
        var.iter_mut()
            .zip(r)
            .zip(&mean)
            .for_each(|((v, x), m)| *v += (x - m) * (x - m));
    }
    let sd = var.into_iter().map(|v| (v / (n - 1.0)).sqrt()).collect();
    (mean, sd)
}

/// Runs every scenario (in parallel, each on its own random stream),
/// aggregates in scenario order and fits the mean regret curve.
pub fn monte_carlo(config: &ExperimentConfig) -> Result<MonteCarloResult> {
    if config.scenarios < 2 {
        return Err(Error::param(
            "scenarios",
            format!("need at least 2, got {}", config.scenarios),
        ));
    }
    let oracle = Oracle::for_schedule(&config.kappa_schedule(), &config.model)?;
    let times = config.grid.times(config.horizon);
    let scenarios: Vec<ScenarioResult> = (0..config.scenarios as u64)
        .into_par_iter()
        .map(|k| run_scenario(config, &oracle, &times, k))
        .collect::<Result<_>>()?;

    let n = times.len();
    let (mean_regret, std_regret) =
        column_moments(scenarios.iter().map(|s| s.regret.as_slice()), n);
    let half: Vec<f64> = std_regret
        .iter()
        .map(|s| 1.96 * s / (config.scenarios as f64).sqrt())
        .collect();
    let ci_low = mean_regret.iter().zip(&half).map(|(m, h)| m - h).collect();
    let ci_high = mean_regret.iter().zip(&half).map(|(m, h)| m + h).collect();
    let mean_error = config.policy.learns().then(|| {
        column_moments(
            scenarios
                .iter()
                .map(|s| s.error.as_deref().expect("learning policy records errors")),
            n,
        )
        .0
    });
    let fit = fit_regret_curves(&times, &mean_regret)?;
    Ok(MonteCarloResult {
        times,
        mean_regret,
        std_regret,
        ci_low,
        ci_high,
        mean_error,
        fit,
        scenarios,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::depth::Depth;

    #[test]
    fn grids() {
        let g = OutputGrid::LogSpaced { points: 200 }.times(1000.0);
        assert_eq!(g.len(), 201);
        assert_eq!(g[0], 1.0);
        assert_eq!(*g.last().unwrap(), 1000.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        let u = OutputGrid::Uniform { step: 1.0 }.times(250.0);
        assert_eq!(u.len(), 251);
        assert_eq!(u[50], 50.0);
        assert_eq!(
            OutputGrid::Uniform { step: 0.4 }.times(1.0),
            vec![0.0, 0.4, 0.8, 1.0]
        );
    }

    #[test]
    fn oracle_integral_under_schedule() {
        let p = ModelParams::regret_reference();
        let s = KappaSchedule::regimes(&[10.0, 20.0], 5.0).unwrap();
        let o = Oracle::for_schedule(&s, &p).unwrap();
        let g = o.gammas();
        assert!((o.integral(7.0) - (5.0 * g[0] + 2.0 * g[1])).abs() < 1e-15);
        assert_eq!(Oracle::constant(0.5).integral(4.0), 2.0);
    }

    #[test]
    fn regret_starts_at_zero() {
        let mut cfg =
            ExperimentConfig::regret_reference(PolicySpec::FixedDepth(Depth::Finite(0.1)), 3);
        cfg.horizon = 20.0;
        cfg.grid = OutputGrid::Uniform { step: 1.0 };
        let oracle = Oracle::constant(0.01);
        let r = run_scenario(&cfg, &oracle, &cfg.grid.times(20.0), 0).unwrap();
        assert_eq!(r.regret[0], 0.0);
        assert_eq!(r.regret.len(), 21);
        assert!(r.error.is_none());
    }

    #[test]
    fn needs_two_scenarios() {
        let mut cfg = ExperimentConfig::regret_reference(PolicySpec::Myopic, 3);
        cfg.scenarios = 1;
        assert!(monte_carlo(&cfg).is_err());
    }
}
