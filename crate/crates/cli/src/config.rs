//! Flat `section.key = value` configuration.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use ergodic_mm::estimator::{EstimatorConfig, EstimatorMode};
use ergodic_mm::regret::{ExperimentConfig, OutputGrid, SweepAxes};
use ergodic_mm::sim::{KappaSchedule, PolicySpec};
use ergodic_mm::ModelParams;

use crate::error::CliError;

/// Every accepted key with its default and a one-line description.
pub const DEFAULTS: &[(&str, &str, &str)] = &[
    ("model.lambda_plus", "1", "market buy-order rate"),
    ("model.lambda_minus", "1", "market sell-order rate"),
    (
        "model.kappa",
        "10",
        "price sensitivity; the true kappa* in simulations",
    ),
    ("model.phi", "1e-5", "running inventory penalty"),
    (
        "model.alpha_terminal",
        "0",
        "terminal inventory penalty (finite horizon)",
    ),
    ("model.q_max", "30", "upper inventory bound"),
    ("model.q_min", "-30", "lower inventory bound"),
    ("model.sigma", "1", "mid-price volatility"),
    ("model.s0", "10", "initial mid-price"),
    ("estimator.delta0", "0.01", "regularisation depth"),
    ("estimator.k_lower", "1", "lower truncation bound"),
    ("estimator.k_upper", "100", "upper truncation bound"),
    ("estimator.kappa_init", "5", "initial guess"),
    (
        "estimator.window",
        "30",
        "sliding window length for learn:sw",
    ),
    ("estimator.alpha", "0.1", "EWMA decay rate for learn:ewma"),
    (
        "estimator.root_tolerance",
        "1e-10",
        "relative tolerance of the root finder",
    ),
    (
        "estimator.max_iterations",
        "200",
        "root finder iteration cap",
    ),
    (
        "experiment.policy",
        "learn:full",
        "ergodic:<k>|myopic|learn:full|learn:sw|learn:ewma|fixed:<d>",
    ),
    ("experiment.horizon", "1000", "time horizon T"),
    ("experiment.scenarios", "500", "Monte Carlo paths"),
    ("experiment.initial_inventory", "0", "starting inventory q0"),
    (
        "experiment.grid",
        "log:200",
        "output grid: log:<points> or uniform:<step>",
    ),
    (
        "experiment.mid_price",
        "false",
        "simulate the mid-price and report PnL",
    ),
    (
        "experiment.tv_times",
        "0:100:41,250,500,1000,1500,2000",
        "equilibrium study times",
    ),
    (
        "experiment.tv_scenarios",
        "1000",
        "paths in the equilibrium study",
    ),
    (
        "experiment.bootstrap",
        "1000",
        "bootstrap resamples for the TV slope",
    ),
    (
        "experiment.mle_sizes",
        "100,1000,10000",
        "sample sizes for mle-consistency",
    ),
    (
        "experiment.mle_depth",
        "0.1",
        "constant quoted depth for mle-consistency",
    ),
    (
        "experiment.mle_replications",
        "200",
        "replications for mle-consistency",
    ),
    (
        "experiment.sweep_axes",
        "phi_lambda",
        "phi_lambda or k_upper_offset",
    ),
    (
        "experiment.sweep_param1",
        "1e-6,1e-5,1e-4",
        "first sweep axis values",
    ),
    (
        "experiment.sweep_param2",
        "0.2,0.4,0.8",
        "second sweep axis values",
    ),
    (
        "experiment.sweep_horizon",
        "100",
        "horizon of each sweep cell",
    ),
    ("experiment.sweep_scenarios", "500", "paths per sweep cell"),
    (
        "experiment.kappa_grid",
        "1:100:41",
        "quoting kappas for misspec-gamma",
    ),
    (
        "experiment.fh_horizons",
        "100:1000:10",
        "horizons for finite-horizon",
    ),
    (
        "schedule.enabled",
        "false",
        "apply the kappa* schedule to simulate/regret",
    ),
    (
        "schedule.segments",
        "0:20,50:30,100:10,150:40,200:25",
        "start:kappa* pairs",
    ),
    (
        "schedule.horizon",
        "250",
        "horizon of the non-stationary experiment",
    ),
    (
        "schedule.scenarios",
        "200",
        "paths per method in the non-stationary experiment",
    ),
    (
        "schedule.methods",
        "sw,ewma",
        "estimators compared in the non-stationary experiment",
    ),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            values: DEFAULTS
                .iter()
                .map(|(k, v, _)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }
}

fn config_error(key: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("`{key}`: {reason}"))
}

impl Config {
    /// Defaults overlaid with the `key = value` lines of `text`.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut config = Config::default();
        let mut seen = std::collections::BTreeSet::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!(
                    "line {}: expected `key = value`, got `{line}`",
                    n + 1
                ))
            })?;
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(config_error(key, format!("set twice (line {})", n + 1)));
            }
            config.set(key, value.trim())?;
        }
        Ok(config)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match self.values.get_mut(key) {
            Some(slot) => {
                *slot = value.to_string();
                Ok(())
            }
            None => Err(config_error(key, "unknown key")),
        }
    }

    /// `--set key=value`.
    pub fn apply_override(&mut self, spec: &str) -> Result<(), CliError> {
        let (k, v) = spec
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("override `{spec}` is not key=value")))?;
        self.set(k.trim(), v.trim())
    }

    /// Every key in sorted order, one `key = value` per line.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.values {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values
            .get(key)
            .map(String::as_str)
            .unwrap_or_else(|| panic!("`{key}` missing from DEFAULTS"))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .parse()
            .map_err(|e| config_error(key, format!("cannot parse `{}`: {e}", self.raw(key))))
    }

    /// Comma-separated numbers; `a:b:n` expands to `n` evenly spaced values.
    pub fn list(&self, key: &str) -> Result<Vec<f64>, CliError> {
        let mut out = Vec::new();
        for item in self
            .raw(key)
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
        {
            let parts: Vec<&str> = item.split(':').collect();
            let num = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| config_error(key, format!("`{s}`: {e}")))
            };
            match parts.as_slice() {
                [x] => out.push(num(x)?),
                [a, b, n] => {
                    let (a, b) = (num(a)?, num(b)?);
                    let n: usize = n
                        .trim()
                        .parse()
                        .map_err(|e| config_error(key, format!("`{n}`: {e}")))?;
                    if n < 2 {
                        return Err(config_error(
                            key,
                            format!("`{item}` needs at least 2 points"),
                        ));
                    }
                    out.extend((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64));
                }
                _ => {
                    return Err(config_error(
                        key,
                        format!("`{item}` is neither a number nor start:end:count"),
                    ))
                }
            }
        }
        Ok(out)
    }

    pub fn model(&self) -> Result<ModelParams, CliError> {
        Ok(ModelParams {
            lambda_plus: self.get("model.lambda_plus")?,
            lambda_minus: self.get("model.lambda_minus")?,
            kappa: self.get("model.kappa")?,
            phi: self.get("model.phi")?,
            alpha_terminal: self.get("model.alpha_terminal")?,
            q_max: self.get("model.q_max")?,
            q_min: self.get("model.q_min")?,
            sigma: self.get("model.sigma")?,
            s0: self.get("model.s0")?,
        })
    }

    pub fn estimator(&self) -> Result<EstimatorConfig, CliError> {
        let cfg = EstimatorConfig {
            delta0: self.get("estimator.delta0")?,
            k_lower: self.get("estimator.k_lower")?,
            k_upper: self.get("estimator.k_upper")?,
            kappa_init: self.get("estimator.kappa_init")?,
            mode: EstimatorMode::Full,
            root_tolerance: self.get("estimator.root_tolerance")?,
            max_iterations: self.get("estimator.max_iterations")?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn policy(&self, selector: Option<&str>) -> Result<PolicySpec, CliError> {
        let s = selector.unwrap_or_else(|| self.raw("experiment.policy"));
        PolicySpec::parse(
            s,
            self.get("estimator.window")?,
            self.get("estimator.alpha")?,
        )
        .map_err(|e| config_error("experiment.policy", e))
    }

    pub fn schedule(&self) -> Result<KappaSchedule, CliError> {
        let mut segments = Vec::new();
        for item in self
            .raw("schedule.segments")
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
        {
            let (t, k) = item.split_once(':').ok_or_else(|| {
                config_error("schedule.segments", format!("`{item}` is not start:kappa"))
            })?;
            let num = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| config_error("schedule.segments", format!("`{s}`: {e}")))
            };
            segments.push((num(t)?, num(k)?));
        }
        Ok(KappaSchedule::new(segments)?)
    }

    pub fn grid(&self) -> Result<OutputGrid, CliError> {
        let raw = self.raw("experiment.grid");
        let bad = || {
            config_error(
                "experiment.grid",
                format!("`{raw}` is not log:<points> or uniform:<step>"),
            )
        };
        match raw.split_once(':') {
            Some(("log", n)) => match n.parse::<usize>() {
                Ok(points) if points >= 10 => Ok(OutputGrid::LogSpaced { points }),
                _ => Err(bad()),
            },
            Some(("uniform", s)) => match s.parse::<f64>() {
                Ok(step) if step > 0.0 && step.is_finite() => Ok(OutputGrid::Uniform { step }),
                _ => Err(bad()),
            },
            _ => Err(bad()),
        }
    }

    pub fn sweep_axes(&self) -> Result<SweepAxes, CliError> {
        match self.raw("experiment.sweep_axes") {
            "phi_lambda" => Ok(SweepAxes::PhiLambda),
            "k_upper_offset" => Ok(SweepAxes::UpperBoundOffset),
            other => Err(config_error(
                "experiment.sweep_axes",
                format!("`{other}` is not phi_lambda or k_upper_offset"),
            )),
        }
    }

    pub fn methods(&self) -> Result<Vec<EstimatorMode>, CliError> {
        let window = self.get("estimator.window")?;
        let alpha = self.get("estimator.alpha")?;
        self.raw("schedule.methods")
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|m| match m {
                "sw" => Ok(EstimatorMode::SlidingWindow { window }),
                "ewma" => Ok(EstimatorMode::Ewma { alpha }),
                "full" => Ok(EstimatorMode::Full),
                other => Err(config_error(
                    "schedule.methods",
                    format!("unknown method `{other}`"),
                )),
            })
            .collect()
    }

    pub fn experiment(&self, policy: PolicySpec, seed: u64) -> Result<ExperimentConfig, CliError> {
        let scenarios: usize = self.get("experiment.scenarios")?;
        let enabled: bool = self.get("schedule.enabled")?;
        Ok(ExperimentConfig {
            model: self.model()?,
            estimator: self.estimator()?,
            policy,
            horizon: self.get("experiment.horizon")?,
            scenarios,
            master_seed: seed,
            schedule: if enabled {
                Some(self.schedule()?)
            } else {
                None
            },
            initial_inventory: self.get("experiment.initial_inventory")?,
            grid: self.grid()?,
        })
    }
}
