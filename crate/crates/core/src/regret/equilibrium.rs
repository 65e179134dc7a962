use rand::Rng;
use rayon::prelude::*;

use crate::depth::Depth;
use crate::error::{Error, Result};
use crate::estimator::consistency::{ols_slope, quantile};
use crate::estimator::EstimatorConfig;
use crate::hjb::{
    equilibrium_distribution, total_variation, transient_distribution, transition_rate_matrix,
};
use crate::params::ModelParams;
use crate::rng::{Purpose, RngSpec};
use crate::sim::{simulate, PolicySpec, Quoter, SimOptions, SimulationSetup};

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumStudy {
    pub times: Vec<f64>,
    /// TV between the simulated cross-section and `π`.
    pub tv: Vec<f64>,
    /// TV between the exact law `δ_{q₀} e^{tQ}` and `π`.
    pub exact_tv: Vec<f64>,
    pub equilibrium: Vec<f64>,
    /// Expected TV of an exact sample of this size from `π` (normal approximation).
    pub noise_floor: f64,
    /// Number of leading grid times used for the slope.
    pub fit_points: usize,
    /// Least-squares slope of `ln TV` against `t`.
    pub slope: f64,
    /// 99% percentile-bootstrap interval for the slope, resampling scenarios.
    pub slope_ci: (f64, f64),
}

/// Quote tables of a stationary policy.
pub fn policy_tables(policy: PolicySpec, params: &ModelParams) -> Result<(Vec<Depth>, Vec<Depth>)> {
    if policy.learns() {
        return Err(Error::param(
            "policy",
            format!("`{policy}` is not stationary"),
        ));
    }
    let mut quoter = Quoter::new(policy, params)?;
    let mut ask = Vec::new();
    let mut bid = Vec::new();
    for q in params.grid().states() {
        let (a, b) = quoter.quotes(q, f64::NAN)?;
        ask.push(a);
        bid.push(b);
    }
    Ok((ask, bid))
}

/// Expected TV of an empirical law of `m` draws from `pi`, `½ Σ √(2p(1-p)/(πm))`.
pub fn sampling_floor(pi: &[f64], m: usize) -> f64 {
    0.5 * pi
        .iter()
        .map(|p| (2.0 * p * (1.0 - p) / (std::f64::consts::PI * m as f64)).sqrt())
        .sum::<f64>()
}

fn histogram(
    paths: &[Vec<i32>],
    which: impl Iterator<Item = usize>,
    column: usize,
    params: &ModelParams,
) -> Vec<f64> {
    let grid = params.grid();
    let mut counts = vec![0.0; grid.len()];
    let mut n = 0.0;
    for k in which {
        counts[grid
            .index(paths[k][column])
            .expect("inventory stays on the grid")] += 1.0;
        n += 1.0;
    }
    counts.iter_mut().for_each(|c| *c /= n);
    counts
}

/// Cross-sectional convergence of the inventory to its invariant law under a
/// fixed policy, every path started at `initial_inventory`.
///
/// The slope is fitted on the leading grid times whose TV stays above twice
/// the sampling floor.
pub fn equilibrium_convergence_study(
    params: &ModelParams,
    policy: PolicySpec,
    initial_inventory: i32,
    t_grid: &[f64],
    scenarios: usize,
    bootstrap: usize,
    rng: RngSpec,
) -> Result<EquilibriumStudy> {
    if scenarios < 2 || bootstrap < 2 {
        return Err(Error::EmptyInput(
            "need at least two scenarios and two bootstrap resamples",
        ));
    }
    let horizon = *t_grid.last().ok_or(Error::EmptyInput("time grid"))?;
    let (ask, bid) = policy_tables(policy, params)?;
    let rates = transition_rate_matrix(&ask, &bid, params.kappa, params)?;
    let pi = equilibrium_distribution(&rates)?.probabilities;

    let setup = SimulationSetup {
        initial_inventory,
        ..SimulationSetup::new(
            *params,
            policy,
            EstimatorConfig::default(),
            horizon.max(f64::MIN_POSITIVE),
        )
    };
    let options = SimOptions {
        sample_times: t_grid.to_vec(),
        ..Default::default()
    };
    let paths: Vec<Vec<i32>> = (0..scenarios as u64)
        .into_par_iter()
        .map(|k| {
            simulate(&setup, rng, k, &options)
                .map(|t| t.samples.iter().map(|s| s.inventory).collect())
        })
        .collect::<Result<_>>()?;

    let tv: Vec<f64> = (0..t_grid.len())
        .map(|j| total_variation(&histogram(&paths, 0..scenarios, j, params), &pi))
        .collect();
    let start_index = params
        .grid()
        .index(initial_inventory)
        .expect("validated by simulate");
    let mut start = vec![0.0; pi.len()];
    start[start_index] = 1.0;
    let exact_tv = t_grid
        .iter()
        .map(|&t| total_variation(&transient_distribution(&rates, &start, t), &pi))
        .collect();

    let noise_floor = sampling_floor(&pi, scenarios);
    let fit_points = tv.iter().take_while(|&&v| v > 2.0 * noise_floor).count();
    if fit_points < 3 {
        return Err(Error::EmptyInput(
            "fewer than three grid times above the sampling floor",
        ));
    }
    let xs = &t_grid[..fit_points];
    let ln_slope = |tvs: &[f64]| ols_slope(xs, &tvs.iter().map(|v| v.ln()).collect::<Vec<_>>());
    let slope = ln_slope(&tv[..fit_points]);

    let mut resampler = rng.stream(0, Purpose::Bootstrap);
    let mut slopes: Vec<f64> = (0..bootstrap)
        .map(|_| {
            let pick: Vec<usize> = (0..scenarios)
                .map(|_| resampler.random_range(0..scenarios))
                .collect();
            let tvs: Vec<f64> = (0..fit_points)
                .map(|j| total_variation(&histogram(&paths, pick.iter().copied(), j, params), &pi))
                .collect();
            ln_slope(&tvs)
        })
        .collect();
    let slope_ci = (quantile(&mut slopes, 0.005), quantile(&mut slopes, 0.995));

    Ok(EquilibriumStudy {
        times: t_grid.to_vec(),
        tv,
        exact_tv,
        equilibrium: pi,
        noise_floor,
        fit_points,
        slope,
        slope_ci,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_mass_start_has_tv_one_minus_pi0() {
        let p = ModelParams {
            q_max: 3,
            q_min: -3,
            ..ModelParams::reference()
        };
        let grid: Vec<f64> = (0..=10).map(|k| k as f64 * 2.0).collect();
        let s = equilibrium_convergence_study(
            &p,
            PolicySpec::Ergodic { kappa: 10.0 },
            0,
            &grid,
            400,
            50,
            RngSpec::new(1),
        )
        .unwrap();
        let pi0 = s.equilibrium[3];
        assert!((s.tv[0] - (1.0 - pi0)).abs() < 1e-12);
        assert!((s.exact_tv[0] - (1.0 - pi0)).abs() < 1e-12);
        assert!(s.slope < 0.0);
        assert!(s.slope_ci.0 <= s.slope && s.slope <= s.slope_ci.1);
    }

    #[test]
    fn learning_policy_rejected() {
        let p = ModelParams::reference();
        assert!(policy_tables(PolicySpec::Myopic, &p).is_err());
    }

    #[test]
    fn floor_of_uniform_law() {
        let pi = vec![0.25; 4];
        let f = sampling_floor(&pi, 100);
        assert!((f - 2.0 * (2.0 * 0.1875 / (std::f64::consts::PI * 100.0)).sqrt()).abs() < 1e-15);
    }
}
