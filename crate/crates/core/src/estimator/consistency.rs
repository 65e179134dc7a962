//! Empirical convergence rate of the regularised estimator.

use rand::Rng;
use rayon::prelude::*;

use crate::depth::Depth;
use crate::error::{Error, Result};
use crate::estimator::likelihood::{solve_kappa, EstimatorConfig, FillObservation};
use crate::rng::{Purpose, RngSpec};

/// How the quoted depth of each synthetic observation is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DepthSchedule {
    Constant(f64),
    /// Uniform on `[low, high]`.
    Uniform {
        low: f64,
        high: f64,
    },
}

impl DepthSchedule {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            DepthSchedule::Constant(d) => d > 0.0 && d.is_finite(),
            DepthSchedule::Uniform { low, high } => low > 0.0 && high >= low && high.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::param(
                "depth",
                format!("depths must be finite and > 0, got {self:?}"),
            ))
        }
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            DepthSchedule::Constant(d) => d,
            DepthSchedule::Uniform { low, high } => low + (high - low) * rng.random::<f64>(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    /// `(N, 90th percentile of |κ_N - κ*|)`.
    pub quantiles: Vec<(usize, f64)>,
    /// Least-squares slope of `ln q90` against `ln N`.
    pub slope: f64,
}

/// Draws `replications` independent fill sequences at sensitivity `kappa_star`
/// and measures the estimation error of the untruncated root at each sample
/// size in `sizes`.
pub fn consistency_experiment(
    kappa_star: f64,
    depths: DepthSchedule,
    sizes: &[usize],
    replications: usize,
    config: &EstimatorConfig,
    rng: RngSpec,
) -> Result<ConsistencyReport> {
    config.validate()?;
    depths.validate()?;
    if sizes.len() < 2 || replications == 0 {
        return Err(Error::EmptyInput(
            "need at least two sample sizes and one replication",
        ));
    }
    let mut sizes = sizes.to_vec();
    sizes.sort_unstable();
    let n_max = *sizes.last().unwrap();

    let errors: Vec<Vec<f64>> = (0..replications as u64)
        .into_par_iter()
        .map(|r| {
            let mut stream = rng.stream(r, Purpose::Estimation);
            let obs: Vec<FillObservation> = (0..n_max)
                .map(|n| {
                    let d = depths.draw(&mut stream);
                    let filled = stream.random::<f64>() < (-kappa_star * d).exp();
                    FillObservation {
                        time: n as f64,
                        depth: Depth::Finite(d),
                        filled,
                    }
                })
                .collect();
            sizes
                .iter()
                .map(|&n| solve_kappa(&obs[..n], config, None).map(|e| (e.raw - kappa_star).abs()))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;

    let quantiles: Vec<(usize, f64)> = sizes
        .iter()
        .enumerate()
        .map(|(j, &n)| {
            let mut col: Vec<f64> = errors.iter().map(|e| e[j]).collect();
            (n, quantile(&mut col, 0.9))
        })
        .collect();
    let xs: Vec<f64> = quantiles.iter().map(|(n, _)| (*n as f64).ln()).collect();
    let ys: Vec<f64> = quantiles.iter().map(|(_, q)| q.ln()).collect();
    Ok(ConsistencyReport {
        slope: ols_slope(&xs, &ys),
        quantiles,
    })
}

/// Linear-interpolation quantile (type 7).
pub fn quantile(values: &mut [f64], p: f64) -> f64 {
    values.sort_by(f64::total_cmp);
    let h = (values.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    values[lo] + (h - lo as f64) * (values[hi] - values[lo])
}

pub(crate) fn ols_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
