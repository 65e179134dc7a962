//! Regularised log-likelihood of `κ` given Bernoulli fill signals, and its
//! root.

use serde::{Deserialize, Serialize};

use crate::depth::Depth;
use crate::error::{Error, Result};

/// One market order meeting a posted quote: was the quote at `depth` hit?
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FillObservation {
    pub time: f64,
    pub depth: Depth,
    pub filled: bool,
}

impl FillObservation {
    pub fn new(time: f64, depth: Depth, filled: bool) -> Result<Self> {
        if !(time >= 0.0 && time.is_finite()) {
            return Err(Error::Domain(format!(
                "observation time must be finite and >= 0, got {time}"
            )));
        }
        match depth {
            Depth::Infinite if filled => Err(Error::Domain(
                "a quote at infinite depth cannot be filled".into(),
            )),
            Depth::Finite(d) if !(d >= 0.0 && d.is_finite()) => Err(Error::Domain(format!(
                "observed depth must be >= 0, got {d}"
            ))),
            Depth::Finite(d) if d == 0.0 && !filled => Err(Error::Domain(
                "a quote at depth 0 fills with probability 1".into(),
            )),
            _ => Ok(FillObservation {
                time,
                depth,
                filled,
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EstimatorMode {
    Full,
    SlidingWindow { window: f64 },
    Ewma { alpha: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub delta0: f64,
    pub k_lower: f64,
    pub k_upper: f64,
    pub kappa_init: f64,
    pub mode: EstimatorMode,
    pub root_tolerance: f64,
    pub max_iterations: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            delta0: 0.01,
            k_lower: 1.0,
            k_upper: 100.0,
            kappa_init: 5.0,
            mode: EstimatorMode::Full,
            root_tolerance: 1e-10,
            max_iterations: 200,
        }
    }
}

impl EstimatorConfig {
    pub fn with_mode(self, mode: EstimatorMode) -> Self {
        EstimatorConfig { mode, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |field: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(
                    field,
                    format!("must be finite and > 0, got {v}"),
                ))
            }
        };
        positive("delta0", self.delta0)?;
        positive("k_lower", self.k_lower)?;
        positive("k_upper", self.k_upper)?;
        positive("kappa_init", self.kappa_init)?;
        positive("root_tolerance", self.root_tolerance)?;
        if self.k_lower >= self.k_upper {
            return Err(Error::param(
                "k_lower",
                format!("must be < k_upper ({} >= {})", self.k_lower, self.k_upper),
            ));
        }
        if self.max_iterations == 0 {
            return Err(Error::param("max_iterations", "must be >= 1"));
        }
        match self.mode {
            EstimatorMode::Full => Ok(()),
            EstimatorMode::SlidingWindow { window } => positive("window", window),
            EstimatorMode::Ewma { alpha } => positive("alpha", alpha),
        }
    }

    /// Truncation `ϱ`.
    pub fn truncate(&self, kappa: f64) -> f64 {
        kappa.clamp(self.k_lower, self.k_upper)
    }
}

fn check_kappa(kappa: f64) -> Result<()> {
    if kappa > 0.0 && kappa.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "kappa must be finite and > 0, got {kappa}"
        )))
    }
}

fn weight(weights: Option<&[f64]>, n: usize) -> f64 {
    weights.map_or(1.0, |w| w[n])
}

fn check_weights(obs: &[FillObservation], weights: Option<&[f64]>) -> Result<()> {
    match weights {
        Some(w) if w.len() != obs.len() => Err(Error::Structural(format!(
            "{} weights for {} observations",
            w.len(),
            obs.len()
        ))),
        _ => Ok(()),
    }
}

/// `ln(1 - e^{-x})` for `x > 0`.
fn log_one_minus_exp_neg(x: f64) -> f64 {
    (-(-x).exp_m1()).ln()
}

/// `e^{-x} / (1 - e^{-x})`.
fn odds(x: f64) -> f64 {
    1.0 / x.exp_m1()
}

/// `e^{-x} / (1 - e^{-x})²`, written to stay finite for large `x`.
fn odds_curvature(x: f64) -> f64 {
    1.0 / (x.exp_m1() * -(-x).exp_m1())
}

/// `ℓ_N(κ) = Σ wₙ (-κδₙYₙ + (1 - Yₙ) ln(1 - e^{-κδₙ}))`.
pub fn log_likelihood(kappa: f64, obs: &[FillObservation], weights: Option<&[f64]>) -> Result<f64> {
    check_kappa(kappa)?;
    check_weights(obs, weights)?;
    Ok(obs
        .iter()
        .enumerate()
        .map(|(n, o)| {
            let term = match (o.depth, o.filled) {
                (Depth::Infinite, _) => 0.0,
                (Depth::Finite(d), true) => -kappa * d,
                (Depth::Finite(d), false) => log_one_minus_exp_neg(kappa * d),
            };
            weight(weights, n) * term
        })
        .sum())
}

/// `R(κ) = -κδ₀ + ln(1 - e^{-κδ₀})`.
pub fn regularizer(kappa: f64, delta0: f64) -> f64 {
    -kappa * delta0 + log_one_minus_exp_neg(kappa * delta0)
}

/// `(ℓ_N + R)'` and `(ℓ_N + R)''` at `κ`, no extrapolation.
fn raw_derivatives(
    kappa: f64,
    obs: &[FillObservation],
    delta0: f64,
    weights: Option<&[f64]>,
) -> (f64, f64) {
    let x0 = kappa * delta0;
    let mut d1 = -delta0 + delta0 * odds(x0);
    let mut d2 = -delta0 * delta0 * odds_curvature(x0);
    for (n, o) in obs.iter().enumerate() {
        let Depth::Finite(d) = o.depth else { continue };
        let w = weight(weights, n);
        if o.filled {
            d1 -= w * d;
        } else {
            let x = kappa * d;
            d1 += w * d * odds(x);
            d2 -= w * d * d * odds_curvature(x);
        }
    }
    (d1, d2)
}

/// Score of the regularised likelihood `ℓ̃_N`, with its derivative.
/// Beyond `K̄` the score continues linearly from its value and slope at `K̄`.
pub fn score_and_slope(
    kappa: f64,
    obs: &[FillObservation],
    config: &EstimatorConfig,
    weights: Option<&[f64]>,
) -> Result<(f64, f64)> {
    check_kappa(kappa)?;
    check_weights(obs, weights)?;
    if kappa <= config.k_upper {
        Ok(raw_derivatives(kappa, obs, config.delta0, weights))
    } else {
        let (s, c) = raw_derivatives(config.k_upper, obs, config.delta0, weights);
        Ok((s + (kappa - config.k_upper) * c, c))
    }
}

pub fn score_regularized(
    kappa: f64,
    obs: &[FillObservation],
    config: &EstimatorConfig,
    weights: Option<&[f64]>,
) -> Result<f64> {
    score_and_slope(kappa, obs, config, weights).map(|(s, _)| s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaEstimate {
    /// Root of the regularised score.
    pub raw: f64,
    /// `ϱ(raw)`.
    pub hat: f64,
    pub iterations: usize,
}

const BRACKET_LIMIT: f64 = 1_152_921_504_606_846_976.0; // 2^60

/// Unique positive root of the regularised score.
///
/// The bracket starts at `kappa_init` and is widened geometrically on the side
/// where the sign change lies; the root is then polished by Newton steps that
/// fall back to bisection whenever they leave the bracket.
pub fn solve_kappa(
    obs: &[FillObservation],
    config: &EstimatorConfig,
    weights: Option<&[f64]>,
) -> Result<KappaEstimate> {
    config.validate()?;
    check_weights(obs, weights)?;
    let score = |k: f64| score_and_slope(k, obs, config, weights);

    let mut iterations = 0;
    let start = config.kappa_init;
    let (s0, _) = score(start)?;
    if s0 == 0.0 {
        return Ok(KappaEstimate {
            raw: start,
            hat: config.truncate(start),
            iterations,
        });
    }
    let (mut lo, mut hi) = (start, start);
    if s0 > 0.0 {
        loop {
            hi *= 2.0;
            if hi > BRACKET_LIMIT {
                return Err(Error::Convergence { iterations });
            }
            if score(hi)?.0 < 0.0 {
                break;
            }
            lo = hi;
        }
    } else {
        loop {
            lo *= 0.5;
            if lo < 1.0 / BRACKET_LIMIT {
                return Err(Error::Convergence { iterations });
            }
            if score(lo)?.0 > 0.0 {
                break;
            }
            hi = lo;
        }
    }

    let mut kappa = 0.5 * (lo + hi);
    while iterations < config.max_iterations {
        iterations += 1;
        let (s, slope) = score(kappa)?;
        if s == 0.0 {
            return Ok(KappaEstimate {
                raw: kappa,
                hat: config.truncate(kappa),
                iterations,
            });
        }
        if s > 0.0 {
            lo = kappa;
        } else {
            hi = kappa;
        }
        let newton = kappa - s / slope;
        let next = if newton > lo && newton < hi && slope < 0.0 {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let tol = config.root_tolerance * kappa.max(1.0);
        if (next - kappa).abs() <= tol || hi - lo <= tol {
            return Ok(KappaEstimate {
                raw: next,
                hat: config.truncate(next),
                iterations,
            });
        }
        kappa = next;
    }
    Err(Error::Convergence { iterations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn obs(depth: f64, filled: bool) -> FillObservation {
        FillObservation::new(0.0, Depth::Finite(depth), filled).unwrap()
    }

    #[test]
    fn single_term_likelihoods() {
        assert_eq!(log_likelihood(10.0, &[], None).unwrap(), 0.0);
        assert_relative_eq!(
            log_likelihood(10.0, &[obs(0.1, true)], None).unwrap(),
            -1.0,
            epsilon = 1e-15
        );
        assert_relative_eq!(
            log_likelihood(10.0, &[obs(0.1, false)], None).unwrap(),
            (1.0 - (-1.0f64).exp()).ln(),
            epsilon = 1e-15
        );
        assert!(log_likelihood(0.0, &[], None).is_err());
    }

    #[test]
    fn rejects_impossible_observations() {
        assert!(FillObservation::new(0.0, Depth::Infinite, true).is_err());
        assert!(FillObservation::new(0.0, Depth::Finite(0.0), false).is_err());
        assert!(FillObservation::new(0.0, Depth::Finite(-0.1), true).is_err());
        assert!(FillObservation::new(f64::NAN, Depth::Finite(0.1), true).is_err());
    }

    #[test]
    fn score_matches_finite_difference() {
        let cfg = EstimatorConfig {
            delta0: 0.05,
            ..Default::default()
        };
        let data: Vec<_> = (0..20)
            .map(|i| obs(0.02 + 0.01 * i as f64, i % 3 == 0))
            .collect();
        let objective =
            |k: f64| log_likelihood(k, &data, None).unwrap() + regularizer(k, cfg.delta0);
        for k in [0.5, 3.0, 12.0, 60.0] {
            let h = 1e-5 * k;
            let fd = (objective(k + h) - objective(k - h)) / (2.0 * h);
            let (s, c) = score_and_slope(k, &data, &cfg, None).unwrap();
            assert_relative_eq!(s, fd, max_relative = 1e-6, epsilon = 1e-8);
            let fd2 = (score_regularized(k + h, &data, &cfg, None).unwrap()
                - score_regularized(k - h, &data, &cfg, None).unwrap())
                / (2.0 * h);
            assert_relative_eq!(c, fd2, max_relative = 1e-5);
        }
    }

    #[test]
    fn extrapolation_is_linear_beyond_upper_bound() {
        let cfg = EstimatorConfig {
            k_upper: 20.0,
            ..Default::default()
        };
        let data = vec![obs(0.1, true); 5];
        let (s, c) = score_and_slope(20.0, &data, &cfg, None).unwrap();
        assert_relative_eq!(
            score_regularized(25.0, &data, &cfg, None).unwrap(),
            s + 5.0 * c,
            epsilon = 1e-12
        );
        assert!(c < 0.0);
    }

    #[test]
    fn regularizer_only_root() {
        let cfg = EstimatorConfig {
            delta0: 0.1,
            ..Default::default()
        };
        let est = solve_kappa(&[], &cfg, None).unwrap();
        assert_relative_eq!(est.raw, 2f64.ln() / 0.1, epsilon = 1e-8);
    }

    #[test]
    fn weights_scale_terms() {
        let data = [obs(0.1, true), obs(0.2, false)];
        let w = [0.5, 2.0];
        let direct = -0.5 + 2.0 * (1.0 - (-2.0f64).exp()).ln();
        assert_relative_eq!(
            log_likelihood(10.0, &data, Some(&w)).unwrap(),
            direct,
            epsilon = 1e-14
        );
        assert!(log_likelihood(10.0, &data, Some(&[1.0])).is_err());
    }

    #[test]
    fn truncation() {
        let cfg = EstimatorConfig {
            k_lower: 1.0,
            k_upper: 100.0,
            ..Default::default()
        };
        assert_eq!(cfg.truncate(150.0), 100.0);
        assert_eq!(cfg.truncate(0.2), 1.0);
        assert_eq!(cfg.truncate(7.0), 7.0);
    }

    #[test]
    fn invalid_config() {
        let bad = EstimatorConfig {
            k_lower: 10.0,
            k_upper: 5.0,
            ..Default::default()
        };
        assert!(matches!(
            solve_kappa(&[], &bad, None),
            Err(Error::InvalidParameter {
                field: "k_lower",
                ..
            })
        ));
        let bad = EstimatorConfig {
            mode: EstimatorMode::Ewma { alpha: 0.0 },
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
