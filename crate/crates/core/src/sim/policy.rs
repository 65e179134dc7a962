use std::fmt;

use crate::depth::Depth;
use crate::error::{Error, Result};
use crate::estimator::EstimatorMode;
use crate::hjb::{solve_ergodic, ErgodicSolution};
use crate::params::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicySpec {
    /// Quotes optimal for a fixed `κ`.
    Ergodic {
        kappa: f64,
    },
    /// `1/κ̂_t` on both sides, `κ̂_t` learned in full-history mode.
    Myopic,
    FixedDepth(Depth),
    /// Ergodic quotes at the current estimate.
    Learned(EstimatorMode),
}

impl PolicySpec {
    pub fn learns(&self) -> bool {
        matches!(self, PolicySpec::Myopic | PolicySpec::Learned(_))
    }

    /// Estimator mode driving `κ̂_t`, if the policy learns.
    pub fn estimator_mode(&self) -> Option<EstimatorMode> {
        match self {
            PolicySpec::Myopic => Some(EstimatorMode::Full),
            PolicySpec::Learned(mode) => Some(*mode),
            _ => None,
        }
    }
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicySpec::Ergodic { kappa } => write!(f, "ergodic:{kappa}"),
            PolicySpec::Myopic => f.write_str("myopic"),
            PolicySpec::FixedDepth(d) => match d {
                Depth::Infinite => f.write_str("fixed:inf"),
                Depth::Finite(x) => write!(f, "fixed:{x}"),
            },
            PolicySpec::Learned(EstimatorMode::Full) => f.write_str("learn:full"),
            PolicySpec::Learned(EstimatorMode::SlidingWindow { .. }) => f.write_str("learn:sw"),
            PolicySpec::Learned(EstimatorMode::Ewma { .. }) => f.write_str("learn:ewma"),
        }
    }
}

impl PolicySpec {
    /// Parses a selector `ergodic:<k>|myopic|learn:full|learn:sw|learn:ewma|fixed:<d>`;
    /// `learn:sw` and `learn:ewma` take the given window and decay rate.
    pub fn parse(s: &str, window: f64, alpha: f64) -> Result<Self, String> {
        let s = s.trim();
        let (head, arg) = s.split_once(':').map_or((s, None), |(h, a)| (h, Some(a)));
        match (head, arg) {
            ("myopic", None) => Ok(PolicySpec::Myopic),
            ("learn", Some("full")) => Ok(PolicySpec::Learned(EstimatorMode::Full)),
            ("learn", Some("sw")) => Ok(PolicySpec::Learned(EstimatorMode::SlidingWindow { window })),
            ("learn", Some("ewma")) => Ok(PolicySpec::Learned(EstimatorMode::Ewma { alpha })),
            ("ergodic", Some(k)) => match k.parse::<f64>() {
                Ok(kappa) if kappa > 0.0 && kappa.is_finite() => Ok(PolicySpec::Ergodic { kappa }),
                _ => Err(format!("`{s}`: kappa must be a finite positive number")),
            },
            ("fixed", Some(d)) => match d.parse::<Depth>() {
                Ok(depth) if depth.value() >= 0.0 => Ok(PolicySpec::FixedDepth(depth)),
                Ok(_) => Err(format!("`{s}`: depth must be >= 0")),
                Err(e) => Err(format!("`{s}`: {e}")),
            },
            _ => Err(format!(
                "unknown policy `{s}` (expected ergodic:<kappa>|myopic|learn:full|learn:sw|learn:ewma|fixed:<depth>)"
            )),
        }
    }
}

/// Turns a policy into quotes, caching the ergodic solution for the last
/// quoting `κ`.
#[derive(Debug, Clone)]
pub struct Quoter {
    policy: PolicySpec,
    params: ModelParams,
    cache: Option<ErgodicSolution>,
}

impl Quoter {
    pub fn new(policy: PolicySpec, params: &ModelParams) -> Result<Self> {
        let mut quoter = Quoter {
            policy,
            params: *params,
            cache: None,
        };
        match policy {
            PolicySpec::Ergodic { kappa } => quoter.solution(kappa)?,
            PolicySpec::FixedDepth(Depth::Finite(d)) if !(d >= 0.0) => {
                return Err(Error::Policy(format!("fixed depth must be >= 0, got {d}")));
            }
            _ => {}
        }
        Ok(quoter)
    }

    fn solution(&mut self, kappa: f64) -> Result<()> {
        if self
            .cache
            .as_ref()
            .is_none_or(|s| s.kappa.to_bits() != kappa.to_bits())
        {
            self.cache = Some(solve_ergodic(&self.params.with_kappa(kappa))?);
        }
        Ok(())
    }

    /// `(ask, bid)` at inventory `q` given the current estimate.
    pub fn quotes(&mut self, q: i32, kappa_hat: f64) -> Result<(Depth, Depth)> {
        let p = &self.params;
        let gate = |open: bool, d: Depth| if open { d } else { Depth::Infinite };
        let (ask, bid) = match self.policy {
            PolicySpec::Ergodic { .. } => self
                .cache
                .as_ref()
                .and_then(|s| s.quotes(q))
                .expect("solved in new"),
            PolicySpec::Learned(_) => {
                self.solution(kappa_hat)?;
                self.cache
                    .as_ref()
                    .and_then(|s| s.quotes(q))
                    .expect("just solved")
            }
            PolicySpec::Myopic => {
                let d = Depth::Finite(1.0 / kappa_hat);
                (gate(q > p.q_min, d), gate(q < p.q_max, d))
            }
            PolicySpec::FixedDepth(d) => (gate(q > p.q_min, d), gate(q < p.q_max, d)),
        };
        for d in [ask, bid] {
            if let Depth::Finite(x) = d {
                if !(x >= 0.0) {
                    return Err(Error::Policy(format!(
                        "{} quotes negative depth {x} at inventory {q}",
                        self.policy
                    )));
                }
            }
        }
        Ok((ask, bid))
    }
}
