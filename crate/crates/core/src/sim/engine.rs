use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::depth::Depth;
use crate::error::{Error, Result};
use crate::estimator::{EstimatorConfig, EstimatorState, FillObservation, TraceRow};
use crate::hjb::running_reward;
use crate::params::ModelParams;
use crate::rng::{Purpose, RngSpec};
use crate::sim::policy::{PolicySpec, Quoter};
use crate::sim::record::{MarketEvent, Sample, Side, TrajectoryRecord};
use crate::sim::schedule::KappaSchedule;

/// Time to the next market order of either side and which side it is.
pub fn next_arrival<R: Rng>(rng: &mut R, lambda_plus: f64, lambda_minus: f64) -> (f64, Side) {
    let total = lambda_plus + lambda_minus;
    let e: f64 = rng.sample(Exp1);
    let side = if rng.random::<f64>() * total < lambda_plus {
        Side::BuyMo
    } else {
        Side::SellMo
    };
    (e / total, side)
}

/// Whether a market order trades with a quote at `depth`: one uniform `U` is
/// drawn and the fill happens when `U < e^{-κ*δ}`.
pub fn fill_outcome<R: Rng>(rng: &mut R, depth: Depth, kappa_star: f64) -> Result<bool> {
    let u: f64 = rng.random();
    match depth {
        Depth::Finite(d) if !(d >= 0.0) => {
            Err(Error::Domain(format!("depth must be >= 0, got {d}")))
        }
        _ => Ok(u < depth.fill_probability(kappa_star)),
    }
}

/// Everything a path depends on except its random stream.
#[derive(Debug, Clone)]
pub struct SimulationSetup {
    /// Market and penalty constants; `kappa` is ignored in favour of the schedule.
    pub params: ModelParams,
    pub kappa_star: KappaSchedule,
    pub policy: PolicySpec,
    pub estimator: EstimatorConfig,
    pub horizon: f64,
    pub initial_inventory: i32,
}

impl SimulationSetup {
    pub fn new(
        params: ModelParams,
        policy: PolicySpec,
        estimator: EstimatorConfig,
        horizon: f64,
    ) -> Self {
        SimulationSetup {
            kappa_star: KappaSchedule::constant(params.kappa),
            params,
            policy,
            estimator,
            horizon,
            initial_inventory: 0,
        }
    }

    pub fn with_schedule(self, kappa_star: KappaSchedule) -> Self {
        SimulationSetup { kappa_star, ..self }
    }

    fn validate(&self) -> Result<()> {
        self.params.validate(false)?;
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::param(
                "horizon",
                format!("must be finite and > 0, got {}", self.horizon),
            ));
        }
        if !self.params.grid().contains(self.initial_inventory) {
            return Err(Error::param(
                "initial_inventory",
                format!("{} is outside the grid", self.initial_inventory),
            ));
        }
        self.estimator.validate()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimOptions {
    /// Increasing times in `[0, T]` at which the path state is recorded.
    pub sample_times: Vec<f64>,
    pub record_events: bool,
    /// Simulate the mid-price (Brownian, its own random stream) and cash.
    pub mid_price: bool,
}

struct Path<'a> {
    setup: &'a SimulationSetup,
    samples: &'a [f64],
    next_sample: usize,
    out: Vec<Sample>,
    clock: f64,
    reward: f64,
    q: i32,
    quotes: (Depth, Depth),
    kappa_hat: Option<f64>,
}

impl Path<'_> {
    fn rate(&self, kappa_star: f64) -> f64 {
        running_reward(
            &self.setup.params,
            self.q,
            self.quotes.0,
            self.quotes.1,
            kappa_star,
        )
    }

    /// Integrates the reward up to `to`, splitting at `κ*` switches, and
    /// records any sample times passed on the way.
    fn advance(&mut self, to: f64) {
        let schedule = &self.setup.kappa_star;
        loop {
            let kappa_star = schedule.at(self.clock);
            let end = schedule.next_switch(self.clock).min(to);
            let rate = self.rate(kappa_star);
            while let Some(&s) = self.samples.get(self.next_sample) {
                if s > end {
                    break;
                }
                self.out.push(Sample {
                    time: s,
                    inventory: self.q,
                    reward_integral: self.reward + rate * (s - self.clock),
                    kappa_hat: self.kappa_hat,
                    kappa_star: schedule.at(s),
                });
                self.next_sample += 1;
            }
            self.reward += rate * (end - self.clock);
            self.clock = end;
            if end >= to {
                break;
            }
        }
    }
}

/// One path of the controlled market on `[0, T]`.
///
/// Each arrival consumes exactly three draws from the arrival stream
/// (inter-arrival time, side, fill uniform), so paths under different
/// policies share their order flow.
pub fn simulate(
    setup: &SimulationSetup,
    rng: RngSpec,
    scenario: u64,
    options: &SimOptions,
) -> Result<TrajectoryRecord> {
    setup.validate()?;
    let samples = &options.sample_times;
    if samples.windows(2).any(|w| !(w[1] > w[0]))
        || samples.iter().any(|&s| !(0.0..=setup.horizon).contains(&s))
    {
        return Err(Error::param(
            "sample_times",
            "must increase strictly and lie in [0, T]",
        ));
    }
    let p = &setup.params;
    let mut arrivals = rng.stream(scenario, Purpose::Arrivals);
    let mut mid_rng: Option<ChaCha8Rng> = options
        .mid_price
        .then(|| rng.stream(scenario, Purpose::MidPrice));
    let mut mid = p.s0;
    let mut cash = 0.0;

    let estimator_config = setup
        .policy
        .estimator_mode()
        .map(|mode| setup.estimator.with_mode(mode));
    let mut estimator = estimator_config
        .as_ref()
        .map(EstimatorState::new)
        .transpose()?;
    let mut quoter = Quoter::new(setup.policy, p)?;
    let kappa_hat = estimator.as_ref().map(|s| s.kappa_hat);
    let q0 = setup.initial_inventory;
    let quotes = quoter.quotes(q0, kappa_hat.unwrap_or(f64::NAN))?;

    let mut path = Path {
        setup,
        samples,
        next_sample: 0,
        out: Vec::with_capacity(samples.len()),
        clock: 0.0,
        reward: 0.0,
        q: q0,
        quotes,
        kappa_hat,
    };
    let mut events = Vec::new();
    let mut trace = Vec::new();
    let (mut event_count, mut fill_count) = (0, 0);

    loop {
        let (dt, side) = next_arrival(&mut arrivals, p.lambda_plus, p.lambda_minus);
        let t = path.clock + dt;
        let depth = match side {
            Side::BuyMo => path.quotes.0,
            Side::SellMo => path.quotes.1,
        };
        let filled = fill_outcome(
            &mut arrivals,
            depth,
            setup.kappa_star.at(t.min(setup.horizon)),
        )?;
        if t > setup.horizon {
            path.advance(setup.horizon);
            if let Some(r) = mid_rng.as_mut() {
                mid += p.sigma
                    * (setup.horizon - (t - dt)).sqrt()
                    * r.sample::<f64, _>(StandardNormal);
            }
            break;
        }
        path.advance(t);
        if let Some(r) = mid_rng.as_mut() {
            mid += p.sigma * dt.sqrt() * r.sample::<f64, _>(StandardNormal);
        }
        event_count += 1;
        if filled {
            fill_count += 1;
            let d = depth.value();
            match side {
                Side::BuyMo => {
                    path.q -= 1;
                    cash += mid + d;
                }
                Side::SellMo => {
                    path.q += 1;
                    cash -= mid - d;
                }
            }
        }
        if let (Some(state), Some(cfg)) = (estimator.take(), estimator_config.as_ref()) {
            let obs = FillObservation {
                time: t,
                depth,
                filled,
            };
            let state = state.update(obs, cfg)?;
            path.kappa_hat = Some(state.kappa_hat);
            if options.record_events {
                trace.push(TraceRow {
                    event_index: event_count - 1,
                    observation: obs,
                    kappa_raw: state.kappa_raw,
                    kappa_hat: state.kappa_hat,
                });
            }
            estimator = Some(state);
        }
        path.quotes = quoter.quotes(path.q, path.kappa_hat.unwrap_or(f64::NAN))?;
        if options.record_events {
            events.push(MarketEvent {
                time: t,
                side,
                posted_depth: depth,
                filled,
                inventory_after: path.q,
                reward_integral: path.reward,
                kappa_hat: path.kappa_hat,
                mid_price: options.mid_price.then_some(mid),
            });
        }
    }

    Ok(TrajectoryRecord {
        horizon: setup.horizon,
        initial_inventory: q0,
        events,
        trace,
        samples: path.out,
        event_count,
        fill_count,
        reward_integral: path.reward,
        final_inventory: path.q,
        final_kappa_hat: path.kappa_hat,
        pnl: options.mid_price.then_some(cash + path.q as f64 * mid),
    })
}
