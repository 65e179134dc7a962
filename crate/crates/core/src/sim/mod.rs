//! Event-driven simulation of the controlled market: Poisson market orders,
//! Bernoulli fills at the posted depths, exact reward accounting.

pub mod engine;
pub mod policy;
pub mod record;
pub mod schedule;

pub use engine::{fill_outcome, next_arrival, simulate, SimOptions, SimulationSetup};
pub use policy::{PolicySpec, Quoter};
pub use record::{
    empirical_distribution, write_trajectory, MarketEvent, Sample, Side, TrajectoryRecord,
    TRAJECTORY_HEADER,
};
pub use schedule::KappaSchedule;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::depth::Depth;
    use crate::estimator::{EstimatorConfig, EstimatorMode};
    use crate::params::ModelParams;
    use crate::rng::{Purpose, RngSpec};

    fn small() -> ModelParams {
        ModelParams {
            q_max: 3,
            q_min: -3,
            ..ModelParams::reference()
        }
    }

    fn run(
        policy: PolicySpec,
        params: ModelParams,
        horizon: f64,
        options: &SimOptions,
    ) -> TrajectoryRecord {
        let setup = SimulationSetup::new(params, policy, EstimatorConfig::default(), horizon);
        simulate(&setup, RngSpec::new(7), 0, options).unwrap()
    }

    #[test]
    fn arrival_moments() {
        let mut rng = RngSpec::new(1).stream(0, Purpose::Arrivals);
        let n = 100_000;
        let (mut sum, mut buys) = (0.0, 0);
        for _ in 0..n {
            let (dt, side) = next_arrival(&mut rng, 1.0, 1.0);
            sum += dt;
            buys += usize::from(side == Side::BuyMo);
        }
        let mean = sum / n as f64;
        assert!((mean - 0.5).abs() < 3.0 * 0.5 / (n as f64).sqrt(), "{mean}");
        let freq = buys as f64 / n as f64;
        assert!((freq - 0.5).abs() < 3.0 * 0.5 / (n as f64).sqrt(), "{freq}");
    }

    #[test]
    fn fill_frequency() {
        let mut rng = RngSpec::new(2).stream(0, Purpose::Arrivals);
        let n = 100_000;
        let fills = (0..n)
            .filter(|_| fill_outcome(&mut rng, Depth::Finite(0.1), 10.0).unwrap())
            .count();
        let p = (-1.0f64).exp();
        let freq = fills as f64 / n as f64;
        assert!(
            (freq - p).abs() < 3.0 * (p * (1.0 - p) / n as f64).sqrt(),
            "{freq}"
        );
        assert!(fill_outcome(&mut rng, Depth::Finite(0.0), 10.0).unwrap());
        assert!(!fill_outcome(&mut rng, Depth::Infinite, 10.0).unwrap());
        assert!(fill_outcome(&mut rng, Depth::Finite(-1.0), 10.0).is_err());
    }

    #[test]
    fn no_quotes_no_reward() {
        let params = ModelParams {
            phi: 0.0,
            ..small()
        };
        let traj = run(
            PolicySpec::FixedDepth(Depth::Infinite),
            params,
            500.0,
            &SimOptions {
                record_events: true,
                ..Default::default()
            },
        );
        assert_eq!(traj.reward_integral, 0.0);
        assert_eq!(traj.fill_count, 0);
        assert!(traj
            .events
            .iter()
            .all(|e| e.inventory_after == 0 && !e.filled));
    }

    #[test]
    fn penalty_only_reward_is_exact() {
        let setup = SimulationSetup {
            initial_inventory: 2,
            ..SimulationSetup::new(
                small(),
                PolicySpec::FixedDepth(Depth::Infinite),
                EstimatorConfig::default(),
                40.0,
            )
        };
        let traj = simulate(
            &setup,
            RngSpec::new(3),
            0,
            &SimOptions {
                record_events: true,
                ..Default::default()
            },
        )
        .unwrap();
        let rate = -1e-5 * 4.0;
        let mut expected = 0.0;
        let mut last = 0.0;
        for t in traj.events.iter().map(|e| e.time).chain([40.0]) {
            expected += rate * (t - last);
            last = t;
        }
        assert!(traj.event_count > 10);
        assert_eq!(traj.reward_integral, expected);
    }

    #[test]
    fn inventory_stays_in_bounds_and_samples_match_events() {
        let options = SimOptions {
            sample_times: vec![0.0, 10.0, 99.5, 200.0],
            record_events: true,
            mid_price: true,
        };
        let traj = run(
            PolicySpec::FixedDepth(Depth::Finite(0.01)),
            small(),
            200.0,
            &options,
        );
        assert!(traj
            .events
            .iter()
            .all(|e| (-3..=3).contains(&e.inventory_after)));
        assert!(traj
            .events
            .iter()
            .any(|e| e.inventory_after == 3 || e.inventory_after == -3));
        for s in &traj.samples {
            let i = traj.events.partition_point(|e| e.time <= s.time);
            let q = if i == 0 {
                0
            } else {
                traj.events[i - 1].inventory_after
            };
            assert_eq!(s.inventory, q);
        }
        assert_eq!(traj.samples[0].reward_integral, 0.0);
        assert_eq!(traj.samples[3].reward_integral, traj.reward_integral);
        assert!(traj.pnl.is_some());
    }

    #[test]
    fn deterministic_per_seed_and_scenario() {
        let setup = SimulationSetup::new(
            small(),
            PolicySpec::Learned(EstimatorMode::Full),
            EstimatorConfig::default(),
            100.0,
        );
        let opts = SimOptions {
            record_events: true,
            ..Default::default()
        };
        let a = simulate(&setup, RngSpec::new(11), 4, &opts).unwrap();
        let b = simulate(&setup, RngSpec::new(11), 4, &opts).unwrap();
        let c = simulate(&setup, RngSpec::new(11), 5, &opts).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.events, c.events);
        assert_eq!(a.trace.len(), a.event_count);
    }

    #[test]
    fn myopic_posts_inverse_estimate() {
        let traj = run(
            PolicySpec::Myopic,
            small(),
            100.0,
            &SimOptions {
                record_events: true,
                ..Default::default()
            },
        );
        let mut prev = EstimatorConfig::default().truncate(EstimatorConfig::default().kappa_init);
        for e in &traj.events {
            if let Depth::Finite(d) = e.posted_depth {
                assert_eq!(d, 1.0 / prev);
            }
            prev = e.kappa_hat.unwrap();
        }
    }

    #[test]
    fn schedule_splits_reward_integral() {
        let params = small();
        let schedule = KappaSchedule::regimes(&[10.0, 30.0], 50.0).unwrap();
        let setup = SimulationSetup::new(
            params,
            PolicySpec::FixedDepth(Depth::Finite(0.05)),
            EstimatorConfig::default(),
            100.0,
        )
        .with_schedule(schedule);
        let traj = simulate(
            &setup,
            RngSpec::new(5),
            0,
            &SimOptions {
                record_events: true,
                sample_times: vec![50.0],
                ..Default::default()
            },
        )
        .unwrap();
        let s = traj.samples[0];
        assert_eq!(s.kappa_star, 30.0);
        assert!(traj.reward_integral.is_finite());
    }
}
