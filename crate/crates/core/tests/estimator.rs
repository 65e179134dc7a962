use ergodic_mm::estimator::{
    log_likelihood, regularizer, score_and_slope, solve_kappa, write_trace, EstimatorConfig,
    EstimatorMode, EstimatorState, FillObservation, TRACE_HEADER,
};
use ergodic_mm::{Depth, Error};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sample(kappa: f64, n: usize, seed: u64) -> Vec<FillObservation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let d = rng.random_range(0.01..0.3);
            FillObservation {
                time: i as f64,
                depth: Depth::Finite(d),
                filled: rng.random::<f64>() < (-kappa * d).exp(),
            }
        })
        .collect()
}

fn objective(kappa: f64, obs: &[FillObservation], delta0: f64, weights: Option<&[f64]>) -> f64 {
    log_likelihood(kappa, obs, weights).unwrap() + regularizer(kappa, delta0)
}

#[test]
fn score_matches_finite_differences() {
    let obs = sample(10.0, 200, 1);
    let cfg = EstimatorConfig::default();
    for kappa in [0.5, 3.0, 10.0, 60.0] {
        let h = 1e-5 * kappa;
        let fd = (objective(kappa + h, &obs, cfg.delta0, None)
            - objective(kappa - h, &obs, cfg.delta0, None))
            / (2.0 * h);
        let (s, c) = score_and_slope(kappa, &obs, &cfg, None).unwrap();
        assert!(
            (s - fd).abs() < 1e-6 * fd.abs().max(1.0),
            "{kappa}: {s} vs {fd}"
        );
        let fd2 = (score_and_slope(kappa + h, &obs, &cfg, None).unwrap().0
            - score_and_slope(kappa - h, &obs, &cfg, None).unwrap().0)
            / (2.0 * h);
        assert!(
            (c - fd2).abs() < 1e-5 * fd2.abs().max(1.0),
            "{kappa}: {c} vs {fd2}"
        );
        assert!(c < 0.0);
    }
}

#[test]
fn root_maximises_the_objective() {
    let cfg = EstimatorConfig::default();
    for (kappa, seed) in [(4.0, 2), (10.0, 3), (40.0, 4)] {
        let obs = sample(kappa, 500, seed);
        let est = solve_kappa(&obs, &cfg, None).unwrap();
        // golden-section search on the objective itself
        let (mut a, mut b) = (0.1f64, 200.0f64);
        let r = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let c = b - r * (b - a);
            let d = a + r * (b - a);
            if objective(c, &obs, cfg.delta0, None) > objective(d, &obs, cfg.delta0, None) {
                b = d;
            } else {
                a = c;
            }
        }
        let argmax = 0.5 * (a + b);
        assert!(
            (est.raw - argmax).abs() < 1e-5 * argmax,
            "{} vs {argmax}",
            est.raw
        );
        assert_eq!(est.hat, est.raw.clamp(cfg.k_lower, cfg.k_upper));
    }
}

#[test]
fn truncation_and_extrapolation_beyond_upper_bound() {
    // only misses at tiny depths: the root runs past K̄ and is clamped
    let obs: Vec<FillObservation> = (0..50)
        .map(|i| FillObservation {
            time: i as f64,
            depth: Depth::Finite(0.01),
            filled: false,
        })
        .collect();
    let cfg = EstimatorConfig::default();
    let est = solve_kappa(&obs, &cfg, None).unwrap();
    assert!(est.raw > cfg.k_upper);
    assert_eq!(est.hat, cfg.k_upper);
    let (s_up, c_up) = score_and_slope(cfg.k_upper, &obs, &cfg, None).unwrap();
    let (s, _) = score_and_slope(est.raw, &obs, &cfg, None).unwrap();
    assert!(s.abs() < 1e-8);
    assert!((s_up + (est.raw - cfg.k_upper) * c_up).abs() < 1e-8);
}

#[test]
fn online_state_matches_batch_solutions() {
    let obs = sample(10.0, 120, 9);
    let window = 25.0;
    let alpha = 0.2;
    for mode in [
        EstimatorMode::Full,
        EstimatorMode::SlidingWindow { window },
        EstimatorMode::Ewma { alpha },
    ] {
        let cfg = EstimatorConfig::default().with_mode(mode);
        let mut state = EstimatorState::new(&cfg).unwrap();
        for (i, o) in obs.iter().enumerate() {
            state = state.update(*o, &cfg).unwrap();
            let t = o.time;
            let kept: Vec<FillObservation> = obs[..=i]
                .iter()
                .filter(|p| {
                    !matches!(mode, EstimatorMode::SlidingWindow { .. }) || t - p.time <= window
                })
                .copied()
                .collect();
            let weights: Option<Vec<f64>> = match mode {
                EstimatorMode::Ewma { alpha } => {
                    Some(kept.iter().map(|p| (-alpha * (t - p.time)).exp()).collect())
                }
                _ => None,
            };
            let batch = solve_kappa(&kept, &cfg, weights.as_deref()).unwrap();
            assert_eq!(state.retained(), kept.len());
            assert!(
                (state.kappa_raw - batch.raw).abs() <= 1e-9 * batch.raw,
                "{mode:?} at {i}"
            );
        }
        assert_eq!(state.seen, obs.len());
    }
}

#[test]
fn out_of_order_observation_is_rejected() {
    let cfg = EstimatorConfig::default();
    let state = EstimatorState::new(&cfg).unwrap();
    let at = |t: f64| FillObservation::new(t, Depth::Finite(0.1), true).unwrap();
    let state = state.update(at(2.0), &cfg).unwrap();
    assert!(matches!(
        state.update(at(1.0), &cfg),
        Err(Error::Ordering { .. })
    ));
}

#[test]
fn invalid_observations_are_domain_errors() {
    assert!(matches!(
        FillObservation::new(0.0, Depth::Infinite, true),
        Err(Error::Domain(_))
    ));
    assert!(matches!(
        FillObservation::new(0.0, Depth::Finite(-0.1), false),
        Err(Error::Domain(_))
    ));
    assert!(FillObservation::new(0.0, Depth::Infinite, false).is_ok());
}

#[test]
fn trace_csv_layout() {
    let cfg = EstimatorConfig::default();
    let obs = sample(10.0, 3, 5);
    let mut state = EstimatorState::new(&cfg).unwrap();
    let mut rows = Vec::new();
    for (i, o) in obs.iter().enumerate() {
        state = state.update(*o, &cfg).unwrap();
        rows.push(ergodic_mm::estimator::TraceRow {
            event_index: i,
            observation: *o,
            kappa_raw: state.kappa_raw,
            kappa_hat: state.kappa_hat,
        });
    }
    let mut buf = Vec::new();
    write_trace(&mut buf, &rows).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], TRACE_HEADER);
    assert_eq!(lines.len(), 4);
    for (line, row) in lines[1..].iter().zip(&rows) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 6);
        assert_eq!(cols[3], if row.observation.filled { "1" } else { "0" });
        assert_eq!(cols[5].parse::<f64>().unwrap(), row.kappa_hat);
    }
    assert!(text.ends_with('\n') && !text.contains('\r'));
}
