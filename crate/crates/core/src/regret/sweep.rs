use crate::error::Result;
use crate::regret::monte_carlo::{monte_carlo, ExperimentConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxes {
    /// `(φ, λ)` with `λ⁺ = λ⁻ = λ`.
    PhiLambda,
    /// `(K̄, κ₀ - κ*)` with `K_ = 1/K̄`.
    UpperBoundOffset,
}

impl SweepAxes {
    pub fn names(self) -> (&'static str, &'static str) {
        match self {
            SweepAxes::PhiLambda => ("phi", "lambda"),
            SweepAxes::UpperBoundOffset => ("k_upper", "kappa0_offset"),
        }
    }

    pub fn apply(self, base: &ExperimentConfig, p1: f64, p2: f64) -> ExperimentConfig {
        let mut cfg = base.clone();
        match self {
            SweepAxes::PhiLambda => {
                cfg.model.phi = p1;
                cfg.model.lambda_plus = p2;
                cfg.model.lambda_minus = p2;
            }
            SweepAxes::UpperBoundOffset => {
                cfg.estimator.k_upper = p1;
                cfg.estimator.k_lower = 1.0 / p1;
                cfg.estimator.kappa_init = cfg.model.kappa + p2;
            }
        }
        cfg
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub param1: f64,
    pub param2: f64,
    /// `ln²T` coefficient of the fitted mean regret.
    pub c1: f64,
}

/// Fitted `C₁` for each `(param1, param2)` cell, every cell on the same seed.
pub fn c1_dependency_sweep(
    base: &ExperimentConfig,
    axes: SweepAxes,
    cells: &[(f64, f64)],
) -> Result<Vec<SweepRow>> {
    cells
        .iter()
        .map(|&(p1, p2)| {
            let result = monte_carlo(&axes.apply(base, p1, p2))?;
            Ok(SweepRow {
                param1: p1,
                param2: p2,
                c1: result.fit.c1(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::EstimatorMode;
    use crate::regret::monte_carlo::OutputGrid;
    use crate::sim::PolicySpec;

    #[test]
    fn axes_set_the_right_fields() {
        let base = ExperimentConfig::regret_reference(PolicySpec::Myopic, 1);
        let a = SweepAxes::PhiLambda.apply(&base, 1e-4, 0.7);
        assert_eq!(
            (a.model.phi, a.model.lambda_plus, a.model.lambda_minus),
            (1e-4, 0.7, 0.7)
        );
        let b = SweepAxes::UpperBoundOffset.apply(&base, 50.0, 5.0);
        assert_eq!(
            (
                b.estimator.k_upper,
                b.estimator.k_lower,
                b.estimator.kappa_init
            ),
            (50.0, 0.02, 15.0)
        );
    }

    #[test]
    fn single_cell_matches_monte_carlo() {
        let mut base =
            ExperimentConfig::regret_reference(PolicySpec::Learned(EstimatorMode::Full), 9);
        base.horizon = 50.0;
        base.scenarios = 4;
        base.grid = OutputGrid::LogSpaced { points: 50 };
        let rows = c1_dependency_sweep(&base, SweepAxes::PhiLambda, &[(1e-6, 0.4)]).unwrap();
        let direct = monte_carlo(&base).unwrap().fit.c1();
        assert_eq!(
            rows,
            vec![SweepRow {
                param1: 1e-6,
                param2: 0.4,
                c1: direct
            }]
        );
    }
}
