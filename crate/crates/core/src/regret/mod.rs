//! Monte Carlo experiments: regret curves and their fits, convergence to
//! equilibrium, non-stationary tracking and parameter sweeps.

pub mod equilibrium;
pub mod fit;
pub mod monte_carlo;
pub mod nonstationary;
pub mod output;
pub mod sweep;

pub use equilibrium::{
    equilibrium_convergence_study, policy_tables, sampling_floor, EquilibriumStudy,
};
pub use fit::{fit_regret_curves, FitResult, ModelFit, RegretModel, FIT_CUTOFF};
pub use monte_carlo::{
    monte_carlo, regret_trajectory, run_scenario, ExperimentConfig, MonteCarloResult, Oracle,
    OutputGrid, ScenarioResult,
};
pub use nonstationary::{
    method_name, nonstationary_experiment, regime_tracking, MethodReport, RegimeTracking,
    DEFAULT_METHODS,
};
pub use sweep::{c1_dependency_sweep, SweepAxes, SweepRow};
