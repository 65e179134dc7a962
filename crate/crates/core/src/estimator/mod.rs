//! Online estimation of the price sensitivity `κ*` from fill signals.

pub mod consistency;
pub mod likelihood;
pub mod state;

pub use consistency::{consistency_experiment, quantile, ConsistencyReport, DepthSchedule};
pub use likelihood::{
    log_likelihood, regularizer, score_and_slope, score_regularized, solve_kappa, EstimatorConfig,
    EstimatorMode, FillObservation, KappaEstimate,
};
pub use state::{write_trace, EstimatorState, TraceRow, TRACE_HEADER};
