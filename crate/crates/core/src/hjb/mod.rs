//! Matrices of the ergodic market making model and their closed-form
//! solutions.

pub mod chain;
pub mod ergodic;
pub mod finite_horizon;
pub mod misspec;
pub mod tridiag;

pub use chain::{
    equilibrium_distribution, total_variation, transient_distribution, transition_rate_matrix,
    EquilibriumDistribution, RateMatrix,
};
pub use ergodic::{
    build_matrix_a, ergodic_constant, feedback_control, running_reward, solve_ergodic,
    solve_ergodic_with, ErgodicSolution,
};
pub use finite_horizon::finite_horizon_value;
pub use misspec::{misspecified_gamma, performance_gap_curve, MisspecifiedSolution};
pub use tridiag::{dominant_eigenpair, DominantEigenpair, SymTridiagonal, Tridiagonal};
