//! Closed-form solution of the ergodic HJB equation.

use crate::depth::Depth;
use crate::error::Result;
use crate::hjb::tridiag::{dominant_eigenpair, DominantEigenpair, Tridiagonal};
use crate::params::{InventoryGrid, ModelParams};

/// The `(q_max - q_min + 1)`-square matrix `A` of the linearised HJB system:
/// diagonal `-φκq²`, superdiagonal `λ⁺/e` (coupling `q` to `q - 1`),
/// subdiagonal `λ⁻/e` (coupling `q` to `q + 1`).
pub fn build_matrix_a(params: &ModelParams) -> Tridiagonal {
    let grid = params.grid();
    let inv_e = (-1.0f64).exp();
    let diag = grid
        .states()
        .map(|q| {
            let q = q as f64;
            -params.phi * params.kappa * q * q
        })
        .collect();
    let n = grid.len();
    Tridiagonal {
        diag,
        upper: vec![params.lambda_plus * inv_e; n - 1],
        lower: vec![params.lambda_minus * inv_e; n - 1],
    }
}

/// `γ(κ) = λ_max(A) / κ`. A single-state grid gives 0 (nothing can be quoted).
pub fn ergodic_constant(params: &ModelParams) -> Result<f64> {
    params.validate(true)?;
    let pair = dominant_eigenpair(&build_matrix_a(params))?;
    Ok(pair.value / params.kappa)
}

/// Solution of the ergodic problem for one value of `κ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicSolution {
    pub grid: InventoryGrid,
    pub kappa: f64,
    pub gamma: f64,
    pub lambda_max: f64,
    /// Perron vector of `A`, max entry 1.
    pub omega_hat: Vec<f64>,
    /// `v̂ = ln(ω̂) / κ`.
    pub v_hat: Vec<f64>,
    /// Optimal ask depths; `Infinite` at `q_min`.
    pub psi_plus: Vec<Depth>,
    /// Optimal bid depths; `Infinite` at `q_max`.
    pub psi_minus: Vec<Depth>,
}

impl ErgodicSolution {
    /// `(ask, bid)` depth pair at inventory `q`.
    pub fn quotes(&self, q: i32) -> Option<(Depth, Depth)> {
        self.grid
            .index(q)
            .map(|i| (self.psi_plus[i], self.psi_minus[i]))
    }
}

/// Solves the ergodic HJB equation: `ω̂` is the Perron vector of `A`
/// (equivalently the null vector of `C = A - λ_max I`), and the quotes follow
/// from [`feedback_control`].
pub fn solve_ergodic(params: &ModelParams) -> Result<ErgodicSolution> {
    solve_ergodic_with(params, false)
}

/// [`solve_ergodic`], optionally accepting the single-state grid.
pub fn solve_ergodic_with(params: &ModelParams, allow_degenerate: bool) -> Result<ErgodicSolution> {
    params.validate(allow_degenerate)?;
    let a = build_matrix_a(params);
    let DominantEigenpair { value, vector } = dominant_eigenpair(&a)?;
    Ok(assemble(params, value, vector))
}

pub(crate) fn assemble(
    params: &ModelParams,
    lambda_max: f64,
    omega_hat: Vec<f64>,
) -> ErgodicSolution {
    let grid = params.grid();
    let (psi_plus, psi_minus) = feedback_control(&omega_hat, params.kappa, grid);
    let v_hat = omega_hat.iter().map(|w| w.ln() / params.kappa).collect();
    ErgodicSolution {
        grid,
        kappa: params.kappa,
        gamma: lambda_max / params.kappa,
        lambda_max,
        omega_hat,
        v_hat,
        psi_plus,
        psi_minus,
    }
}

/// Optimal feedback quotes from any positive multiple of the Perron vector:
/// `ψ⁺(q) = 1/κ + v̂(q) - v̂(q-1)` for `q > q_min`, `ψ⁻(q) = 1/κ + v̂(q) - v̂(q+1)`
/// for `q < q_max`, `+∞` on the forbidden side at each bound.
///
/// Only ratios of neighbouring entries enter, so any positive rescaling of
/// `omega` leaves the tables unchanged (bit for bit for powers of two).
pub fn feedback_control(
    omega: &[f64],
    kappa: f64,
    grid: InventoryGrid,
) -> (Vec<Depth>, Vec<Depth>) {
    let n = grid.len();
    debug_assert_eq!(omega.len(), n);
    let inv_kappa = 1.0 / kappa;
    // index i is inventory q_max - i, so q - 1 sits at i + 1
    let psi_plus = (0..n)
        .map(|i| {
            if i + 1 < n {
                Depth::Finite(inv_kappa + (omega[i] / omega[i + 1]).ln() / kappa)
            } else {
                Depth::Infinite
            }
        })
        .collect();
    let psi_minus = (0..n)
        .map(|i| {
            if i > 0 {
                Depth::Finite(inv_kappa + (omega[i] / omega[i - 1]).ln() / kappa)
            } else {
                Depth::Infinite
            }
        })
        .collect();
    (psi_plus, psi_minus)
}

/// Max-norm of `C ω̂` with `C = A - λ_max I`; zero up to round-off for a valid
/// solution.
pub fn homogeneous_residual(params: &ModelParams, solution: &ErgodicSolution) -> f64 {
    let a = build_matrix_a(params);
    a.mul_vec(&solution.omega_hat)
        .iter()
        .zip(&solution.omega_hat)
        .map(|(aw, w)| (aw - solution.lambda_max * w).abs())
        .fold(0.0, f64::max)
}

/// Running reward `f(q, δ±; κ*) = λ⁺δ⁺e^{-κ*δ⁺} + λ⁻δ⁻e^{-κ*δ⁻} - φq²`.
pub fn running_reward(
    params: &ModelParams,
    q: i32,
    ask: Depth,
    bid: Depth,
    kappa_star: f64,
) -> f64 {
    let q = q as f64;
    params.lambda_plus * ask.expected_revenue(kappa_star)
        + params.lambda_minus * bid.expected_revenue(kappa_star)
        - params.phi * q * q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use approx::assert_relative_eq;

    fn three_state() -> ModelParams {
        ModelParams {
            phi: 0.0,
            q_max: 1,
            q_min: -1,
            ..ModelParams::reference()
        }
    }

    #[test]
    fn matrix_a_matches_reference_entries() {
        let a = build_matrix_a(&ModelParams::reference());
        assert_eq!(a.dim(), 61);
        assert_relative_eq!(a.upper[0], 0.36787944117144233, epsilon = 1e-15);
        assert_relative_eq!(a.lower[59], 0.36787944117144233, epsilon = 1e-15);
        assert_relative_eq!(a.diag[0], -0.09, epsilon = 1e-15);
        assert_relative_eq!(a.diag[60], -0.09, epsilon = 1e-15);
        assert_eq!(a.diag[30], 0.0);

        let single = build_matrix_a(&ModelParams {
            q_max: 0,
            q_min: 0,
            ..ModelParams::reference()
        });
        assert_eq!(single.to_dense().as_slice(), &[0.0]);

        let a3 = build_matrix_a(&three_state());
        assert!(a3.diag.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn reference_ergodic_constant() {
        let gamma = ergodic_constant(&ModelParams::reference()).unwrap();
        assert!((gamma - 0.07297).abs() < 1e-4, "gamma = {gamma}");
    }

    #[test]
    fn three_state_closed_form() {
        let sol = solve_ergodic(&three_state()).unwrap();
        let e = 1f64.exp();
        assert_relative_eq!(sol.lambda_max, 2f64.sqrt() / e, epsilon = 1e-14);
        assert_relative_eq!(sol.gamma, 2f64.sqrt() / (10.0 * e), epsilon = 1e-14);
        let ln_sqrt2 = 0.5 * 2f64.ln();
        assert_relative_eq!(
            sol.psi_plus[0].value(),
            (1.0 - ln_sqrt2) / 10.0,
            epsilon = 1e-13
        );
        assert_relative_eq!(
            sol.psi_plus[1].value(),
            (1.0 + ln_sqrt2) / 10.0,
            epsilon = 1e-13
        );
        assert_eq!(sol.psi_plus[2], Depth::Infinite);
        assert_eq!(sol.psi_minus[0], Depth::Infinite);
    }

    #[test]
    fn degenerate_grid() {
        let p = ModelParams {
            q_max: 0,
            q_min: 0,
            ..ModelParams::reference()
        };
        assert_eq!(ergodic_constant(&p).unwrap(), 0.0);
        assert_eq!(solve_ergodic(&p), Err(Error::DegenerateGrid));
    }

    #[test]
    fn boundary_quotes_are_infinite() {
        for p in [
            ModelParams::reference(),
            ModelParams::regret_reference(),
            three_state(),
        ] {
            let sol = solve_ergodic(&p).unwrap();
            assert_eq!(sol.quotes(p.q_max).unwrap().1, Depth::Infinite);
            assert_eq!(sol.quotes(p.q_min).unwrap().0, Depth::Infinite);
            assert!(homogeneous_residual(&p, &sol) <= 1e-8);
        }
    }

    #[test]
    fn feedback_matches_value_differences() {
        let p = ModelParams::reference();
        let sol = solve_ergodic(&p).unwrap();
        for i in 0..sol.grid.len() - 1 {
            let direct = 1.0 / p.kappa + sol.v_hat[i] - sol.v_hat[i + 1];
            assert_relative_eq!(sol.psi_plus[i].value(), direct, epsilon = 1e-12);
        }
    }

    #[test]
    fn running_reward_at_bounds() {
        let p = three_state();
        assert_eq!(
            running_reward(&p, 0, Depth::Infinite, Depth::Infinite, 10.0),
            0.0
        );
        let r = running_reward(&p, 0, Depth::Finite(0.1), Depth::Infinite, 10.0);
        assert_relative_eq!(r, 0.1 * (-1.0f64).exp(), epsilon = 1e-15);
    }
}
