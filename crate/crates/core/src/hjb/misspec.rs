//! Long-run reward of the `κ`-optimal quotes in a market whose true
//! sensitivity is `κ*`.
//!
//! `γ(κ; κ*)·𝟙 = U W U⁻¹ b̃` where `U` holds the eigenvectors of the generator
//! `Ã₀` and `W` keeps only the eigenvalue-0 component. For a generator the
//! eigenvalue-0 spectral projector is `𝟙 π` with `π` the invariant law, so
//! every component equals `π · b̃`; that is what is evaluated here, with `π`
//! from the birth–death recursion.

use nalgebra::DMatrix;

use crate::depth::Depth;
use crate::error::{Error, Result};
use crate::hjb::chain::{
    equilibrium_distribution, transition_rate_matrix, EquilibriumDistribution, RateMatrix,
};
use crate::hjb::ergodic::{ergodic_constant, solve_ergodic};
use crate::params::ModelParams;

#[derive(Debug, Clone)]
pub struct MisspecifiedSolution {
    pub kappa: f64,
    pub kappa_star: f64,
    /// `γ(κ; κ*)`.
    pub gamma_cross: f64,
    /// Generator `Ã₀` of the inventory under `ψ^κ` and true `κ*`.
    pub rates: RateMatrix,
    /// `b̃_q = λ⁺ψ⁺e^{-κ*ψ⁺} 𝟙{q>q_min} + λ⁻ψ⁻e^{-κ*ψ⁻} 𝟙{q<q_max} - φq²`.
    pub b_tilde: Vec<f64>,
    pub equilibrium: EquilibriumDistribution,
}

impl MisspecifiedSolution {
    /// Dense `Ã₀`.
    pub fn a_tilde(&self) -> DMatrix<f64> {
        self.rates.to_dense()
    }
}

/// Reward vector `b̃` for quotes `ψ±` under sensitivity `κ*`.
pub fn reward_vector(
    psi_plus: &[Depth],
    psi_minus: &[Depth],
    kappa_star: f64,
    params: &ModelParams,
) -> Vec<f64> {
    params
        .grid()
        .states()
        .enumerate()
        .map(|(i, q)| {
            let qf = q as f64;
            let ask = if q > params.q_min {
                params.lambda_plus * psi_plus[i].expected_revenue(kappa_star)
            } else {
                0.0
            };
            let bid = if q < params.q_max {
                params.lambda_minus * psi_minus[i].expected_revenue(kappa_star)
            } else {
                0.0
            };
            ask + bid - params.phi * qf * qf
        })
        .collect()
}

/// `γ(κ; κ*)`: the ergodic reward of quoting optimally for `κ` while fills
/// happen with sensitivity `κ*`.
pub fn misspecified_gamma(
    kappa: f64,
    kappa_star: f64,
    params: &ModelParams,
) -> Result<MisspecifiedSolution> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::param(
            "kappa",
            format!("must be finite and > 0, got {kappa}"),
        ));
    }
    if !(kappa_star > 0.0 && kappa_star.is_finite()) {
        return Err(Error::param(
            "kappa_star",
            format!("must be finite and > 0, got {kappa_star}"),
        ));
    }
    let quoting = params.with_kappa(kappa);
    let sol = solve_ergodic(&quoting)?;
    let rates = transition_rate_matrix(&sol.psi_plus, &sol.psi_minus, kappa_star, params)?;
    let equilibrium = equilibrium_distribution(&rates)?;
    let b_tilde = reward_vector(&sol.psi_plus, &sol.psi_minus, kappa_star, params);
    let gamma_cross = equilibrium
        .probabilities
        .iter()
        .zip(&b_tilde)
        .map(|(p, b)| p * b)
        .sum();
    Ok(MisspecifiedSolution {
        kappa,
        kappa_star,
        gamma_cross,
        rates,
        b_tilde,
        equilibrium,
    })
}

/// `gap(κ) = γ(κ*; κ*) - γ(κ; κ*)` over a grid of quoting parameters.
pub fn performance_gap_curve(
    kappa_grid: &[f64],
    kappa_star: f64,
    params: &ModelParams,
) -> Result<Vec<(f64, f64)>> {
    let optimum = ergodic_constant(&params.with_kappa(kappa_star))?;
    kappa_grid
        .iter()
        .map(|&k| {
            Ok((
                k,
                optimum - misspecified_gamma(k, kappa_star, params)?.gamma_cross,
            ))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::{Complex, DVector};

    /// `U W U⁻¹ b̃` built from a general eigendecomposition of the dense
    /// generator: eigenvalues from the Schur form, eigenvectors from the SVD
    /// null space of `Ã₀ - μI`.
    fn projector_route(sol: &MisspecifiedSolution) -> Vec<f64> {
        let a = sol.a_tilde();
        let n = a.nrows();
        let eigenvalues: Vec<Complex<f64>> = a.complex_eigenvalues().iter().cloned().collect();
        let mut u = DMatrix::zeros(n, n);
        let zero_col = (0..n)
            .min_by(|&i, &j| {
                eigenvalues[i]
                    .re
                    .abs()
                    .partial_cmp(&eigenvalues[j].re.abs())
                    .unwrap()
            })
            .unwrap();
        for (k, mu) in eigenvalues.iter().enumerate() {
            assert!(mu.im.abs() < 1e-9, "generator spectrum is real");
            let shifted = &a - DMatrix::identity(n, n) * mu.re;
            let svd = shifted.svd(false, true);
            let v_t = svd.v_t.unwrap();
            let (idx, _) =
                svd.singular_values
                    .iter()
                    .enumerate()
                    .fold(
                        (0, f64::MAX),
                        |acc, (i, &s)| {
                            if s < acc.1 {
                                (i, s)
                            } else {
                                acc
                            }
                        },
                    );
            u.set_column(k, &v_t.row(idx).transpose());
        }
        let mut w = DMatrix::zeros(n, n);
        w[(zero_col, zero_col)] = 1.0;
        let b = DVector::from_column_slice(&sol.b_tilde);
        let out = &u * w * u.try_inverse().unwrap() * b;
        out.iter().cloned().collect()
    }

    fn small(q: i32) -> ModelParams {
        ModelParams {
            q_max: q,
            q_min: -q,
            phi: 1e-2,
            ..ModelParams::reference()
        }
    }

    #[test]
    fn matches_explicit_projector_for_small_grids() {
        for (q, kappa) in [(1, 12.0), (2, 8.0), (3, 10.0), (3, 15.0)] {
            let p = small(q);
            let sol = misspecified_gamma(kappa, 10.0, &p).unwrap();
            for component in projector_route(&sol) {
                assert_relative_eq!(component, sol.gamma_cross, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn equals_ergodic_constant_when_correctly_specified() {
        for p in [
            ModelParams::reference(),
            ModelParams::regret_reference(),
            small(2),
        ] {
            for k in [5.0, 10.0, 20.0] {
                let g = misspecified_gamma(k, k, &p).unwrap().gamma_cross;
                let direct = ergodic_constant(&p.with_kappa(k)).unwrap();
                assert_relative_eq!(g, direct, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn gap_is_nonnegative_and_zero_at_truth() {
        let p = ModelParams::reference();
        let grid = [8.0, 9.0, 10.0, 11.0, 12.0];
        let gaps = performance_gap_curve(&grid, 10.0, &p).unwrap();
        for (k, g) in &gaps {
            assert!(*g >= -1e-9, "gap({k}) = {g}");
        }
        assert!(gaps[2].1.abs() < 1e-12);
        let argmax = gaps
            .iter()
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap()
            .0;
        assert_eq!(argmax, 10.0);
    }

    #[test]
    fn gap_is_locally_quadratic() {
        let p = ModelParams::reference();
        let h = 0.1;
        let gaps = performance_gap_curve(
            &[10.0 - 2.0 * h, 10.0 - h, 10.0 + h, 10.0 + 2.0 * h],
            10.0,
            &p,
        )
        .unwrap();
        let lower = gaps[0].1 / gaps[1].1;
        let upper = gaps[3].1 / gaps[2].1;
        assert!((3.5..=4.5).contains(&lower), "{lower}");
        assert!((3.5..=4.5).contains(&upper), "{upper}");
    }

    #[test]
    fn rejects_non_positive_kappa() {
        assert!(misspecified_gamma(0.0, 10.0, &ModelParams::reference()).is_err());
        assert!(misspecified_gamma(10.0, -1.0, &ModelParams::reference()).is_err());
    }
}
