//! Finite-horizon value `v₀(t, ·; T) = (1/κ) ln(e^{(T-t)A} z)`, `z_j = e^{-ακj²}`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::hjb::ergodic::build_matrix_a;
use crate::params::ModelParams;

/// Above this `max(d)/min(d)` the eigenbasis route is abandoned for
/// scaling-and-squaring on the dense matrix.
pub const SCALING_CONDITION_LIMIT: f64 = 1e12;

/// Evaluates `v₀(t, q; T)` for every grid state.
///
/// The exponential is applied in the eigenbasis of the symmetrised matrix and
/// assembled in log space with the dominant exponent factored out, so long
/// horizons do not overflow.
pub fn finite_horizon_value(t: f64, horizon: f64, params: &ModelParams) -> Result<Vec<f64>> {
    if !(t.is_finite() && horizon.is_finite()) || t < 0.0 || t > horizon {
        return Err(Error::Domain(format!(
            "need 0 <= t <= T, got t = {t}, T = {horizon}"
        )));
    }
    params.validate(true)?;
    let tau = horizon - t;
    let kappa = params.kappa;
    let z: Vec<f64> = params
        .grid()
        .states()
        .map(|q| {
            let q = q as f64;
            -params.alpha_terminal * kappa * q * q
        })
        .collect(); // ln z
    let a = build_matrix_a(params);
    if a.dim() == 1 {
        return Ok(vec![(tau * a.diag[0] + z[0]) / kappa]);
    }

    let sym = a.symmetrize()?;
    let log_values = if sym.scaling_condition() <= SCALING_CONDITION_LIMIT {
        eigenbasis_log_exp(&sym.matrix.to_dense(), &sym.scaling, &z, tau)
    } else {
        None
    };
    let log_values = match log_values {
        Some(v) => v,
        None => dense_log_exp(&a.to_dense(), &z, tau)?,
    };
    Ok(log_values.into_iter().map(|l| l / kappa).collect())
}

/// `ln(D U e^{τΛ} Uᵀ D⁻¹ z)`; `None` when a component loses positivity to
/// cancellation.
fn eigenbasis_log_exp(
    j: &DMatrix<f64>,
    scaling: &[f64],
    log_z: &[f64],
    tau: f64,
) -> Option<Vec<f64>> {
    let n = scaling.len();
    let eig = SymmetricEigen::new(j.clone());
    let lambda_max = eig.eigenvalues.iter().cloned().fold(f64::MIN, f64::max);
    // work with z scaled by its largest entry to stay in range
    let z_shift = log_z.iter().cloned().fold(f64::MIN, f64::max);
    let w = DVector::from_iterator(n, (0..n).map(|i| (log_z[i] - z_shift).exp() / scaling[i]));
    let coeffs = eig.eigenvectors.transpose() * w;
    let mut out = Vec::with_capacity(n);
    for (i, d) in scaling.iter().enumerate() {
        let mut s = 0.0;
        for k in 0..n {
            s += eig.eigenvectors[(i, k)]
                * (tau * (eig.eigenvalues[k] - lambda_max)).exp()
                * coeffs[k];
        }
        if !(s > 0.0) {
            return None;
        }
        out.push(tau * lambda_max + z_shift + d.ln() + s.ln());
    }
    Some(out)
}

/// Scaling-and-squaring on `A - λ_max I` (nalgebra's Padé `exp`).
fn dense_log_exp(a: &DMatrix<f64>, log_z: &[f64], tau: f64) -> Result<Vec<f64>> {
    let n = log_z.len();
    let bound = (0..n)
        .map(|i| {
            a[(i, i)]
                + (0..n)
                    .filter(|&j| j != i)
                    .map(|j| a[(i, j)].abs())
                    .sum::<f64>()
        })
        .fold(f64::MIN, f64::max);
    let shifted = (a - DMatrix::identity(n, n) * bound) * tau;
    let e = shifted.exp();
    let z_shift = log_z.iter().cloned().fold(f64::MIN, f64::max);
    let z = DVector::from_iterator(n, log_z.iter().map(|l| (l - z_shift).exp()));
    let y = e * z;
    y.iter()
        .map(|&v| {
            if v > 0.0 {
                Ok(tau * bound + z_shift + v.ln())
            } else {
                Err(Error::Eigen("matrix exponential lost positivity".into()))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hjb::ergodic::ergodic_constant;
    use approx::assert_relative_eq;

    #[test]
    fn terminal_condition() {
        let p = ModelParams {
            alpha_terminal: 0.01,
            ..ModelParams::reference()
        };
        let v = finite_horizon_value(5.0, 5.0, &p).unwrap();
        for (q, vq) in p.grid().states().zip(&v) {
            let q = q as f64;
            assert_relative_eq!(*vq, -0.01 * q * q, epsilon = 1e-12);
        }
    }

    #[test]
    fn rejects_t_after_horizon() {
        assert!(matches!(
            finite_horizon_value(2.0, 1.0, &ModelParams::reference()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn three_state_limit_is_closed_form_gamma() {
        let p = ModelParams {
            phi: 0.0,
            q_max: 1,
            q_min: -1,
            ..ModelParams::reference()
        };
        let gamma = 2f64.sqrt() / (10.0 * 1f64.exp());
        let v = finite_horizon_value(0.0, 1e4, &p).unwrap();
        for vq in v {
            assert!((vq / 1e4 - gamma).abs() < 1e-4);
        }
    }

    #[test]
    fn dense_fallback_agrees_with_eigenbasis() {
        let p = ModelParams {
            alpha_terminal: 1e-3,
            lambda_plus: 1.3,
            ..ModelParams::reference()
        };
        let a = build_matrix_a(&p);
        let sym = a.symmetrize().unwrap();
        let log_z: Vec<f64> = p
            .grid()
            .states()
            .map(|q| -1e-3 * 10.0 * (q * q) as f64)
            .collect();
        for tau in [0.5, 10.0, 200.0] {
            let fast =
                eigenbasis_log_exp(&sym.matrix.to_dense(), &sym.scaling, &log_z, tau).unwrap();
            let slow = dense_log_exp(&a.to_dense(), &log_z, tau).unwrap();
            for (f, s) in fast.iter().zip(&slow) {
                assert_relative_eq!(f, s, epsilon = 1e-8, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn long_horizon_does_not_overflow() {
        let p = ModelParams::reference();
        let gamma = ergodic_constant(&p).unwrap();
        let v = finite_horizon_value(0.0, 1e5, &p).unwrap();
        assert!(v.iter().all(|x| x.is_finite()));
        assert!((v[30] / 1e5 - gamma).abs() < 1e-4);
    }
}
