//! The controlled inventory as a finite birth–death chain.

use nalgebra::{DMatrix, DVector};

use crate::depth::Depth;
use crate::error::{Error, Result};
use crate::params::{InventoryGrid, ModelParams};

/// Generator of the inventory chain under fixed quotes, in band form.
/// Index `i` is inventory `q_max - i`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateMatrix {
    pub grid: InventoryGrid,
    /// Rate `q -> q - 1` (agent's ask filled): `λ⁺ e^{-κ*ψ⁺(q)}`.
    pub down: Vec<f64>,
    /// Rate `q -> q + 1` (agent's bid filled): `λ⁻ e^{-κ*ψ⁻(q)}`.
    pub up: Vec<f64>,
}

impl RateMatrix {
    pub fn dim(&self) -> usize {
        self.grid.len()
    }

    /// Diagonal entry: the negated total exit rate.
    pub fn diagonal(&self, i: usize) -> f64 {
        -(self.up[i] + self.down[i])
    }

    /// Row sum as stored: `(up + down) + diag`, which is exactly zero.
    pub fn row_sum(&self, i: usize) -> f64 {
        (self.up[i] + self.down[i]) + self.diagonal(i)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diagonal(i);
            if i > 0 {
                m[(i, i - 1)] = self.up[i];
            }
            if i + 1 < n {
                m[(i, i + 1)] = self.down[i];
            }
        }
        m
    }

    /// `π Q` for a row vector `π`.
    pub fn left_mul(&self, pi: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|j| {
                let mut s = pi[j] * self.diagonal(j);
                if j > 0 {
                    // from row j - 1 (inventory q + 1) down to j
                    s += pi[j - 1] * self.down[j - 1];
                }
                if j + 1 < n {
                    s += pi[j + 1] * self.up[j + 1];
                }
                s
            })
            .collect()
    }
}

/// Builds the generator of the inventory under quotes `ψ±` when the market's
/// true sensitivity is `κ*`. Unquoted sides contribute a zero rate.
pub fn transition_rate_matrix(
    psi_plus: &[Depth],
    psi_minus: &[Depth],
    kappa_star: f64,
    params: &ModelParams,
) -> Result<RateMatrix> {
    let grid = params.grid();
    let n = grid.len();
    if psi_plus.len() != n || psi_minus.len() != n {
        return Err(Error::Structural(format!(
            "depth tables have lengths {}/{}, grid has {n} states",
            psi_plus.len(),
            psi_minus.len()
        )));
    }
    let down = (0..n)
        .map(|i| {
            if i + 1 < n {
                params.lambda_plus * psi_plus[i].fill_probability(kappa_star)
            } else {
                0.0
            }
        })
        .collect();
    let up = (0..n)
        .map(|i| {
            if i > 0 {
                params.lambda_minus * psi_minus[i].fill_probability(kappa_star)
            } else {
                0.0
            }
        })
        .collect();
    Ok(RateMatrix { grid, down, up })
}

/// Invariant law of the inventory chain.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumDistribution {
    pub grid: InventoryGrid,
    pub probabilities: Vec<f64>,
}

impl EquilibriumDistribution {
    pub fn probability(&self, q: i32) -> f64 {
        self.grid.index(q).map_or(0.0, |i| self.probabilities[i])
    }
}

/// Stationary distribution by the birth–death product formula
/// `π(q+1) / π(q) = rate(q → q+1) / rate(q+1 → q)`, accumulated in log space.
pub fn equilibrium_distribution(rates: &RateMatrix) -> Result<EquilibriumDistribution> {
    let n = rates.dim();
    let grid = rates.grid;
    // walk from the bottom (index n-1, q_min) upwards
    let mut log_pi = vec![0.0; n];
    for i in (0..n - 1).rev() {
        let birth = rates.up[i + 1];
        let death = rates.down[i];
        if !(birth > 0.0) {
            return Err(Error::Reducible {
                inventory: grid.state(i + 1),
                direction: "up",
            });
        }
        if !(death > 0.0) {
            return Err(Error::Reducible {
                inventory: grid.state(i),
                direction: "down",
            });
        }
        log_pi[i] = log_pi[i + 1] + birth.ln() - death.ln();
    }
    let max = log_pi.iter().cloned().fold(f64::MIN, f64::max);
    let mut probabilities: Vec<f64> = log_pi.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = probabilities.iter().sum();
    probabilities.iter_mut().for_each(|p| *p /= total);
    Ok(EquilibriumDistribution {
        grid,
        probabilities,
    })
}

/// Half the L1 distance.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Exact law at time `t` from an initial law: `p₀ e^{tQ}`.
pub fn transient_distribution(rates: &RateMatrix, initial: &[f64], t: f64) -> Vec<f64> {
    let e = (rates.to_dense() * t).exp();
    let p = DVector::from_column_slice(initial).transpose() * e;
    p.iter().cloned().collect()
}
