//! Model constants and the inventory grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Market and model constants. Every matrix in [`crate::hjb`] is labelled by
/// the inventory grid `q_max, q_max - 1, ..., q_min` (top row is `q_max`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Market buy-order arrival rate (hits the ask), 1/time.
    pub lambda_plus: f64,
    /// Market sell-order arrival rate (hits the bid), 1/time.
    pub lambda_minus: f64,
    /// Price sensitivity of liquidity takers, 1/price.
    pub kappa: f64,
    /// Running inventory penalty.
    pub phi: f64,
    /// Terminal inventory penalty of the finite-horizon problem.
    pub alpha_terminal: f64,
    pub q_max: i32,
    pub q_min: i32,
    /// Mid-price volatility; only used for optional mark-to-market output.
    pub sigma: f64,
    pub s0: f64,
}

impl ModelParams {
    /// Parameter set of the ergodic-control experiment: `λ± = 1`, `κ = 10`,
    /// `φ = 1e-5`, inventory in `[-30, 30]`.
    pub fn reference() -> Self {
        Self {
            lambda_plus: 1.0,
            lambda_minus: 1.0,
            kappa: 10.0,
            phi: 1e-5,
            alpha_terminal: 0.0,
            q_max: 30,
            q_min: -30,
            sigma: 1.0,
            s0: 10.0,
        }
    }

    /// Parameter set of the learning/regret experiments: `λ± = 0.4`,
    /// `κ* = 10`, `φ = 1e-6`, inventory in `[-30, 30]`.
    pub fn regret_reference() -> Self {
        Self {
            lambda_plus: 0.4,
            lambda_minus: 0.4,
            phi: 1e-6,
            sigma: 0.01,
            ..Self::reference()
        }
    }

    pub fn with_kappa(&self, kappa: f64) -> Self {
        Self { kappa, ..*self }
    }

    pub fn grid(&self) -> InventoryGrid {
        InventoryGrid {
            q_max: self.q_max,
            q_min: self.q_min,
        }
    }

    /// Checks every field. A single-state grid is rejected unless
    /// `allow_degenerate` is set.
    pub fn validate(&self, allow_degenerate: bool) -> Result<()> {
        positive("lambda_plus", self.lambda_plus)?;
        positive("lambda_minus", self.lambda_minus)?;
        positive("kappa", self.kappa)?;
        non_negative("phi", self.phi)?;
        non_negative("alpha_terminal", self.alpha_terminal)?;
        non_negative("sigma", self.sigma)?;
        if !self.s0.is_finite() {
            return Err(Error::param("s0", "must be finite"));
        }
        if self.q_max < 0 {
            return Err(Error::param("q_max", "must be >= 0"));
        }
        if self.q_min > 0 {
            return Err(Error::param("q_min", "must be <= 0"));
        }
        if self.q_max == self.q_min && !allow_degenerate {
            return Err(Error::DegenerateGrid);
        }
        Ok(())
    }
}

fn positive(field: &'static str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::param(
            field,
            format!("must be finite and > 0, got {x}"),
        ))
    }
}

fn non_negative(field: &'static str, x: f64) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(Error::param(
            field,
            format!("must be finite and >= 0, got {x}"),
        ))
    }
}

/// Inventory states `q_max, q_max - 1, ..., q_min`; index 0 is `q_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InventoryGrid {
    pub q_max: i32,
    pub q_min: i32,
}

impl InventoryGrid {
    pub fn len(&self) -> usize {
        (self.q_max - self.q_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn state(&self, index: usize) -> i32 {
        self.q_max - index as i32
    }

    pub fn index(&self, q: i32) -> Option<usize> {
        (self.q_min..=self.q_max)
            .contains(&q)
            .then(|| (self.q_max - q) as usize)
    }

    pub fn contains(&self, q: i32) -> bool {
        (self.q_min..=self.q_max).contains(&q)
    }

    /// States in row order, top to bottom.
    pub fn states(&self) -> impl DoubleEndedIterator<Item = i32> + ExactSizeIterator {
        let q_max = self.q_max;
        (0..self.len()).map(move |i| q_max - i as i32)
    }
}
