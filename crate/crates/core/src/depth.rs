//! Quote depths on the extended half line.

use std::fmt;
use std::str::FromStr;

/// Distance of a limit order from the mid-price. `Infinite` means the side is
/// not quoted; its fill probability is exactly zero and `0 · ∞ = 0` applies to
/// every revenue term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Depth {
    Finite(f64),
    Infinite,
}

impl Depth {
    pub fn is_infinite(self) -> bool {
        matches!(self, Depth::Infinite)
    }

    /// `f64` view, with `Infinite` mapped to `f64::INFINITY`.
    pub fn value(self) -> f64 {
        match self {
            Depth::Finite(d) => d,
            Depth::Infinite => f64::INFINITY,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Depth::Finite(d) => Some(d),
            Depth::Infinite => None,
        }
    }

    /// `e^{-κδ}`; exactly zero for an unquoted side.
    pub fn fill_probability(self, kappa: f64) -> f64 {
        match self {
            Depth::Finite(d) => (-kappa * d).exp(),
            Depth::Infinite => 0.0,
        }
    }

    /// `δ e^{-κδ}`, the expected spread captured per arriving order.
    pub fn expected_revenue(self, kappa: f64) -> f64 {
        match self {
            Depth::Finite(d) => d * (-kappa * d).exp(),
            Depth::Infinite => 0.0,
        }
    }
}

impl From<f64> for Depth {
    fn from(d: f64) -> Self {
        if d == f64::INFINITY {
            Depth::Infinite
        } else {
            Depth::Finite(d)
        }
    }
}

impl fmt::Display for Depth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Depth::Finite(d) => f.write_str(&crate::format::float(*d)),
            Depth::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Depth {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "inf" {
            return Ok(Depth::Infinite);
        }
        let d: f64 = s.parse().map_err(|_| format!("not a depth: `{s}`"))?;
        if d.is_nan() || d.is_infinite() {
            return Err(format!("not a depth: `{s}` (use `inf` for no quote)"));
        }
        Ok(Depth::Finite(d))
    }
}
