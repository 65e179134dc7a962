use std::fmt;
use std::io::{self, Write};

use crate::depth::Depth;
use crate::error::{Error, Result};
use crate::estimator::TraceRow;
use crate::format::{float, opt_float};
use crate::params::InventoryGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Market buy order: lifts the agent's ask, inventory goes down.
    BuyMo,
    /// Market sell order: hits the agent's bid, inventory goes up.
    SellMo,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::BuyMo => "buy_mo",
            Side::SellMo => "sell_mo",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketEvent {
    pub time: f64,
    pub side: Side,
    pub posted_depth: Depth,
    pub filled: bool,
    pub inventory_after: i32,
    /// `∫₀^time f dt`.
    pub reward_integral: f64,
    /// Estimate after this event's update.
    pub kappa_hat: Option<f64>,
    pub mid_price: Option<f64>,
}

/// State of a path at a requested time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub time: f64,
    pub inventory: i32,
    pub reward_integral: f64,
    pub kappa_hat: Option<f64>,
    pub kappa_star: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub horizon: f64,
    pub initial_inventory: i32,
    /// Empty unless events were requested.
    pub events: Vec<MarketEvent>,
    /// Estimator trace; empty unless events were requested and the policy learns.
    pub trace: Vec<TraceRow>,
    pub samples: Vec<Sample>,
    pub event_count: usize,
    pub fill_count: usize,
    /// `∫₀ᵀ f dt`.
    pub reward_integral: f64,
    pub final_inventory: i32,
    pub final_kappa_hat: Option<f64>,
    /// Mark-to-market `cash + q·S_T` when the mid-price was simulated.
    pub pnl: Option<f64>,
}

impl TrajectoryRecord {
    /// Inventory at `t` (right-continuous), from samples or recorded events.
    pub fn inventory_at(&self, t: f64) -> Option<i32> {
        if !(0.0..=self.horizon).contains(&t) {
            return None;
        }
        if let Some(s) = self.samples.iter().find(|s| s.time == t) {
            return Some(s.inventory);
        }
        if self.events.len() != self.event_count {
            return None;
        }
        let i = self.events.partition_point(|e| e.time <= t);
        Some(if i == 0 {
            self.initial_inventory
        } else {
            self.events[i - 1].inventory_after
        })
    }
}

/// Cross-sectional inventory histogram at `t`.
pub fn empirical_distribution(
    trajectories: &[TrajectoryRecord],
    grid: InventoryGrid,
    t: f64,
) -> Result<Vec<f64>> {
    if trajectories.is_empty() {
        return Err(Error::EmptyInput("no trajectories"));
    }
    let mut counts = vec![0usize; grid.len()];
    for traj in trajectories {
        let q = traj
            .inventory_at(t)
            .ok_or_else(|| Error::Domain(format!("inventory at t = {t} was not recorded")))?;
        let i = grid
            .index(q)
            .ok_or_else(|| Error::Domain(format!("inventory {q} outside the grid")))?;
        counts[i] += 1;
    }
    let n = trajectories.len() as f64;
    Ok(counts.into_iter().map(|c| c as f64 / n).collect())
}

pub const TRAJECTORY_HEADER: &str = "time,side,depth,filled,inventory,reward_integral,kappa_hat";

pub fn write_trajectory<W: Write>(mut out: W, traj: &TrajectoryRecord) -> io::Result<()> {
    let with_mid = traj.events.first().is_some_and(|e| e.mid_price.is_some());
    write!(out, "{TRAJECTORY_HEADER}")?;
    if with_mid {
        write!(out, ",mid_price")?;
    }
    writeln!(out)?;
    for e in &traj.events {
        write!(
            out,
            "{},{},{},{},{},{},{}",
            float(e.time),
            e.side,
            e.posted_depth,
            u8::from(e.filled),
            e.inventory_after,
            float(e.reward_integral),
            opt_float(e.kappa_hat)
        )?;
        if with_mid {
            write!(out, ",{}", opt_float(e.mid_price))?;
        }
        writeln!(out)?;
    }
    Ok(())
}
