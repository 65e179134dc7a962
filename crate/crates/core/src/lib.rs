//! Ergodic Avellaneda–Stoikov market making.
//!
//! The crate is split along the life cycle of an experiment:
//!
//! * [`hjb`] builds the model matrices, solves the ergodic HJB equation in
//!   closed form and evaluates long-run rewards of (possibly misspecified)
//!   quoting policies through the invariant law of the inventory chain.
//! * [`sim`] runs the controlled Poisson/Bernoulli market exactly, event by
//!   event.
//! * [`estimator`] learns the liquidity-taker price sensitivity from fill
//!   signals with a regularised maximum-likelihood estimator.
//! * [`regret`] orchestrates Monte Carlo experiments, regret curves, fits and
//!   parameter sweeps.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod depth;
pub mod error;
pub mod estimator;
pub mod format;
pub mod hjb;
pub mod params;
pub mod regret;
pub mod rng;
pub mod sim;

pub use depth::Depth;
pub use error::{Error, Result};
pub use params::{InventoryGrid, ModelParams};
