//! Adaptive probabilistic planning for the uncertain and dynamic orienteering
//! problem, instantiated as UAV charging scheduling over a wireless
//! rechargeable sensor network.
//!
//! The crate is organised bottom-up:
//!
//! * [`instance`] holds the problem data and the prize/cost functions.
//! * [`energy`] models per-regime flight power: regression priors, the
//!   Normal-Gamma posterior, its Student-t predictive and the sliding
//!   observation window.
//! * [`solver`] is the budget-constrained orienteering solver (inherited ant
//!   colony system with drop/add repair, 2-opt, nearest-neighbour seeding and
//!   an exact oracle for small graphs).
//! * [`planners`] turns mission state into plans: the adaptive safety-belief
//!   planner and the Offline, ROMP, WeightedErr and MCGreedy baselines.
//! * [`sim`] executes missions against a hidden ground-truth power model.
//! * [`harness`] runs experiment grids and aggregates metrics.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod energy;
pub mod error;
pub mod harness;
pub mod instance;
pub mod planners;
pub mod seed;
pub mod sim;
pub mod solver;

pub use error::{Error, Result};
