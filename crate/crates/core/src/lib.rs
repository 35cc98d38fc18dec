//! Foresighted navigation on synthetic graphs.
//!
//! The crate computes decay-weighted future-feature targets ("Q-features")
//! under shortest-path rollout policies, trains a small regressor to predict
//! them, and runs an A*-style frontier agent that scores candidates by
//! traversed cost plus a Q-feature-derived distance-to-go estimate.

pub mod agent;
pub mod error;
pub mod eval;
pub mod navgraph;
pub mod par;
pub mod pipeline;
pub mod qmodel;
pub mod qoracle;
pub mod rng;
pub mod rollout;
pub mod verify;
pub mod worldgen;

pub use error::{Error, Result};
pub use navgraph::{NavGraph, NodeId, NodeRecord, PartialTrajectory};
