//! Reset-minimizing reinforcement learning at desk scale: unsupervised
//! detection of near-irreversible states from trajectory statistics, a
//! single-policy random-goal learner, reset strategies, and a small tabletop
//! environment to compare them in.

pub mod env;
pub mod error;
pub mod harness;
pub mod learner;
pub mod measures;
pub mod strategy;
pub mod trajectory;

pub use error::{Error, Result};
