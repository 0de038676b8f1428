//! Clipped-surrogate policy optimization with generalized advantage
//! estimation, written against a small dense actor-critic.

mod gae;
mod network;
mod ppo;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use gae::{compute_gae, normalize, StepEnd};
pub use network::{log_softmax, NetworkShape, PolicyNet};
pub use ppo::{
    act, act_greedy, argmax, clip_grad_norm, ppo_loss, ppo_update, sample_categorical, Adam, LossCoefficients,
    LossTerms, TrainBatch, UpdateStats,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimConfig {
    pub gamma: f64,
    pub gae_tau: f64,
    pub clip: f64,
    pub epochs: usize,
    pub minibatches: usize,
    pub learning_rate: f64,
    pub value_coef: f64,
    pub entropy_coef: f64,
    pub grad_norm_clip: f64,
    /// Steps collected per worker between updates.
    pub rollout_length: usize,
    pub hidden: Vec<usize>,
}

impl Default for OptimConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            gae_tau: 0.95,
            clip: 0.1,
            epochs: 10,
            minibatches: 4,
            learning_rate: 3e-4,
            value_coef: 0.5,
            entropy_coef: 0.01,
            grad_norm_clip: 0.5,
            rollout_length: 200,
            hidden: vec![64, 64],
        }
    }
}

impl OptimConfig {
    pub fn validate(&self) -> Result<()> {
        let in_unit = |name: &str, v: f64| {
            if v > 0.0 && v <= 1.0 {
                Ok(())
            } else {
                Err(Error::config(format!("learner.{name} must lie in (0, 1], got {v}")))
            }
        };
        in_unit("gamma", self.gamma)?;
        in_unit("gae_tau", self.gae_tau)?;
        in_unit("learning_rate", self.learning_rate)?;
        if !(0.0..1.0).contains(&self.clip) {
            return Err(Error::config("learner.clip must lie in [0, 1)"));
        }
        for (name, v) in [
            ("value_coef", self.value_coef),
            ("entropy_coef", self.entropy_coef),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config(format!("learner.{name} must be non-negative")));
            }
        }
        if !(self.grad_norm_clip.is_finite() && self.grad_norm_clip > 0.0) {
            return Err(Error::config("learner.grad_norm_clip must be positive"));
        }
        if self.epochs == 0 || self.minibatches == 0 || self.rollout_length == 0 {
            return Err(Error::config(
                "learner.epochs, minibatches and rollout_length must be positive",
            ));
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return Err(Error::config("learner.hidden needs at least one non-empty layer"));
        }
        Ok(())
    }
}
