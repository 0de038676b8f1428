use serde::{Deserialize, Serialize};

use crate::env::{EnvConfig, TaskMode};
use crate::error::{Error, Result};
use crate::learner::OptimConfig;
use crate::measures::MeasureConfig;
use crate::strategy::{Strategy, StrategyConfig};

/// How evaluation picks actions from the policy distribution.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalPolicy {
    /// Mode of the categorical distribution.
    #[default]
    Greedy,
    Sample,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub workers: usize,
    /// Environment steps summed over all workers.
    pub total_steps: u64,
    pub seed: u64,
    /// Checkpoint cadence in total environment steps; 0 disables periodic
    /// checkpoints (the final one is always written).
    pub checkpoint_every: u64,
    /// Evaluation cadence in total environment steps; 0 disables.
    pub eval_every: u64,
    pub eval_tasks: usize,
    pub eval_mode: TaskMode,
    pub eval_policy: EvalPolicy,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            workers: 8,
            total_steps: 2_400_000,
            seed: 0,
            checkpoint_every: 25_000,
            eval_every: 25_000,
            eval_tasks: 200,
            eval_mode: TaskMode::Train,
            eval_policy: EvalPolicy::Greedy,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub env: EnvConfig,
    #[serde(default)]
    pub learner: OptimConfig,
    pub strategy: StrategyConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureConfig>,
    #[serde(default)]
    pub run: RunConfig,
}

impl ExperimentConfig {
    pub fn new(strategy: StrategyConfig) -> Self {
        Self {
            env: EnvConfig::default(),
            learner: OptimConfig::default(),
            strategy,
            measure: None,
            run: RunConfig::default(),
        }
    }

    /// Parses and validates a config file's text.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Canonical text form with every default spelled out.
    pub fn emit(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        self.learner.validate()?;
        if let Some(m) = &self.measure {
            m.validate()?;
        }
        self.resolved_strategy()?;
        let run = &self.run;
        if run.workers == 0 {
            return Err(Error::config("run.workers must be at least 1"));
        }
        if run.total_steps < run.workers as u64 {
            return Err(Error::config("run.total_steps must cover at least one step per worker"));
        }
        if run.eval_tasks == 0 {
            return Err(Error::config("run.eval_tasks must be at least 1"));
        }
        if self.strategy.phase_length != self.env.max_phase_steps {
            return Err(Error::config(format!(
                "strategy.phase_length ({}) must equal env.max_phase_steps ({})",
                self.strategy.phase_length, self.env.max_phase_steps
            )));
        }
        Ok(())
    }

    pub fn resolved_strategy(&self) -> Result<Strategy> {
        self.strategy.resolve(self.measure.as_ref())
    }

    pub fn steps_per_worker(&self) -> u64 {
        self.run.total_steps.div_ceil(self.run.workers as u64)
    }
}
