//! Reset regimes: episodic, periodic, measure-led and forward-backward with
//! ground-truth irreversibility resets; plus the per-worker phase bookkeeping
//! that decides goals and records phase outcomes.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{EnvState, GoalSpec, Tabletop, TaskMode, TRAIN_REGION};
use crate::error::{Error, Result};
use crate::measures::{MeasureConfig, MeasureVerdict};
use crate::trajectory::{PhaseOutcome, PhaseRecord, ResetCause};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyName {
    Episodic,
    Periodic,
    MeasureLed,
    ForwardBackwardGt,
}

impl StrategyName {
    pub fn as_str(self) -> &'static str {
        match self {
            StrategyName::Episodic => "episodic",
            StrategyName::Periodic => "periodic",
            StrategyName::MeasureLed => "measure_led",
            StrategyName::ForwardBackwardGt => "forward_backward_gt",
        }
    }
}

/// The `strategy` section of an experiment config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyConfig {
    pub kind: StrategyName,
    /// Steps between forced resets; periodic and forward-backward only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<u64>,
    #[serde(default = "default_phase_length")]
    pub phase_length: usize,
}

fn default_phase_length() -> usize {
    300
}

impl StrategyConfig {
    pub fn periodic(period: u64) -> Self {
        Self {
            kind: StrategyName::Periodic,
            period: Some(period),
            phase_length: 300,
        }
    }

    pub fn measure_led() -> Self {
        Self {
            kind: StrategyName::MeasureLed,
            period: None,
            phase_length: 300,
        }
    }

    pub fn forward_backward_gt(period: u64) -> Self {
        Self {
            kind: StrategyName::ForwardBackwardGt,
            period: Some(period),
            phase_length: 300,
        }
    }

    pub fn episodic() -> Self {
        Self {
            kind: StrategyName::Episodic,
            period: None,
            phase_length: 300,
        }
    }

    /// Combines this section with the experiment's measure section.
    pub fn resolve(&self, measure: Option<&MeasureConfig>) -> Result<Strategy> {
        if self.phase_length == 0 {
            return Err(Error::config("strategy.phase_length must be at least 1"));
        }
        let needs_period = matches!(self.kind, StrategyName::Periodic | StrategyName::ForwardBackwardGt);
        let period = match (needs_period, self.period) {
            (true, Some(p)) if p >= self.phase_length as u64 => Some(p),
            (true, Some(p)) => {
                return Err(Error::config(format!(
                    "strategy.period {p} must be at least phase_length {}",
                    self.phase_length
                )))
            }
            (true, None) => return Err(Error::config("strategy.period is required for this kind")),
            (false, Some(_)) => return Err(Error::config("strategy.period only applies to periodic kinds")),
            (false, None) => None,
        };
        let kind = match self.kind {
            StrategyName::Episodic => Strategy::Episodic,
            StrategyName::Periodic => Strategy::Periodic {
                period: period.expect("checked"),
            },
            StrategyName::ForwardBackwardGt => Strategy::ForwardBackwardGt {
                period: period.expect("checked"),
            },
            StrategyName::MeasureLed => {
                let measure = measure
                    .ok_or_else(|| Error::config("measure_led strategy needs a [measure] section"))?
                    .clone();
                measure.validate()?;
                Strategy::MeasureLed { measure }
            }
        };
        Ok(kind)
    }
}

/// A resolved reset regime.
#[derive(Clone, Debug, PartialEq)]
pub enum Strategy {
    Episodic,
    Periodic { period: u64 },
    MeasureLed { measure: MeasureConfig },
    ForwardBackwardGt { period: u64 },
}

/// Worker-local step counters consulted by [`should_reset`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counters {
    pub steps_since_reset: u64,
    pub steps_in_phase: u64,
    /// The current step closed the phase (success or timeout).
    pub phase_ended: bool,
}

/// Decides whether the step just taken triggers a reset. Resets are
/// immediate, not deferred to the next phase boundary.
pub fn should_reset(
    strategy: &Strategy,
    counters: &Counters,
    verdict: Option<&MeasureVerdict>,
    gt_irreversible: bool,
) -> Option<ResetCause> {
    match strategy {
        Strategy::Episodic => counters.phase_ended.then_some(ResetCause::EpisodicBoundary),
        Strategy::Periodic { period } => (counters.steps_since_reset >= *period).then_some(ResetCause::Periodic),
        Strategy::MeasureLed { .. } => verdict.is_some_and(|v| v.ni).then_some(ResetCause::MeasureNi),
        Strategy::ForwardBackwardGt { period } => {
            if counters.steps_since_reset >= *period {
                Some(ResetCause::Periodic)
            } else if gt_irreversible {
                Some(ResetCause::GroundTruthIrreversible)
            } else {
                None
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Backward,
}

/// Tracks the current phase, reset counters and the forward-backward
/// direction of one worker.
#[derive(Clone, Debug)]
pub struct PhaseManager {
    strategy: Strategy,
    phase_length: u64,
    phase_index: u64,
    phase_start: u64,
    goal: GoalSpec,
    counters: Counters,
    direction: Direction,
}

impl PhaseManager {
    pub fn new(strategy: Strategy, phase_length: usize, first_goal: GoalSpec, start_step: u64) -> Self {
        Self {
            strategy,
            phase_length: phase_length as u64,
            phase_index: 0,
            phase_start: start_step,
            goal: first_goal,
            counters: Counters::default(),
            direction: Direction::Forward,
        }
    }

    pub fn strategy(&self) -> &Strategy {
        &self.strategy
    }

    pub fn goal(&self) -> GoalSpec {
        self.goal
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn phase_index(&self) -> u64 {
        self.phase_index
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    pub fn phase_length(&self) -> u64 {
        self.phase_length
    }

    /// Advances the counters by one environment step. `success` closes the
    /// phase, as does reaching the phase length.
    pub fn record_step(&mut self, success: bool) -> Option<PhaseOutcome> {
        self.counters.steps_since_reset += 1;
        self.counters.steps_in_phase += 1;
        let outcome = if success {
            Some(PhaseOutcome::Success)
        } else if self.counters.steps_in_phase >= self.phase_length {
            Some(PhaseOutcome::Timeout)
        } else {
            None
        };
        self.counters.phase_ended = outcome.is_some();
        outcome
    }

    pub fn on_reset(&mut self) {
        self.counters.steps_since_reset = 0;
    }

    /// Closes the current phase at `end_step`. The forward-backward direction
    /// flips after every phase that was not interrupted by a reset, so
    /// uninterrupted phases strictly alternate.
    pub fn on_phase_end(&mut self, outcome: PhaseOutcome, end_step: u64) -> PhaseRecord {
        let record = PhaseRecord {
            phase_index: self.phase_index,
            goal: self.goal,
            start_step: self.phase_start,
            end_step,
            outcome,
        };
        if matches!(self.strategy, Strategy::ForwardBackwardGt { .. }) && outcome != PhaseOutcome::Interrupted {
            self.direction = match self.direction {
                Direction::Forward => Direction::Backward,
                Direction::Backward => Direction::Forward,
            };
        }
        self.phase_index += 1;
        self.phase_start = end_step;
        self.counters.steps_in_phase = 0;
        self.counters.phase_ended = false;
        record
    }

    /// Chooses the next goal under this worker's strategy.
    pub fn next_goal<R: Rng + ?Sized>(&self, env: &Tabletop, rng: &mut R, state: &EnvState) -> GoalSpec {
        next_goal(&self.strategy, self.direction, env, rng, state)
    }

    pub fn begin_phase(&mut self, goal: GoalSpec) {
        self.goal = goal;
    }
}

/// Goal schedule: the fixed task goal for episodic training and forward
/// phases, a reset-distribution goal for backward phases, and a uniform
/// train-region goal (never already satisfied) otherwise.
pub fn next_goal<R: Rng + ?Sized>(
    strategy: &Strategy,
    direction: Direction,
    env: &Tabletop,
    rng: &mut R,
    state: &EnvState,
) -> GoalSpec {
    let target = env.config().target_goal;
    match strategy {
        Strategy::Episodic => GoalSpec::Point(target),
        Strategy::Periodic { .. } | Strategy::MeasureLed { .. } => {
            GoalSpec::Point(env.sample_goal(TaskMode::Train, rng, state.object))
        }
        Strategy::ForwardBackwardGt { .. } => match direction {
            Direction::Forward => GoalSpec::Point(target),
            Direction::Backward => {
                debug_assert_eq!(TaskMode::Train.region(), TRAIN_REGION);
                GoalSpec::InitialState(env.sample_goal(TaskMode::Train, rng, state.object))
            }
        },
    }
}
