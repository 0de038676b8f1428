use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::checkpoint::{shape_for, Checkpoint};
use super::config::ExperimentConfig;
use super::eval::evaluate_policy;
use super::{measured_state, policy_input};
use super::metrics::{MetricsRecord, MetricsWriter, Payload};
use crate::env::{ActionId, EnvState, GoalSpec, Tabletop, TaskMode, OBS_DIM};
use crate::error::{Error, Result};
use crate::learner::{act, compute_gae, ppo_update, Adam, PolicyNet, StepEnd, TrainBatch};
use crate::measures::NiDetector;
use crate::strategy::{next_goal, should_reset, Direction, PhaseManager, Strategy};
use crate::trajectory::{PhaseOutcome, ResetCause};

pub const CONFIG_FILE: &str = "config.toml";
pub const METRICS_FILE: &str = "metrics.jsonl";
pub const CHECKPOINT_DIR: &str = "checkpoints";
pub const FINAL_CHECKPOINT: &str = "final.ckpt";
pub const ABORT_CHECKPOINT: &str = "aborted.ckpt";

/// Evaluation during training always uses the same task set.
pub fn eval_seed(run_seed: u64) -> u64 {
    run_seed ^ 0x9e37_79b9_7f4a_7c15
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalPoint {
    pub step: u64,
    pub resets: u64,
    pub success_rate: f64,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub run_dir: PathBuf,
    pub global_steps: u64,
    pub total_resets: u64,
    pub evals: Vec<EvalPoint>,
    pub final_checkpoint: PathBuf,
}

struct Transition {
    obs: [f64; OBS_DIM],
    action: usize,
    log_prob: f64,
    value: f64,
    reward: f64,
    end: StepEnd,
}

struct Worker {
    id: usize,
    rng: ChaCha8Rng,
    state: EnvState,
    phases: PhaseManager,
    detector: Option<NiDetector>,
    local_step: u64,
    resets: u64,
    records: Vec<MetricsRecord>,
}

/// A goal for a fresh phase. Fixed goals can coincide with the object; fall
/// back to a random train-region goal then.
fn admissible_goal(
    env: &Tabletop,
    strategy: &Strategy,
    direction: Direction,
    state: &mut EnvState,
    rng: &mut ChaCha8Rng,
) -> GoalSpec {
    let goal = next_goal(strategy, direction, env, rng, state);
    if env.soft_goal_switch(state, goal.target()).is_ok() {
        return goal;
    }
    let fallback = env.sample_goal(TaskMode::Train, rng, state.object);
    env.soft_goal_switch(state, fallback)
        .expect("sampled goals exclude the object");
    GoalSpec::Point(fallback)
}

impl Worker {
    fn new(id: usize, cfg: &ExperimentConfig, env: &Tabletop, strategy: &Strategy) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.run.seed);
        rng.set_stream(1 + id as u64);
        let mut state = env.reset_full(&mut rng);
        let goal = admissible_goal(env, strategy, Direction::Forward, &mut state, &mut rng);
        let detector = match strategy {
            Strategy::MeasureLed { measure } => Some(NiDetector::new(measure.clone(), 2)?),
            _ => None,
        };
        Ok(Self {
            id,
            rng,
            state,
            phases: PhaseManager::new(strategy.clone(), cfg.strategy.phase_length, goal, 0),
            detector,
            local_step: 0,
            resets: 1,
            records: vec![MetricsRecord::new(
                0,
                id,
                Payload::Reset {
                    cause: ResetCause::Initial,
                },
            )],
        })
    }

    fn emit(&mut self, step: u64, payload: Payload) {
        self.records.push(MetricsRecord::new(step, self.id, payload));
    }

    /// Collects `n` transitions. Returns them with the bootstrap value of the
    /// state the segment stops in.
    fn rollout(
        &mut self,
        env: &Tabletop,
        net: &PolicyNet,
        params: &[f64],
        n: u64,
        workers: u64,
    ) -> Result<(Vec<Transition>, f64)> {
        let mut out = Vec::with_capacity(n as usize);
        let mut total_reward = 0.0;
        for _ in 0..n {
            let goal = self.phases.goal().target();
            let obs = policy_input(&env.observation(&self.state, goal));
            let (action, log_prob, value) = act(net, params, &obs, &mut self.rng)?;
            let result = env.step(
                &mut self.state,
                ActionId::from_index(action).expect("valid action"),
                goal,
                &mut self.rng,
            );
            total_reward += result.reward;
            self.local_step += 1;
            let step = self.local_step * workers;
            let outcome = self.phases.record_step(result.success);

            let verdict = match &mut self.detector {
                Some(det) => Some(det.observe(self.local_step, measured_state(&self.state))?),
                None => None,
            };
            if let Some(v) = &verdict {
                if let Some(value) = v.value {
                    self.emit(step, Payload::Measure { value, ni: v.ni });
                }
            }
            let cause = should_reset(
                self.phases.strategy(),
                &self.phases.counters(),
                verdict.as_ref(),
                result.gt_irreversible,
            );

            // Success and true resets end the trajectory; a timeout only
            // switches goals, so the persisting state is bootstrapped.
            let end = if result.success || cause.is_some() {
                StepEnd::Terminal
            } else if outcome.is_some() {
                let next = policy_input(&env.observation(&self.state, goal));
                StepEnd::Truncated {
                    bootstrap: net.value(params, &next)?,
                }
            } else {
                StepEnd::Continue
            };
            out.push(Transition {
                obs,
                action,
                log_prob,
                value,
                reward: result.reward,
                end,
            });

            let closed = outcome.or(cause.map(|_| PhaseOutcome::Interrupted));
            if let Some(outcome) = closed {
                let record = self.phases.on_phase_end(outcome, self.local_step);
                let object = self.state.object;
                self.emit(
                    step,
                    Payload::Success {
                        outcome,
                        length: record.len(),
                        object_x: object.x,
                        object_y: object.y,
                    },
                );
            }
            if let Some(cause) = cause {
                self.state = env.reset_full(&mut self.rng);
                self.phases.on_reset();
                if let Some(det) = &mut self.detector {
                    det.reset();
                }
                self.resets += 1;
                self.emit(step, Payload::Reset { cause });
            }
            if closed.is_some() {
                let goal = admissible_goal(
                    env,
                    self.phases.strategy(),
                    self.phases.direction(),
                    &mut self.state,
                    &mut self.rng,
                );
                self.phases.begin_phase(goal);
            }
        }
        let last_obs = policy_input(&env.observation(&self.state, self.phases.goal().target()));
        let last_value = net.value(params, &last_obs)?;
        self.emit(
            self.local_step * workers,
            Payload::Reward {
                total: total_reward,
                steps: n,
            },
        );
        Ok((out, last_value))
    }
}

/// Trains under `cfg`, writing the resolved config, metrics and checkpoints
/// into `out_dir`. The run is a pure function of the config.
pub fn train(cfg: &ExperimentConfig, out_dir: &Path) -> Result<TrainOutcome> {
    cfg.validate()?;
    let strategy = cfg.resolved_strategy()?;
    std::fs::create_dir_all(out_dir)?;
    let metrics_path = out_dir.join(METRICS_FILE);
    if metrics_path.exists() {
        return Err(Error::config(format!(
            "{} already holds a run; choose a fresh output directory",
            out_dir.display()
        )));
    }
    let config_text = cfg.emit();
    std::fs::write(out_dir.join(CONFIG_FILE), &config_text)?;
    let ckpt_dir = out_dir.join(CHECKPOINT_DIR);
    std::fs::create_dir_all(&ckpt_dir)?;

    let env = Tabletop::new(cfg.env.clone())?;
    let shape = shape_for(cfg);
    let net = PolicyNet::new(shape.clone())?;
    let mut learner_rng = ChaCha8Rng::seed_from_u64(cfg.run.seed);
    let mut params = net.init(&mut learner_rng);
    let mut adam = Adam::new(net.n_params(), cfg.learner.learning_rate);

    let n_workers = cfg.run.workers as u64;
    let mut workers = (0..cfg.run.workers)
        .map(|id| Worker::new(id, cfg, &env, &strategy))
        .collect::<Result<Vec<_>>>()?;
    let mut writer = MetricsWriter::create(&metrics_path, cfg.run.workers)?;

    let snapshot = |params: &[f64], adam: &Adam, step: u64| Checkpoint {
        global_step: step,
        config_text: config_text.clone(),
        shape: shape.clone(),
        params: params.to_vec(),
        adam: adam.clone(),
    };

    let steps_per_worker = cfg.steps_per_worker();
    let rollout = cfg.learner.rollout_length as u64;
    let mut local = 0u64;
    let mut evals = Vec::new();
    while local < steps_per_worker {
        let n = rollout.min(steps_per_worker - local);
        let results: Vec<Result<(Vec<Transition>, f64)>> = workers
            .par_iter_mut()
            .map(|w| w.rollout(&env, &net, &params, n, n_workers))
            .collect();
        let prev_global = local * n_workers;
        local += n;
        let global = local * n_workers;

        let mut batch = TrainBatch::new(OBS_DIM);
        for res in results {
            let (transitions, last_value) = res?;
            let rewards: Vec<f64> = transitions.iter().map(|t| t.reward).collect();
            let values: Vec<f64> = transitions.iter().map(|t| t.value).collect();
            let ends: Vec<StepEnd> = transitions.iter().map(|t| t.end).collect();
            let (adv, ret) = compute_gae(
                &rewards,
                &values,
                &ends,
                last_value,
                cfg.learner.gamma,
                cfg.learner.gae_tau,
            );
            for (i, t) in transitions.iter().enumerate() {
                batch.push(&t.obs, t.action, t.log_prob, adv[i], ret[i]);
            }
        }
        for w in &mut workers {
            for rec in w.records.drain(..) {
                writer.write(&rec)?;
            }
        }

        if let Err(e) = ppo_update(&net, &mut params, &mut adam, &batch, &cfg.learner, &mut learner_rng) {
            writer.flush()?;
            snapshot(&params, &adam, global).save(&out_dir.join(ABORT_CHECKPOINT))?;
            return Err(e);
        }

        let resets: u64 = workers.iter().map(|w| w.resets).sum();
        if crossed(prev_global, global, cfg.run.eval_every) {
            let report = evaluate_policy(
                &net,
                &params,
                &cfg.env,
                cfg.run.eval_mode,
                cfg.run.eval_tasks,
                eval_seed(cfg.run.seed),
                cfg.run.eval_policy,
            )?;
            writer.write(&MetricsRecord::new(
                global,
                0,
                Payload::Eval {
                    mode: report.mode,
                    success_rate: report.success_rate,
                    mean_steps: report.mean_steps,
                    tasks: report.tasks,
                    resets,
                },
            ))?;
            evals.push(EvalPoint {
                step: global,
                resets,
                success_rate: report.success_rate,
            });
        }
        if crossed(prev_global, global, cfg.run.checkpoint_every) {
            snapshot(&params, &adam, global).save(&ckpt_dir.join(format!("step_{global:010}.ckpt")))?;
        }
    }
    writer.flush()?;
    let global_steps = local * n_workers;
    let final_checkpoint = out_dir.join(FINAL_CHECKPOINT);
    snapshot(&params, &adam, global_steps).save(&final_checkpoint)?;
    Ok(TrainOutcome {
        run_dir: out_dir.to_path_buf(),
        global_steps,
        total_resets: workers.iter().map(|w| w.resets).sum(),
        evals,
        final_checkpoint,
    })
}

/// Whether a multiple of `every` lies in `(prev, now]`.
fn crossed(prev: u64, now: u64, every: u64) -> bool {
    every > 0 && now / every > prev / every
}
