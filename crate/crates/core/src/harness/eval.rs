use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::checkpoint::Checkpoint;
use super::config::EvalPolicy;
use super::policy_input;
use crate::env::{ActionId, EnvConfig, Tabletop, TaskMode};
use crate::error::{Error, Result};
use crate::learner::{act, act_greedy, PolicyNet};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mode: TaskMode,
    pub tasks: usize,
    pub successes: usize,
    pub success_rate: f64,
    /// Mean steps-to-success over the successful tasks.
    pub mean_steps: Option<f64>,
    /// Per-task episode length; the step limit for failures.
    pub lengths: Vec<usize>,
}

/// Runs `n_tasks` independent episodes, each from a hard reset with a goal
/// drawn for `mode`, for at most `max_phase_steps` steps. Parameters are only
/// read.
pub fn evaluate_policy(
    net: &PolicyNet,
    params: &[f64],
    env_cfg: &EnvConfig,
    mode: TaskMode,
    n_tasks: usize,
    seed: u64,
    policy: EvalPolicy,
) -> Result<EvalReport> {
    if n_tasks == 0 {
        return Err(Error::Evaluation("n_tasks must be at least 1".into()));
    }
    let env = Tabletop::new(env_cfg.clone())?;
    let horizon = env_cfg.max_phase_steps;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lengths = Vec::with_capacity(n_tasks);
    let mut success_steps = Vec::new();
    for _ in 0..n_tasks {
        let mut state = env.reset_full(&mut rng);
        let goal = env.sample_goal(mode, &mut rng, state.object);
        let mut len = horizon;
        for t in 1..=horizon {
            let obs = policy_input(&env.observation(&state, goal));
            let a = match policy {
                EvalPolicy::Greedy => act_greedy(net, params, &obs)?,
                EvalPolicy::Sample => act(net, params, &obs, &mut rng)?.0,
            };
            let action = ActionId::from_index(a).expect("policy emits valid actions");
            if env.step(&mut state, action, goal, &mut rng).success {
                len = t;
                success_steps.push(t);
                break;
            }
        }
        lengths.push(len);
    }
    let successes = success_steps.len();
    let mean_steps =
        (successes > 0).then(|| success_steps.iter().sum::<usize>() as f64 / successes as f64);
    Ok(EvalReport {
        mode,
        tasks: n_tasks,
        successes,
        success_rate: successes as f64 / n_tasks as f64,
        mean_steps,
        lengths,
    })
}

/// Evaluates a saved checkpoint under its own embedded configuration.
pub fn evaluate(checkpoint: &Checkpoint, mode: TaskMode, n_tasks: usize, seed: u64) -> Result<EvalReport> {
    let cfg = checkpoint.config()?;
    let net = checkpoint.network()?;
    evaluate_policy(
        &net,
        &checkpoint.params,
        &cfg.env,
        mode,
        n_tasks,
        seed,
        cfg.run.eval_policy,
    )
}
