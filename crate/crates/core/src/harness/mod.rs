//! Experiment orchestration: config files, seeded multi-worker training,
//! threshold calibration, evaluation, metrics and analysis tables.

mod analyze;
mod calibrate;
mod checkpoint;
mod config;
mod eval;
mod metrics;
mod train;

pub use analyze::{analyze_run, resets_aligned, write_tables, PointRow, ResetRow, RunAnalysis, StepRow};
pub use calibrate::{calibrate, probe_values, ProbePolicy, VALUE_FLOOR};
pub use checkpoint::{param_checksum, shape_for, Checkpoint, MAGIC, VERSION};
pub use config::{EvalPolicy, ExperimentConfig, RunConfig};
pub use eval::{evaluate, evaluate_policy, EvalReport};
pub use metrics::{read_metrics, MetricsRecord, MetricsWriter, Payload};
pub use train::{
    eval_seed, train, EvalPoint, TrainOutcome, ABORT_CHECKPOINT, CHECKPOINT_DIR, CONFIG_FILE, FINAL_CHECKPOINT,
    METRICS_FILE,
};

use crate::env::{EnvState, OBS_DIM};
use crate::trajectory::StateVec;

/// The state the irreversibility measures watch: the object's position.
pub fn measured_state(state: &EnvState) -> StateVec {
    StateVec::from([state.object.x, state.object.y])
}

/// Divisor for the relative object and goal offsets in [`policy_input`].
pub const REL_SCALE: f64 = 0.1;

/// Fixed rescaling applied to observations before they reach the network.
/// Absolute gripper coordinates are centred to `[-1, 1]`; relative offsets
/// are divided by `REL_SCALE`, so the grasp boundary (~0.06) is not buried
/// under tanh units initialised for unit-scale inputs.
pub fn policy_input(obs: &[f64; OBS_DIM]) -> [f64; OBS_DIM] {
    let mut x = *obs;
    x[0] = 2.0 * obs[0] - 1.0;
    x[1] = 2.0 * obs[1] - 1.0;
    for v in &mut x[2..6] {
        *v /= REL_SCALE;
    }
    x
}
