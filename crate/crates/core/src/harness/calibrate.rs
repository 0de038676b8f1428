use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::ExperimentConfig;
use super::measured_state;
use crate::env::{ActionId, Tabletop};
use crate::error::{Error, Result};
use crate::measures::{measure_value, Calibration, MeasureConfig};

/// Probe values at or below this are treated as this value when forming the
/// geometric mean, so an exactly frozen no-op probe still gives `threshold > 0`.
pub const VALUE_FLOOR: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProbePolicy {
    UniformRandom,
    /// Repeats `Release` with an empty gripper, which changes nothing.
    NoOp,
}

/// Measure values over consecutive full horizons, each from a fresh reset.
pub fn probe_values(
    env: &Tabletop,
    measure: &MeasureConfig,
    policy: ProbePolicy,
    probe_steps: u64,
    rng: &mut impl Rng,
) -> Result<Vec<f64>> {
    let horizon = measure.horizon;
    let segments = probe_steps / horizon as u64;
    if segments == 0 {
        return Err(Error::Calibration(format!(
            "probe of {probe_steps} steps is shorter than one horizon of {horizon}"
        )));
    }
    let goal = env.config().target_goal;
    let mut values = Vec::with_capacity(segments as usize);
    let mut states = Vec::with_capacity(horizon);
    for _ in 0..segments {
        let mut state = env.reset_full(rng);
        states.clear();
        for _ in 0..horizon {
            let action = match policy {
                ProbePolicy::UniformRandom => ActionId::ALL[rng.random_range(0..ActionId::COUNT)],
                ProbePolicy::NoOp => ActionId::Release,
            };
            env.step(&mut state, action, goal, rng);
            states.push(measured_state(&state));
        }
        values.push(measure_value(measure, &states)?);
    }
    Ok(values)
}

/// Runs the random and no-op probes for `probe_steps` each and places the
/// threshold between their value distributions.
pub fn calibrate(cfg: &ExperimentConfig, probe_steps: u64) -> Result<Calibration> {
    let measure = cfg
        .measure
        .as_ref()
        .ok_or_else(|| Error::Calibration("config has no [measure] section".into()))?;
    let env = Tabletop::new(cfg.env.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.run.seed);
    let random = probe_values(&env, measure, ProbePolicy::UniformRandom, probe_steps, &mut rng)?;
    let noop = probe_values(&env, measure, ProbePolicy::NoOp, probe_steps, &mut rng)?;
    Calibration::from_values(random, noop, VALUE_FLOOR)
}
