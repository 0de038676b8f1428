use serde::{Deserialize, Serialize};

/// How the trajectory continues after a step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum StepEnd {
    /// The next recorded step continues the same phase.
    Continue,
    /// Success or a true reset: no bootstrap.
    Terminal,
    /// Phase ended on a goal switch while the world persists; bootstrap from
    /// the value of the final state under the old goal.
    Truncated { bootstrap: f64 },
}

/// Generalized advantage estimates and value targets for one worker segment.
///
/// `last_value` bootstraps the final step when it is `Continue`. The
/// recursion is cut at every `Terminal` or `Truncated` step.
pub fn compute_gae(
    rewards: &[f64],
    values: &[f64],
    ends: &[StepEnd],
    last_value: f64,
    gamma: f64,
    tau: f64,
) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(rewards.len(), values.len());
    assert_eq!(rewards.len(), ends.len());
    let n = rewards.len();
    let mut adv = vec![0.0; n];
    let mut next_adv = 0.0;
    let mut next_value = last_value;
    for t in (0..n).rev() {
        let (bootstrap, cut) = match ends[t] {
            StepEnd::Continue => (next_value, false),
            StepEnd::Terminal => (0.0, true),
            StepEnd::Truncated { bootstrap } => (bootstrap, true),
        };
        let delta = rewards[t] + gamma * bootstrap - values[t];
        let carry = if cut { 0.0 } else { gamma * tau * next_adv };
        adv[t] = delta + carry;
        next_adv = adv[t];
        next_value = values[t];
    }
    let returns = adv.iter().zip(values).map(|(a, v)| a + v).collect();
    (adv, returns)
}

/// Shifts and scales `adv` in place to zero mean and unit population variance.
/// A constant slice is only centred.
pub fn normalize(adv: &mut [f64]) {
    if adv.is_empty() {
        return;
    }
    let n = adv.len() as f64;
    let mean = adv.iter().sum::<f64>() / n;
    adv.iter_mut().for_each(|a| *a -= mean);
    let std = (adv.iter().map(|a| a * a).sum::<f64>() / n).sqrt();
    if std > 1e-12 {
        adv.iter_mut().for_each(|a| *a /= std);
    }
}
