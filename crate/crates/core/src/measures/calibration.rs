use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Linear-interpolation quantile (`q` in `[0, 1]`) of unsorted finite values.
pub fn quantile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty("quantile"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    Ok(sorted[lo] + (sorted[hi] - sorted[lo]) * frac)
}

/// Detection threshold chosen between the measure's values under an active
/// probe policy and under a do-nothing policy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub threshold: f64,
    pub random_lower_quartile: f64,
    pub noop_upper_quartile: f64,
    pub random_values: Vec<f64>,
    pub noop_values: Vec<f64>,
}

impl Calibration {
    /// Geometric mean of the random probe's lower quartile and the no-op
    /// probe's upper quartile, each floored at `floor` so a perfectly frozen
    /// no-op probe (all zeros) still yields a positive threshold.
    pub fn from_values(random_values: Vec<f64>, noop_values: Vec<f64>, floor: f64) -> Result<Self> {
        if random_values.is_empty() || noop_values.is_empty() {
            return Err(Error::Calibration(
                "both probes must produce at least one full-horizon value".into(),
            ));
        }
        if !(floor.is_finite() && floor > 0.0) {
            return Err(Error::Calibration("value floor must be positive".into()));
        }
        if random_values.iter().chain(&noop_values).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("calibration probe values"));
        }
        let random_lower_quartile = quantile(&random_values, 0.25)?;
        let noop_upper_quartile = quantile(&noop_values, 0.75)?;
        let threshold = (random_lower_quartile.max(floor) * noop_upper_quartile.max(floor)).sqrt();
        Ok(Self {
            threshold,
            random_lower_quartile,
            noop_upper_quartile,
            random_values,
            noop_values,
        })
    }

    pub fn random_median(&self) -> f64 {
        quantile(&self.random_values, 0.5).expect("non-empty")
    }

    pub fn noop_median(&self) -> f64 {
        quantile(&self.noop_values, 0.5).expect("non-empty")
    }
}
