//! Unsupervised near-irreversibility detection from trajectory statistics.
//!
//! Two families of diversity statistics are provided. Dispersion measures
//! ([`std_dispersion`], [`entropy_dispersion`]) summarize how spread out a
//! horizon of states is. Distance measures (pointwise Euclidean and
//! [`dtw_distance`]) ask how far the most recent states are from anything
//! visited earlier. Both feed online decision procedures ([`NiDetector`]) that
//! run on a [`TrajectoryBuffer`](crate::trajectory::TrajectoryBuffer) and
//! clear it after every check. [`phi_count`] is the offline block-partition
//! count over a whole trajectory.

mod calibration;
mod decision;
mod dispersion;
mod dtw;
mod partition;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use calibration::{quantile, Calibration};
pub use decision::{dispersion_decision, distance_decision, measure_value, NiDetector};
pub use dispersion::{entropy_dispersion, std_dispersion};
pub use dtw::dtw_distance;
pub use partition::{block_diversity, phi_count, phi_decision};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    Std,
    Ent,
    L2,
    Dtw,
}

impl MeasureKind {
    pub fn is_dispersion(self) -> bool {
        matches!(self, MeasureKind::Std | MeasureKind::Ent)
    }
}

/// Equal-width histogram grid used by the entropy measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntropyGrid {
    pub bins_per_dim: usize,
    /// Inclusive `[lo, hi]` per state dimension. States outside are clamped
    /// into the edge cells.
    pub bounds: Vec<[f64; 2]>,
}

impl EntropyGrid {
    pub fn unit_square(bins_per_dim: usize) -> Self {
        Self {
            bins_per_dim,
            bounds: vec![[0.0, 1.0], [0.0, 1.0]],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.bins_per_dim == 0 {
            return Err(Error::config("bins_per_dim must be at least 1"));
        }
        if self.bounds.is_empty() {
            return Err(Error::config("entropy grid needs bounds for every dimension"));
        }
        for [lo, hi] in &self.bounds {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::config(format!("invalid entropy bounds [{lo}, {hi}]")));
            }
        }
        Ok(())
    }
}

impl Default for EntropyGrid {
    fn default() -> Self {
        Self::unit_square(16)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureConfig {
    pub kind: MeasureKind,
    /// States examined per check.
    pub horizon: usize,
    /// Sliding window length for the distance kinds; must be below `horizon / 2`.
    #[serde(default = "default_window")]
    pub window: usize,
    pub threshold: f64,
    /// Consecutive low-dispersion checks required before declaring NI.
    #[serde(default = "default_n_tol")]
    pub n_tol: usize,
    #[serde(default)]
    pub grid: EntropyGrid,
}

fn default_window() -> usize {
    100
}

fn default_n_tol() -> usize {
    2
}

impl MeasureConfig {
    pub fn std() -> Self {
        Self {
            kind: MeasureKind::Std,
            horizon: 300,
            window: 100,
            threshold: 0.01,
            n_tol: 2,
            grid: EntropyGrid::default(),
        }
    }

    pub fn ent() -> Self {
        Self {
            kind: MeasureKind::Ent,
            ..Self::std()
        }
    }

    pub fn l2() -> Self {
        Self {
            kind: MeasureKind::L2,
            horizon: 600,
            window: 100,
            threshold: 0.01,
            n_tol: 1,
            grid: EntropyGrid::default(),
        }
    }

    pub fn dtw() -> Self {
        Self {
            kind: MeasureKind::Dtw,
            ..Self::l2()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::config("measure horizon must be positive"));
        }
        if !(self.threshold.is_finite() && self.threshold >= 0.0) {
            return Err(Error::config("measure threshold must be finite and non-negative"));
        }
        if self.n_tol == 0 {
            return Err(Error::config("n_tol must be at least 1"));
        }
        match self.kind {
            MeasureKind::L2 | MeasureKind::Dtw => {
                if self.window == 0 || 2 * self.window >= self.horizon {
                    return Err(Error::config(format!(
                        "distance window {} must be positive and below horizon/2 ({})",
                        self.window, self.horizon
                    )));
                }
            }
            MeasureKind::Ent => self.grid.validate()?,
            MeasureKind::Std => {}
        }
        Ok(())
    }
}

/// Outcome of feeding one state to a detector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureVerdict {
    /// The statistic computed at this step, `None` between checks.
    pub value: Option<f64>,
    pub ni: bool,
    pub checked_at_step: u64,
}

impl MeasureVerdict {
    pub fn checked(&self) -> bool {
        self.value.is_some()
    }
}

/// Diversity statistic used inside partition blocks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DispersionMetric {
    Std,
    Ent(EntropyGrid),
}

/// Parameters of the block-partition count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionCountConfig {
    /// Minimum length of a counted block.
    pub block_width: usize,
    /// Number of low-diversity blocks needed for a positive decision.
    pub count_threshold: usize,
    pub alpha: f64,
    pub metric: DispersionMetric,
}

impl PartitionCountConfig {
    pub fn validate(&self) -> Result<()> {
        if self.block_width < 2 {
            return Err(Error::config("block_width must be at least 2"));
        }
        if self.count_threshold == 0 {
            return Err(Error::config("count_threshold must be at least 1"));
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::config("alpha must be finite and non-negative"));
        }
        if let DispersionMetric::Ent(grid) = &self.metric {
            grid.validate()?;
        }
        Ok(())
    }
}
