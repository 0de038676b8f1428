use super::{dtw_distance, entropy_dispersion, std_dispersion, MeasureConfig, MeasureKind, MeasureVerdict};
use crate::error::{Error, Result};
use crate::trajectory::{StateVec, TrajectoryBuffer};

/// The statistic a check computes over one full horizon of states.
///
/// Dispersion kinds use every state in `states`. Distance kinds use the first
/// `horizon` states and return the max-over-window of the min distance to the
/// past (pointwise Euclidean), or the window-length normalized DTW distance
/// between the recent window and the past.
pub fn measure_value(cfg: &MeasureConfig, states: &[StateVec]) -> Result<f64> {
    match cfg.kind {
        MeasureKind::Std => std_dispersion(states),
        MeasureKind::Ent => entropy_dispersion(states, &cfg.grid),
        MeasureKind::L2 | MeasureKind::Dtw => {
            let (n, m) = (cfg.horizon, cfg.window);
            if 2 * m >= n {
                return Err(Error::config("distance window must be below horizon/2"));
            }
            if states.len() < n {
                return Err(Error::WindowTooLarge {
                    requested: n,
                    available: states.len(),
                });
            }
            let tau = &states[..n];
            if cfg.kind == MeasureKind::L2 {
                Ok(max_min_distance(tau, m))
            } else {
                let d = dtw_distance(&tau[n - m..], &tau[..n - 2 * m])?;
                Ok(d / m as f64)
            }
        }
    }
}

fn max_min_distance(tau: &[StateVec], m: usize) -> f64 {
    let n = tau.len();
    let mut d_maxmin = 0.0f64;
    for i in 0..m {
        let s = &tau[n - m + i];
        let past = &tau[..n - 2 * m + i];
        let d_min = past
            .iter()
            .map(|p| s.euclidean(p))
            .fold(f64::INFINITY, f64::min);
        d_maxmin = d_maxmin.max(d_min);
    }
    d_maxmin
}

fn idle(step: u64) -> MeasureVerdict {
    MeasureVerdict {
        value: None,
        ni: false,
        checked_at_step: step,
    }
}

/// One step of the consecutive-check dispersion procedure.
///
/// Once `buffer` holds `horizon` states, computes the dispersion, updates the
/// consecutive low-dispersion counter, and clears the buffer. NI is declared
/// when the counter reaches `n_tol`, after which the counter restarts.
pub fn dispersion_decision(
    buffer: &mut TrajectoryBuffer,
    cfg: &MeasureConfig,
    n_irr: &mut usize,
    step: u64,
) -> Result<MeasureVerdict> {
    if !cfg.kind.is_dispersion() {
        return Err(Error::config(format!(
            "dispersion decision needs std or ent, got {:?}",
            cfg.kind
        )));
    }
    if buffer.len() < cfg.horizon {
        return Ok(idle(step));
    }
    let rho = measure_value(cfg, buffer.states())?;
    let mut ni = false;
    if rho < cfg.threshold {
        *n_irr += 1;
        if *n_irr >= cfg.n_tol {
            ni = true;
            *n_irr = 0;
        }
    } else {
        *n_irr = 0;
    }
    buffer.clear();
    Ok(MeasureVerdict {
        value: Some(rho),
        ni,
        checked_at_step: step,
    })
}

/// One step of the sliding-window distance procedure. Clears the buffer after
/// every check.
pub fn distance_decision(
    buffer: &mut TrajectoryBuffer,
    cfg: &MeasureConfig,
    step: u64,
) -> Result<MeasureVerdict> {
    if cfg.kind.is_dispersion() {
        return Err(Error::config(format!(
            "distance decision needs l2 or dtw, got {:?}",
            cfg.kind
        )));
    }
    if buffer.len() < cfg.horizon {
        return Ok(idle(step));
    }
    let d_maxmin = measure_value(cfg, buffer.states())?;
    buffer.clear();
    Ok(MeasureVerdict {
        value: Some(d_maxmin),
        ni: d_maxmin < cfg.threshold,
        checked_at_step: step,
    })
}

/// Worker-local online detector: owns the history buffer and the consecutive
/// counter.
#[derive(Clone, Debug)]
pub struct NiDetector {
    cfg: MeasureConfig,
    buffer: TrajectoryBuffer,
    n_irr: usize,
}

impl NiDetector {
    pub fn new(cfg: MeasureConfig, dim: usize) -> Result<Self> {
        cfg.validate()?;
        let buffer = TrajectoryBuffer::new(cfg.horizon, dim)?;
        Ok(Self {
            cfg,
            buffer,
            n_irr: 0,
        })
    }

    pub fn config(&self) -> &MeasureConfig {
        &self.cfg
    }

    pub fn buffer(&self) -> &TrajectoryBuffer {
        &self.buffer
    }

    pub fn consecutive_low(&self) -> usize {
        self.n_irr
    }

    /// Appends `state` at `step` and runs the configured decision.
    pub fn observe(&mut self, step: u64, state: StateVec) -> Result<MeasureVerdict> {
        self.buffer.append(step, state)?;
        if self.cfg.kind.is_dispersion() {
            dispersion_decision(&mut self.buffer, &self.cfg, &mut self.n_irr, step)
        } else {
            distance_decision(&mut self.buffer, &self.cfg, step)
        }
    }

    /// Forgets all history, as after an environment reset.
    pub fn reset(&mut self) {
        self.buffer.clear();
        self.n_irr = 0;
    }
}
