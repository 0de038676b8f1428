//! State vectors, the bounded trajectory history read by the irreversibility
//! measures, and the phase / reset bookkeeping records shared by the
//! strategies and the harness.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::env::GoalSpec;
use crate::error::{Error, Result};

/// A finite, fixed-dimension state vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateVec(Vec<f64>);

impl StateVec {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("state vector"));
        }
        Ok(Self(values))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn euclidean(&self, other: &StateVec) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

impl From<[f64; 2]> for StateVec {
    /// Panics on non-finite input; use [`StateVec::new`] for untrusted values.
    fn from(v: [f64; 2]) -> Self {
        StateVec::new(v.to_vec()).expect("finite state")
    }
}

/// Append-only history window with oldest-first eviction.
///
/// Holds at most `capacity` states. Step indices must strictly increase.
#[derive(Clone, Debug)]
pub struct TrajectoryBuffer {
    capacity: usize,
    dim: usize,
    states: Vec<StateVec>,
    steps: Vec<u64>,
    phase_starts: Vec<u64>,
}

impl TrajectoryBuffer {
    pub fn new(capacity: usize, dim: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::config("trajectory buffer capacity must be positive"));
        }
        if dim == 0 {
            return Err(Error::config("state dimension must be positive"));
        }
        Ok(Self {
            capacity,
            dim,
            states: Vec::with_capacity(capacity),
            steps: Vec::with_capacity(capacity),
            phase_starts: Vec::new(),
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn append(&mut self, step: u64, state: StateVec) -> Result<()> {
        if state.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: state.dim(),
            });
        }
        if let Some(&last) = self.steps.last() {
            if step <= last {
                return Err(Error::config(format!(
                    "step index {step} does not follow {last}"
                )));
            }
        }
        if self.states.len() == self.capacity {
            self.states.remove(0);
            self.steps.remove(0);
            let oldest = self.steps.first().copied().unwrap_or(step);
            self.phase_starts.retain(|&s| s >= oldest);
        }
        self.states.push(state);
        self.steps.push(step);
        Ok(())
    }

    /// Marks `step` as the first step of a new phase.
    pub fn mark_phase_start(&mut self, step: u64) {
        if self.phase_starts.last() != Some(&step) {
            self.phase_starts.push(step);
        }
    }

    pub fn phase_starts(&self) -> &[u64] {
        &self.phase_starts
    }

    /// The most recent `k` states, oldest first.
    pub fn window(&self, k: usize) -> Result<&[StateVec]> {
        if k > self.states.len() {
            return Err(Error::WindowTooLarge {
                requested: k,
                available: self.states.len(),
            });
        }
        Ok(&self.states[self.states.len() - k..])
    }

    pub fn states(&self) -> &[StateVec] {
        &self.states
    }

    pub fn steps(&self) -> &[u64] {
        &self.steps
    }

    pub fn clear(&mut self) {
        self.states.clear();
        self.steps.clear();
        self.phase_starts.clear();
    }

    /// Writes a tab-separated table `step  dim0 .. dimD-1` with one header line.
    pub fn write_table<W: Write>(&self, mut out: W) -> Result<()> {
        let header: Vec<String> = std::iter::once("step".to_string())
            .chain((0..self.dim).map(|d| format!("dim{d}")))
            .collect();
        writeln!(out, "{}", header.join("\t"))?;
        for (step, s) in self.steps.iter().zip(&self.states) {
            write!(out, "{step}")?;
            for v in s.values() {
                write!(out, "\t{v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResetCause {
    Initial,
    Periodic,
    MeasureNi,
    GroundTruthIrreversible,
    EpisodicBoundary,
}

impl fmt::Display for ResetCause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ResetCause::Initial => "initial",
            ResetCause::Periodic => "periodic",
            ResetCause::MeasureNi => "measure_ni",
            ResetCause::GroundTruthIrreversible => "ground_truth_irreversible",
            ResetCause::EpisodicBoundary => "episodic_boundary",
        };
        f.write_str(s)
    }
}

/// One environment reset. Every reset is counted, the initial one included.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResetEvent {
    pub step: u64,
    pub worker: usize,
    pub cause: ResetCause,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseOutcome {
    Success,
    Timeout,
    Interrupted,
}

impl fmt::Display for PhaseOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PhaseOutcome::Success => "success",
            PhaseOutcome::Timeout => "timeout",
            PhaseOutcome::Interrupted => "interrupted",
        };
        f.write_str(s)
    }
}

/// The span between two goal switches.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseRecord {
    pub phase_index: u64,
    pub goal: GoalSpec,
    pub start_step: u64,
    pub end_step: u64,
    pub outcome: PhaseOutcome,
}

impl PhaseRecord {
    pub fn len(&self) -> u64 {
        self.end_step - self.start_step
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
