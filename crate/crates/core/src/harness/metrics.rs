//! Line-delimited JSON metrics. One object per line, no wall-clock fields, so
//! identical runs produce identical files.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::env::TaskMode;
use crate::error::{Error, Result};
use crate::trajectory::{PhaseOutcome, ResetCause};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub step: u64,
    pub worker: usize,
    #[serde(flatten)]
    pub payload: Payload,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    /// Summed shaping reward over one rollout segment.
    Reward { total: f64, steps: u64 },
    /// A closed phase and where the object ended up.
    Success {
        outcome: PhaseOutcome,
        length: u64,
        object_x: f64,
        object_y: f64,
    },
    Reset { cause: ResetCause },
    Measure { value: f64, ni: bool },
    Eval {
        mode: TaskMode,
        success_rate: f64,
        mean_steps: Option<f64>,
        tasks: usize,
        /// Resets consumed by all workers so far.
        resets: u64,
    },
}

impl MetricsRecord {
    pub fn new(step: u64, worker: usize, payload: Payload) -> Self {
        Self { step, worker, payload }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("metrics records always serialize")
    }

    pub fn parse_line(line: &str) -> std::result::Result<Self, String> {
        let rec: MetricsRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
        rec.check()?;
        Ok(rec)
    }

    fn check(&self) -> std::result::Result<(), String> {
        let finite = match &self.payload {
            Payload::Reward { total, .. } => total.is_finite(),
            Payload::Success { object_x, object_y, .. } => object_x.is_finite() && object_y.is_finite(),
            Payload::Reset { .. } => true,
            Payload::Measure { value, .. } => value.is_finite(),
            Payload::Eval {
                success_rate,
                mean_steps,
                ..
            } => (0.0..=1.0).contains(success_rate) && mean_steps.is_none_or(f64::is_finite),
        };
        if finite {
            Ok(())
        } else {
            Err("non-finite or out-of-range value".into())
        }
    }
}

/// The single writer for a run's metrics file.
pub struct MetricsWriter {
    out: BufWriter<File>,
    last_step: Vec<u64>,
}

impl MetricsWriter {
    pub fn create(path: &Path, workers: usize) -> Result<Self> {
        Ok(Self {
            out: BufWriter::new(File::create(path)?),
            last_step: vec![0; workers],
        })
    }

    pub fn write(&mut self, rec: &MetricsRecord) -> Result<()> {
        if let Some(last) = self.last_step.get_mut(rec.worker) {
            debug_assert!(rec.step >= *last, "worker {} went back in time", rec.worker);
            *last = rec.step;
        }
        writeln!(self.out, "{}", rec.to_line())?;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

/// Reads a whole metrics file. Any malformed line fails the file.
pub fn read_metrics(path: &Path) -> Result<Vec<MetricsRecord>> {
    let err = |reason: String| Error::Metrics {
        path: PathBuf::from(path),
        reason,
    };
    let file = File::open(path).map_err(|e| err(e.to_string()))?;
    let mut records = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| err(format!("line {}: {e}", n + 1)))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = MetricsRecord::parse_line(&line).map_err(|e| err(format!("line {}: {e}", n + 1)))?;
        records.push(rec);
    }
    if records.is_empty() {
        return Err(err("no records".into()));
    }
    Ok(records)
}
