//! Turns run directories into plain tab-separated tables: success against
//! steps, success against resets, a reset-aligned overlay across runs, and
//! final object positions per phase outcome.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::metrics::{read_metrics, Payload};
use super::train::METRICS_FILE;
use crate::error::{Error, Result};
use crate::trajectory::PhaseOutcome;

#[derive(Clone, Debug, PartialEq)]
pub struct StepRow {
    pub step: u64,
    pub resets: u64,
    pub success_rate: f64,
    /// Trailing mean over the last `smooth` evaluations.
    pub smoothed: f64,
}

/// One breakpoint of the success-vs-resets step function.
#[derive(Clone, Debug, PartialEq)]
pub struct ResetRow {
    pub resets: u64,
    pub step: u64,
    /// Latest smoothed evaluation at or before `step`.
    pub success_rate: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointRow {
    pub object_x: f64,
    pub object_y: f64,
    pub outcome: PhaseOutcome,
}

#[derive(Clone, Debug)]
pub struct RunAnalysis {
    pub name: String,
    pub dir: PathBuf,
    pub steps: Vec<StepRow>,
    pub resets: Vec<ResetRow>,
    pub points: Vec<PointRow>,
}

impl RunAnalysis {
    pub fn total_resets(&self) -> u64 {
        self.resets.last().map_or(0, |r| r.resets)
    }

    /// First evaluation whose smoothed success reaches `level`.
    pub fn first_reaching(&self, level: f64) -> Option<&StepRow> {
        self.steps.iter().find(|r| r.smoothed >= level)
    }

    pub fn steps_table(&self) -> String {
        let mut s = String::from("step\tresets\tsuccess_rate\tsmoothed\n");
        for r in &self.steps {
            writeln!(s, "{}\t{}\t{}\t{}", r.step, r.resets, r.success_rate, r.smoothed).unwrap();
        }
        s
    }

    pub fn resets_table(&self) -> String {
        let mut s = String::from("resets\tstep\tsuccess_rate\n");
        for r in &self.resets {
            writeln!(s, "{}\t{}\t{}", r.resets, r.step, fmt_opt(r.success_rate)).unwrap();
        }
        s
    }

    pub fn points_table(&self) -> String {
        let mut s = String::from("object_x\tobject_y\toutcome\n");
        for p in &self.points {
            writeln!(s, "{}\t{}\t{}", p.object_x, p.object_y, p.outcome).unwrap();
        }
        s
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Analyzes the metrics file in `dir`, or `dir` itself when it is a file.
pub fn analyze_run(dir: &Path, smooth: usize) -> Result<RunAnalysis> {
    if smooth == 0 {
        return Err(Error::config("smoothing window must be at least 1"));
    }
    let path = if dir.is_dir() { dir.join(METRICS_FILE) } else { dir.to_path_buf() };
    let records = read_metrics(&path)?;

    let mut steps = Vec::new();
    let mut window = std::collections::VecDeque::with_capacity(smooth);
    let mut reset_steps = Vec::new();
    let mut points = Vec::new();
    for rec in &records {
        match &rec.payload {
            Payload::Eval {
                success_rate, resets, ..
            } => {
                if window.len() == smooth {
                    window.pop_front();
                }
                window.push_back(*success_rate);
                let smoothed = window.iter().sum::<f64>() / window.len() as f64;
                steps.push(StepRow {
                    step: rec.step,
                    resets: *resets,
                    success_rate: *success_rate,
                    smoothed,
                });
            }
            Payload::Reset { .. } => reset_steps.push(rec.step),
            Payload::Success {
                outcome,
                object_x,
                object_y,
                ..
            } => points.push(PointRow {
                object_x: *object_x,
                object_y: *object_y,
                outcome: *outcome,
            }),
            Payload::Reward { .. } | Payload::Measure { .. } => {}
        }
    }
    // Records are merged per rollout, so resets from different workers
    // interleave; order them on the shared step axis.
    reset_steps.sort_unstable();
    steps.sort_by_key(|r| r.step);
    let resets = reset_steps
        .iter()
        .enumerate()
        .map(|(i, &step)| {
            let at = steps.partition_point(|r| r.step <= step);
            ResetRow {
                resets: i as u64 + 1,
                step,
                success_rate: at.checked_sub(1).map(|k| steps[k].smoothed),
            }
        })
        .collect();
    let name = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".into());
    Ok(RunAnalysis {
        name,
        dir: dir.to_path_buf(),
        steps,
        resets,
        points,
    })
}

/// Success of every run at every reset count seen in any run. A run's value
/// at `k` resets is its step function evaluated there; blank past its end.
pub fn resets_aligned(runs: &[RunAnalysis]) -> String {
    let mut s = String::from("resets");
    for r in runs {
        write!(s, "\t{}", r.name).unwrap();
    }
    s.push('\n');
    let axis: BTreeSet<u64> = runs.iter().flat_map(|r| r.resets.iter().map(|x| x.resets)).collect();
    for k in axis {
        write!(s, "{k}").unwrap();
        for r in runs {
            let cell = if k <= r.total_resets() {
                r.resets[(k - 1) as usize].success_rate
            } else {
                None
            };
            write!(s, "\t{}", fmt_opt(cell)).unwrap();
        }
        s.push('\n');
    }
    s
}

/// Writes the per-run tables and the aligned overlay into `out`. Runs that
/// share a directory name get an index suffix.
pub fn write_tables(runs: &[RunAnalysis], out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)?;
    let mut seen = BTreeSet::new();
    let mut names = Vec::new();
    for (i, r) in runs.iter().enumerate() {
        let name = if seen.insert(r.name.clone()) {
            r.name.clone()
        } else {
            format!("{}_{i}", r.name)
        };
        std::fs::write(out.join(format!("{name}.steps.tsv")), r.steps_table())?;
        std::fs::write(out.join(format!("{name}.resets.tsv")), r.resets_table())?;
        std::fs::write(out.join(format!("{name}.points.tsv")), r.points_table())?;
        names.push(name);
    }
    let renamed: Vec<RunAnalysis> = runs
        .iter()
        .zip(names)
        .map(|(r, name)| RunAnalysis { name, ..r.clone() })
        .collect();
    std::fs::write(out.join("resets_aligned.tsv"), resets_aligned(&renamed))?;
    Ok(())
}
