use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rmrl_core::env::TaskMode;
use rmrl_core::harness::{self, Checkpoint, ExperimentConfig};

#[derive(Parser)]
#[command(name = "rmrl", version, about = "Reset-minimizing RL experiment harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Train,
    PosOod,
}

impl From<ModeArg> for TaskMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Train => TaskMode::Train,
            ModeArg::PosOod => TaskMode::PosOod,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train a policy under the configured reset strategy.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Overrides run.seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Run directory; defaults to runs/<strategy>-seed<N>.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recommend an NI threshold from random and do-nothing probes.
    Calibrate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        probe_steps: u64,
        /// Also print both probe value distributions.
        #[arg(long)]
        values: bool,
    },
    /// Evaluate a checkpoint on freshly sampled tasks.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, value_enum, default_value = "train")]
        mode: ModeArg,
        #[arg(long, default_value_t = 200)]
        tasks: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Export curve and point-cloud tables from run directories.
    Analyze {
        #[arg(required = true)]
        dirs: Vec<PathBuf>,
        /// Trailing window, in evaluations, for smoothed success.
        #[arg(long, default_value_t = 1)]
        smooth: usize,
        #[arg(long, default_value = "analysis")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(text) => {
            // A closed pipe (e.g. `| head`) is not an error for a report.
            match std::io::stdout().lock().write_all(text.as_bytes()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    eprintln!("error: writing output: {e}");
                    ExitCode::from(2)
                }
                _ => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))
}

fn run(command: Command) -> Result<String> {
    let mut text = String::new();
    match command {
        Command::Train { config, seed, out } => {
            let mut cfg = load_config(&config)?;
            if let Some(seed) = seed {
                cfg.run.seed = seed;
            }
            let out = out.unwrap_or_else(|| {
                PathBuf::from("runs").join(format!("{}-seed{}", cfg.strategy.kind.as_str(), cfg.run.seed))
            });
            let outcome = harness::train(&cfg, &out)?;
            let last = outcome.evals.last().map(|e| e.success_rate);
            writeln!(
                text,
                "{}: {} steps, {} resets, final eval success {}",
                outcome.run_dir.display(),
                outcome.global_steps,
                outcome.total_resets,
                last.map_or("n/a".to_string(), |s| format!("{s:.3}"))
            )?;
        }
        Command::Calibrate {
            config,
            probe_steps,
            values,
        } => {
            let cfg = load_config(&config)?;
            let cal = harness::calibrate(&cfg, probe_steps)?;
            writeln!(text, "threshold\t{}", cal.threshold)?;
            writeln!(text, "random_lower_quartile\t{}", cal.random_lower_quartile)?;
            writeln!(text, "noop_upper_quartile\t{}", cal.noop_upper_quartile)?;
            writeln!(text, "random_median\t{}", cal.random_median())?;
            writeln!(text, "noop_median\t{}", cal.noop_median())?;
            if values {
                writeln!(text, "probe\tvalue")?;
                for v in &cal.random_values {
                    writeln!(text, "random\t{v}")?;
                }
                for v in &cal.noop_values {
                    writeln!(text, "noop\t{v}")?;
                }
            }
        }
        Command::Eval {
            checkpoint,
            mode,
            tasks,
            seed,
        } => {
            let ckpt = Checkpoint::load(&checkpoint).with_context(|| format!("loading {}", checkpoint.display()))?;
            let report = harness::evaluate(&ckpt, mode.into(), tasks, seed)?;
            writeln!(text, "success_rate\t{}", report.success_rate)?;
            writeln!(text, "successes\t{}/{}", report.successes, report.tasks)?;
            writeln!(
                text,
                "mean_steps_to_success\t{}",
                report.mean_steps.map_or(String::new(), |m| m.to_string())
            )?;
        }
        Command::Analyze { dirs, smooth, out } => {
            let mut runs = Vec::new();
            let mut failed = 0;
            for dir in &dirs {
                match harness::analyze_run(dir, smooth) {
                    Ok(a) => runs.push(a),
                    Err(e) => {
                        eprintln!("{}: {e}", dir.display());
                        failed += 1;
                    }
                }
            }
            if !runs.is_empty() {
                harness::write_tables(&runs, &out)?;
                for r in &runs {
                    writeln!(text, "{}\tresets={}\tevals={}", r.name, r.total_resets(), r.steps.len())?;
                }
            }
            if failed > 0 {
                bail!("{failed} of {} run directories could not be analyzed", dirs.len());
            }
        }
    }
    Ok(text)
}
