//! Batch runner for recovery experiments.
//!
//! Exit status: 0 on completion, 1 on a configuration or I/O error, 2 when
//! any solver diverged.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use hankel_prior::experiment::{
    run_diagnose, run_phase_transition, run_runtime, run_single, run_success_curve, ExperimentKind,
    ExperimentResult, ExperimentSpec, TrialRecord,
};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "hankel-prior", version, about = "Prior-aided Hankel matrix completion experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Recover one instance with every configured solver.
    Recover(Common),
    /// Success rate against sampling probability.
    Curve(Common),
    /// Success rate against sample count.
    Phase(Common),
    /// Wall-time comparison across signal sizes.
    Runtime(Common),
    /// Certificate and sample-bound quantities for one instance.
    Diagnose(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment spec (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the spec seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the spec trial count.
    #[arg(long)]
    trials: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    jobs: Option<usize>,
}

enum Failure {
    Config(anyhow::Error),
    Diverged,
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Config(e)
    }
}

fn load_spec(args: &Common, kind: ExperimentKind) -> Result<ExperimentSpec> {
    let text = fs::read_to_string(&args.config).with_context(|| format!("reading {}", args.config.display()))?;
    let mut spec: ExperimentSpec =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", args.config.display()))?;
    spec.kind = kind;
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    if let Some(trials) = args.trials {
        spec.trials = trials;
    }
    spec.validate()?;
    Ok(spec)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn write_trials(out: &Path, records: &[TrialRecord]) -> Result<()> {
    let dir = out.join("trials");
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut by_seed: BTreeMap<u64, Vec<&TrialRecord>> = BTreeMap::new();
    for r in records {
        by_seed.entry(r.seed).or_default().push(r);
    }
    for (seed, recs) in by_seed {
        write_json(&dir.join(format!("trial-{seed}.json")), &recs)?;
    }
    Ok(())
}

fn write_result(out: &Path, result: &ExperimentResult) -> Result<()> {
    fs::write(out.join("results.csv"), result.to_csv()?).context("writing results.csv")?;
    write_json(&out.join("results.json"), result)?;
    write_trials(out, &result.records)
}

fn scalar_rows(value: &serde_json::Value, prefix: &str, rows: &mut Vec<(String, String)>) {
    match value {
        serde_json::Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                scalar_rows(v, &key, rows);
            }
        }
        serde_json::Value::Null => rows.push((prefix.to_string(), String::new())),
        serde_json::Value::String(s) => rows.push((prefix.to_string(), s.clone())),
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}

fn run(command: Command) -> Result<(), Failure> {
    let (args, kind) = match &command {
        Command::Recover(a) => (a, ExperimentKind::Single),
        Command::Curve(a) => (a, ExperimentKind::SuccessCurve),
        Command::Phase(a) => (a, ExperimentKind::PhaseTransition),
        Command::Runtime(a) => (a, ExperimentKind::Runtime),
        Command::Diagnose(a) => (a, ExperimentKind::Single),
    };
    let spec = load_spec(args, kind)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = args.jobs {
        pool = pool.num_threads(jobs.max(1));
    }
    let pool = pool.build().context("starting worker pool")?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let out = args.out.as_path();

    let diverged = pool.install(|| -> Result<bool> {
        Ok(match &command {
            Command::Recover(_) => {
                let report = run_single(&spec)?;
                let result = report.to_result(&spec);
                fs::write(out.join("results.csv"), result.to_csv()?).context("writing results.csv")?;
                write_json(&out.join("results.json"), &report)?;
                write_trials(out, &result.records)?;
                report.any_diverged()
            }
            Command::Diagnose(_) => {
                let report = run_diagnose(&spec)?;
                let mut rows = Vec::new();
                scalar_rows(&serde_json::to_value(&report)?, "", &mut rows);
                let mut csv = String::from("quantity,value\n");
                for (k, v) in rows {
                    csv.push_str(&format!("{k},{v}\n"));
                }
                fs::write(out.join("results.csv"), csv).context("writing results.csv")?;
                write_json(&out.join("results.json"), &report)?;
                false
            }
            Command::Curve(_) => {
                let r = run_success_curve(&spec)?;
                write_result(out, &r)?;
                r.any_diverged()
            }
            Command::Phase(_) => {
                let r = run_phase_transition(&spec)?;
                write_result(out, &r)?;
                r.any_diverged()
            }
            Command::Runtime(_) => {
                let r = run_runtime(&spec)?;
                write_result(out, &r)?;
                r.any_diverged()
            }
        })
    })?;
    if diverged {
        Err(Failure::Diverged)
    } else {
        Ok(())
    }
}

fn main() -> ExitCode {
    // Usage errors are configuration errors; clap's own status 2 is reserved
    // for divergence here.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Diverged) => {
            eprintln!("warning: at least one solver diverged; see results.json");
            ExitCode::from(2)
        }
    }
}
