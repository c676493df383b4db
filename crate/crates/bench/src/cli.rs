use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lazycg_core::RunTrace;

use crate::config::{self, Overrides, OracleSpec, Prepared, RunSpec};
use crate::runner::{execute, MonotonicClock};
use crate::tracefile::{online_path, OnlineFile, TraceFile};
use crate::verify::{verify, Verdict};

#[derive(Debug, Parser)]
#[command(name = "lazycg", version, about = "Lazy conditional-gradient experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Execute every run of a config and write one CSV trace per run.
    Run { config: PathBuf },
    /// Re-execute the run behind a trace and audit it.
    Verify { trace: PathBuf, config: PathBuf },
    /// Execute every run once per value of a parameter.
    Sweep {
        config: PathBuf,
        /// `name=v1,v2,...`, e.g. `K=1,1.1,2`.
        #[arg(long)]
        param: String,
    },
}

#[derive(Debug, Clone, Args)]
pub struct Flags {
    /// Wall-clock limit per run, in seconds.
    #[arg(long, global = true)]
    pub time_limit: Option<f64>,
    /// Seed for generated instances and runs.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    /// Disable the oracle cache in every run.
    #[arg(long, global = true)]
    pub no_cache: bool,
    #[arg(long, global = true, value_enum)]
    pub oracle: Option<OracleSpec>,
}

impl Flags {
    fn overrides(&self) -> Overrides {
        Overrides {
            time_limit_s: self.time_limit,
            seed: self.seed,
            output_dir: self.output_dir.clone(),
            no_cache: self.no_cache,
            oracle: self.oracle,
        }
    }
}

/// Process outcome with its exit status.
#[derive(Debug)]
pub enum Failure {
    /// Malformed config, trace or arguments (exit 2).
    Parse(String),
    /// A solver invariant failed during a run (exit 3).
    Invariant(String),
    /// I/O problems and failed audits (exit 1).
    Other(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Other(_) => 1,
            Failure::Parse(_) => 2,
            Failure::Invariant(_) => 3,
        }
    }
    fn message(&self) -> &str {
        match self {
            Failure::Parse(m) | Failure::Invariant(m) | Failure::Other(m) => m,
        }
    }
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

pub fn dispatch(cli: &Cli) -> Result<(), Failure> {
    let overrides = cli.flags.overrides();
    match &cli.command {
        Command::Run { config } => {
            let prepared = load(config, &overrides)?;
            run_all(&prepared)
        }
        Command::Sweep { config, param } => {
            let mut cfg = read_config(config, &overrides)?;
            cfg.runs = sweep_runs(&cfg.runs, param).map_err(Failure::Parse)?;
            let prepared = config::prepare(cfg).map_err(|e| located(config, e))?;
            run_all(&prepared)
        }
        Command::Verify { trace, config } => {
            let prepared = load(config, &overrides)?;
            let file = TraceFile::read(trace).map_err(|e| Failure::Parse(format!("{e:#}")))?;
            let index = prepared
                .config
                .runs
                .iter()
                .position(|r| r.name == file.run.name)
                .ok_or_else(|| {
                    Failure::Parse(format!(
                        "{}: no run named {:?}",
                        config.display(),
                        file.run.name
                    ))
                })?;
            let online = if prepared.config.runs[index].algorithm.is_online() {
                OnlineFile::read(&online_path(trace))
                    .map_err(|e| Failure::Parse(format!("{e:#}")))?
                    .records
            } else {
                Vec::new()
            };
            let report = verify(&prepared, index, &file, &online);
            for c in &report.checks {
                println!("ok: {c}");
            }
            println!("{}: {}", file.run.name, report.summary());
            match report.verdict {
                Verdict::Fail { .. } => Err(Failure::Other("verification failed".into())),
                _ => Ok(()),
            }
        }
    }
}

fn located(path: &Path, msg: String) -> Failure {
    Failure::Parse(format!("{}: {msg}", path.display()))
}

fn read_config(path: &Path, overrides: &Overrides) -> Result<config::ExperimentConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))?;
    let mut cfg = config::parse(&text).map_err(|e| located(path, e))?;
    cfg.apply(overrides);
    Ok(cfg)
}

fn load(path: &Path, overrides: &Overrides) -> Result<Prepared, Failure> {
    let cfg = read_config(path, overrides)?;
    config::prepare(cfg).map_err(|e| located(path, e))
}

/// Expands `name=v1,v2` into one copy of every run per value.
pub fn sweep_runs(runs: &[RunSpec], param: &str) -> Result<Vec<RunSpec>, String> {
    let (name, values) = param
        .split_once('=')
        .ok_or_else(|| format!("--param {param:?}: expected name=v1,v2,..."))?;
    let values: Vec<&str> = values.split(',').map(str::trim).collect();
    let mut out = Vec::new();
    for run in runs {
        for v in &values {
            let mut r = run.clone();
            set_param(&mut r, name.trim(), v)?;
            r.name = format!("{}_{}={}", run.name, name.trim(), v);
            out.push(r);
        }
    }
    Ok(out)
}

fn set_param(run: &mut RunSpec, name: &str, value: &str) -> Result<(), String> {
    fn num<T: std::str::FromStr>(name: &str, value: &str) -> Result<T, String> {
        value
            .parse()
            .map_err(|_| format!("--param {name}: cannot parse {value:?}"))
    }
    match name {
        "K" | "k" => run.k = Some(num(name, value)?),
        "epsilon" => run.epsilon = Some(num(name, value)?),
        "max_iters" => run.max_iters = Some(num(name, value)?),
        "time_limit_s" => run.time_limit_s = Some(num(name, value)?),
        "keep_size" => run.keep_size = Some(num(name, value)?),
        "eviction_period" => run.eviction_period = Some(num(name, value)?),
        "curvature" => run.curvature = Some(num(name, value)?),
        "sparsity" => run.sparsity = Some(num(name, value)?),
        "online_b" => run.online_b = Some(num(name, value)?),
        "online_s" => run.online_s = Some(num(name, value)?),
        "cache" => run.cache = Some(num(name, value)?),
        other => return Err(format!("--param: unknown parameter {other:?}")),
    }
    Ok(())
}

/// Runs everything first, then writes the traces, so that a failing run
/// leaves no partial output behind.
fn run_all(p: &Prepared) -> Result<(), Failure> {
    let mut traces = Vec::with_capacity(p.config.runs.len());
    for (i, spec) in p.config.runs.iter().enumerate() {
        let trace = execute(p, i, &MonotonicClock::new()).map_err(|e| match e {
            lazycg_core::Error::Invariant { .. } => {
                Failure::Invariant(format!("run {:?}: {e}", spec.name))
            }
            _ => Failure::Parse(format!("run {:?}: {e}", spec.name)),
        })?;
        traces.push(trace);
    }
    let dir = &p.config.output_dir;
    std::fs::create_dir_all(dir)
        .map_err(|e| Failure::Other(format!("{}: {e}", dir.display())))?;
    for (spec, trace) in p.config.runs.iter().zip(&traces) {
        let path = dir.join(format!("{}.csv", spec.name));
        let io = |e: anyhow::Error| Failure::Other(format!("{e:#}"));
        TraceFile::from_trace(&spec.name, trace).write(&path).map_err(io)?;
        if spec.algorithm.is_online() {
            OnlineFile {
                records: trace.online.clone(),
            }
            .write(&online_path(&path))
            .map_err(io)?;
        }
        println!("{}", summary_line(&spec.name, trace));
    }
    Ok(())
}

pub fn summary_line(name: &str, t: &RunTrace) -> String {
    let last = t.last();
    let mut line = format!(
        "{name}: {} iterations={} f={:.6e} wolfe_gap={:.3e} lp_calls={} cache_hit_rate={:.3} truncated={}",
        t.algorithm,
        t.iterations(),
        last.map_or(f64::NAN, |r| r.f),
        last.map_or(f64::NAN, |r| r.wolfe_gap),
        t.stats.lp_calls,
        t.cache_hit_rate(),
        t.truncated,
    );
    if let Some(r) = t.online.last() {
        line.push_str(&format!(" regret={:.6e}", r.regret));
    }
    line
}
