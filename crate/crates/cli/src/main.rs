#![allow(clippy::neg_cmp_op_on_partial_ord)] // NaN-rejecting range checks

mod cache;
mod config;
mod experiments;

use std::path::PathBuf;
use std::process::ExitCode;

use backscatter::Error;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use cache::Cache;
use config::{Experiment, ExperimentConfig};
use experiments::{Outputs, Status};

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_VERDICT: u8 = 4;

#[derive(Parser)]
#[command(name = "backscatter", version, about = "Inverse backscattering experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses all cores.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Seed for randomized batteries (overrides `seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Scattered field and far-field pattern for one incidence.
    Forward,
    /// Backscattering data and the Born approximation q_B.
    Born,
    /// Cubic Born term by singular quadrature against the resolvent route.
    Q3Verify,
    /// Regularity gain of Q₃(q) over q.
    Theorem1,
    /// Regularity gain of q − q_B over q.
    Theorem2,
    /// ε-ladder slopes of the Born series.
    Scaling,
    /// Geometric identity and calibration battery.
    Lemmas,
    /// Inspect or maintain the result cache.
    Cache {
        #[arg(value_enum, default_value_t = CacheAction::Stats)]
        action: CacheAction,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CacheAction {
    Stats,
    Verify,
    Clear,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Format(_) | Error::Io(_) => EXIT_CONFIG,
        _ => EXIT_NUMERICAL,
    }
}

fn load(cli: &Cli, experiment: Experiment) -> backscatter::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
            ExperimentConfig::parse(&text, experiment)?
        }
        None => ExperimentConfig::defaults(experiment),
    };
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cache_command(cli: &Cli, action: CacheAction) -> backscatter::Result<()> {
    let dir = match &cli.config {
        Some(_) => load(cli, Experiment::Born)?.cache_dir,
        None => ExperimentConfig::defaults(Experiment::Born).cache_dir,
    };
    let cache = Cache::open(&dir)?;
    match action {
        CacheAction::Stats => {
            let (n, bytes) = cache.stats()?;
            println!("{}: {n} entries, {bytes} bytes", dir.display());
        }
        CacheAction::Verify => {
            let (n, removed) = cache.verify()?;
            println!("{}: checked {n} entries, removed {removed} corrupted", dir.display());
        }
        CacheAction::Clear => println!("{}: removed {} entries", dir.display(), cache.clear()?),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    backscatter::parallel::set_threads(cli.threads);
    let experiment = match cli.command {
        Command::Forward => Experiment::Forward,
        Command::Born => Experiment::Born,
        Command::Q3Verify => Experiment::Q3Verify,
        Command::Theorem1 => Experiment::Theorem1,
        Command::Theorem2 => Experiment::Theorem2,
        Command::Scaling => Experiment::Scaling,
        Command::Lemmas => Experiment::Lemmas,
        Command::Cache { action } => {
            return match cache_command(&cli, action) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(exit_code(&e))
                }
            };
        }
    };
    let cfg = match load(&cli, experiment) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let out = match Outputs::new(&cfg.out, &cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let marker = cfg.out.join("PARTIAL");
    let _ = std::fs::write(&marker, "run in progress or failed; artifacts in this directory may be incomplete\n");
    match experiments::run(&cfg, &out) {
        Ok(status) => {
            let _ = std::fs::remove_file(&marker);
            match status {
                Status::Success => ExitCode::SUCCESS,
                Status::VerdictFail => ExitCode::from(EXIT_VERDICT),
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            let code = exit_code(&e);
            let kind = format!("{e:?}").split(['(', ' ', '{']).next().unwrap_or("Error").to_string();
            let _ = out.json("error.json", json!({"experiment": experiment.name(), "kind": kind, "message": e.to_string(), "exit_code": code}));
            ExitCode::from(code)
        }
    }
}
