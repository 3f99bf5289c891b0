//! `svplan`: run whole-body SE(2) plans from TOML documents.

mod bench;
mod config;
mod render;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use svplan::pipeline::{plan, PlanError, PlanResult, PlanStatus};
use svplan::shape::RobotKernel;
use thiserror::Error;

use crate::config::{ConfigError, RunConfig};
use crate::report::Metrics;

const EXIT_PARSE: u8 = 2;
const EXIT_PLAN_FAILED: u8 = 3;
const EXIT_INTERNAL: u8 = 4;

/// Robot outlines drawn in the swept rendering.
const SWEPT_OUTLINES: usize = 60;

#[derive(Debug, Parser)]
#[command(name = "svplan", version, about = "Whole-body SE(2) motion planner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Plan one configuration and write metrics, trajectory and renderings.
    Plan {
        config: PathBuf,
        #[arg(long)]
        render: bool,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every `*.toml` in a directory repeatedly and aggregate the metrics.
    Bench {
        dir: PathBuf,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        reps: u64,
        #[arg(long)]
        render: bool,
        /// First seed; repetition `k` uses `seed + k`. Defaults to each
        /// configuration's own seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "bench-out")]
        out: PathBuf,
    },
}

#[derive(Debug, Error)]
pub enum AppError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Internal(String),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl AppError {
    fn exit_code(&self) -> u8 {
        match self {
            AppError::Config(_) | AppError::Input(_) => EXIT_PARSE,
            AppError::Internal(_) | AppError::Write { .. } => EXIT_INTERNAL,
        }
    }
}

fn write(path: &Path, contents: &str) -> Result<(), AppError> {
    fs::write(path, contents).map_err(|source| AppError::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn remove_stale(dir: &Path, keep_svg: bool) -> Result<(), AppError> {
    let Ok(entries) = fs::read_dir(dir) else {
        return Ok(());
    };
    for e in entries.flatten() {
        let name = e.file_name().to_string_lossy().into_owned();
        let ours_svg = name.ends_with(".svg")
            && (matches!(name.as_str(), "candidates.svg" | "trajectory.svg" | "swept.svg") || name.starts_with("sequence_"));
        if (ours_svg && !keep_svg) || name == "trajectory.txt" {
            fs::remove_file(e.path()).map_err(|source| AppError::Write { path: e.path(), source })?;
        }
    }
    Ok(())
}

/// Plans `cfg` and writes its artifacts into `out`.
pub fn run(cfg: &RunConfig, out: &Path, render: bool) -> Result<(PlanResult, Metrics), AppError> {
    let result = plan(&cfg.grid, &cfg.shape, cfg.start, cfg.goal, &cfg.plan).map_err(|e| match e {
        PlanError::Config(_) | PlanError::Shape(_) => AppError::Input(e.to_string()),
        PlanError::Map(_) => AppError::Internal(e.to_string()),
    })?;
    fs::create_dir_all(out).map_err(|source| AppError::Write {
        path: out.to_path_buf(),
        source,
    })?;
    remove_stale(out, false)?;
    let metrics = Metrics::from_result(&result, cfg.seed);
    write(&out.join("metrics.txt"), &metrics.to_text())?;
    write(&out.join("metrics.json"), &metrics.to_json())?;
    if let Some(p) = &result.plan {
        write(&out.join("trajectory.txt"), &p.trajectory.to_text())?;
    }
    if render {
        write(
            &out.join("candidates.svg"),
            &render::candidates_svg(&cfg.grid, &cfg.shape, &cfg.start, &cfg.goal, &result.paths),
        )?;
        let kernel = RobotKernel::build(&cfg.shape, cfg.plan.n_orientations, cfg.grid.resolution())
            .map_err(|e| AppError::Input(e.to_string()))?;
        for seq in &result.sequences {
            write(
                &out.join(format!("sequence_{}.svg", seq.path_id)),
                &render::sequence_svg(&cfg.grid, &cfg.shape, seq, |k| kernel.yaw_of(k)),
            )?;
        }
        if let Some(p) = &result.plan {
            write(
                &out.join("trajectory.svg"),
                &render::trajectory_svg(&cfg.grid, &cfg.shape, &cfg.start, &cfg.goal, p),
            )?;
            write(
                &out.join("swept.svg"),
                &render::swept_svg(&cfg.grid, &cfg.shape, &p.trajectory, SWEPT_OUTLINES),
            )?;
        }
    }
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    Ok((result, metrics))
}

fn plan_command(config: &Path, render: bool, seed: Option<u64>, out: Option<PathBuf>) -> Result<u8, AppError> {
    let mut cfg = RunConfig::load(config)?;
    if let Some(s) = seed {
        cfg = cfg.with_seed(s);
    }
    let out = out.unwrap_or_else(|| cfg.out_dir.clone());
    let (result, metrics) = run(&cfg, &out, render || cfg.render)?;
    print!("{}", metrics.to_text());
    if result.status == PlanStatus::Success {
        Ok(0)
    } else {
        eprintln!(
            "planning failed ({}): {}",
            result.status.as_str(),
            result.failure.as_deref().unwrap_or("no reason recorded")
        );
        Ok(EXIT_PLAN_FAILED)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = std::panic::catch_unwind(|| match cli.command {
        Command::Plan {
            config,
            render,
            seed,
            out,
        } => plan_command(&config, render, seed, out),
        Command::Bench {
            dir,
            reps,
            render,
            seed,
            out,
        } => bench::bench_command(&dir, reps as usize, render, seed, &out),
    });
    match outcome {
        Ok(Ok(code)) => ExitCode::from(code),
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
        Err(_) => ExitCode::from(EXIT_INTERNAL),
    }
}
