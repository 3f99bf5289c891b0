//! Repeated runs over a directory of configurations.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;
use crate::report::Metrics;
use crate::{run, AppError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    /// Population variance.
    pub var: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self {
                mean: 0.0,
                min: 0.0,
                max: 0.0,
                var: 0.0,
            };
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        Self {
            mean,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            var: values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigSummary {
    pub name: String,
    pub runs: usize,
    pub success_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub configs: Vec<ConfigSummary>,
    pub runs: usize,
    /// Fraction of runs that succeeded with a clear certificate.
    pub success_rate: f64,
    pub time: Vec<(String, Summary)>,
    pub len: Vec<(String, Summary)>,
}

fn succeeded(m: &Metrics) -> bool {
    m.status == "success" && m.certificate_clear == Some(true)
}

impl BenchReport {
    pub fn aggregate(per_config: &[(String, Vec<Metrics>)]) -> Self {
        let all: Vec<&Metrics> = per_config.iter().flat_map(|(_, v)| v).collect();
        let rate = |ms: &[&Metrics]| {
            if ms.is_empty() {
                0.0
            } else {
                ms.iter().filter(|m| succeeded(m)).count() as f64 / ms.len() as f64
            }
        };
        let field = |f: fn(&Metrics) -> f64| Summary::of(&all.iter().map(|m| f(m)).collect::<Vec<_>>());
        Self {
            configs: per_config
                .iter()
                .map(|(name, ms)| ConfigSummary {
                    name: name.clone(),
                    runs: ms.len(),
                    success_rate: rate(&ms.iter().collect::<Vec<_>>()),
                })
                .collect(),
            runs: all.len(),
            success_rate: rate(&all),
            time: vec![
                ("path".into(), field(|m| m.time.path)),
                ("r2".into(), field(|m| m.time.r2)),
                ("se2".into(), field(|m| m.time.se2)),
                ("check".into(), field(|m| m.time.check)),
                ("total".into(), field(|m| m.time.total)),
            ],
            len: vec![
                ("r2".into(), field(|m| m.len.r2)),
                ("se2".into(), field(|m| m.len.se2)),
                ("total".into(), field(|m| m.len.total)),
            ],
        }
    }

    pub fn to_text(&self) -> String {
        let mut lines = vec![
            format!("runs = {}", self.runs),
            format!("success_rate = {:.6}", self.success_rate),
        ];
        for (prefix, rows) in [("time", &self.time), ("len", &self.len)] {
            for (name, s) in rows {
                lines.push(format!("{prefix}.{name}.mean = {:.6}", s.mean));
                lines.push(format!("{prefix}.{name}.min = {:.6}", s.min));
                lines.push(format!("{prefix}.{name}.max = {:.6}", s.max));
                lines.push(format!("{prefix}.{name}.var = {:.6}", s.var));
            }
        }
        for c in &self.configs {
            lines.push(format!("config.{}.runs = {}", c.name, c.runs));
            lines.push(format!("config.{}.success_rate = {:.6}", c.name, c.success_rate));
        }
        let mut s = lines.join("\n");
        s.push('\n');
        s
    }
}

fn config_files(dir: &Path) -> Result<Vec<PathBuf>, AppError> {
    let entries = fs::read_dir(dir).map_err(|e| AppError::Input(format!("cannot read {}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .flatten()
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(AppError::Input(format!("no .toml configurations in {}", dir.display())));
    }
    Ok(files)
}

pub fn bench_command(dir: &Path, reps: usize, render: bool, seed: Option<u64>, out: &Path) -> Result<u8, AppError> {
    let configs = config_files(dir)?
        .iter()
        .map(|p| RunConfig::load(p).map_err(AppError::from))
        .collect::<Result<Vec<_>, _>>()?;
    let mut per_config = Vec::with_capacity(configs.len());
    for cfg in configs {
        let name = cfg.source.file_stem().map_or_else(|| "config".into(), |s| s.to_string_lossy().into_owned());
        let base = seed.unwrap_or(cfg.seed);
        let mut runs = Vec::with_capacity(reps);
        for k in 0..reps {
            let c = cfg.clone().with_seed(base + k as u64);
            let run_dir = out.join(&name).join(format!("rep{k}"));
            let (_, m) = run(&c, &run_dir, render || c.render)?;
            runs.push(m);
        }
        per_config.push((name, runs));
    }
    let report = BenchReport::aggregate(&per_config);
    let text = report.to_text();
    crate::write(&out.join("bench.txt"), &text)?;
    let mut json = serde_json::to_string_pretty(&report).expect("bench report serializes");
    json.push('\n');
    crate::write(&out.join("bench.json"), &json)?;
    print!("{text}");
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_of_single_value() {
        let s = Summary::of(&[2.5]);
        assert_eq!((s.mean, s.min, s.max, s.var), (2.5, 2.5, 2.5, 0.0));
    }

    #[test]
    fn summary_matches_hand_computation() {
        let s = Summary::of(&[1.0, 2.0, 3.0, 6.0]);
        assert_eq!(s.mean, 3.0);
        assert_eq!((s.min, s.max), (1.0, 6.0));
        assert!((s.var - 3.5).abs() < 1e-12);
    }
}
