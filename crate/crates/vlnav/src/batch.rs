//! Batch evaluation: runs episodes in parallel, writes one JSONL trajectory
//! per episode plus an aggregate report, and re-scores stored logs.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use vlnav_core::episodes::{Episode, EpisodeSet};
use vlnav_core::metrics::{aggregate, MetricsReport, MetricsSummary};
use vlnav_core::runner::{run_episode, EpisodeReport, EpisodeStatus, RunnerConfig, StepRecord, TrajectoryLog};
use vlnav_core::{VisibilityGraph, WorldMap};

use crate::backend::Backend;

pub const TRAJECTORY_DIR: &str = "trajectories";
pub const HEATMAP_DIR: &str = "heatmaps";
pub const SUMMARY_TXT: &str = "summary.txt";
pub const SUMMARY_JSON: &str = "summary.json";

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub runner: RunnerConfig,
    /// Replaces every episode's success radius when set.
    pub success_radius: Option<f64>,
    pub parallelism: usize,
    pub out_dir: Option<PathBuf>,
    pub dump_heatmaps: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { runner: RunnerConfig::default(), success_radius: None, parallelism: 1, out_dir: None, dump_heatmaps: false }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        ensure!(self.runner.k_waypoints >= 1, "k must be at least 1");
        ensure!(self.runner.max_steps >= 1, "max steps must be at least 1");
        ensure!(self.runner.agent_radius >= 0.0, "agent radius must be non-negative");
        if let Some(r) = self.success_radius {
            ensure!(r > 0.0 && r.is_finite(), "success radius must be positive");
        }
        ensure!(self.parallelism >= 1, "parallelism must be at least 1");
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRow {
    pub episode_id: String,
    pub status: EpisodeStatus,
    pub steps: usize,
    pub metrics: MetricsReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub backend: String,
    /// Means over completed episodes; absent when none completed.
    pub summary: Option<MetricsSummary>,
    pub transport_failures: usize,
    pub episodes: Vec<EpisodeRow>,
}

pub struct BatchOutcome {
    pub logs: Vec<TrajectoryLog>,
    pub report: BatchReport,
}

impl BatchOutcome {
    pub fn failed(&self) -> bool {
        self.report.transport_failures > 0
    }
}

/// Runs every episode with at most `cfg.parallelism` in flight. Output
/// order follows the input order regardless of scheduling.
pub fn run_batch(map: &WorldMap, set: &EpisodeSet, backend: &Backend, cfg: &RunConfig) -> Result<BatchOutcome> {
    cfg.validate()?;
    let mut runner = cfg.runner.clone();
    runner.record_heatmaps |= cfg.dump_heatmaps;
    let graph = VisibilityGraph::new(map, runner.agent_radius);
    let episodes: Vec<Episode> = set
        .episodes
        .iter()
        .cloned()
        .map(|mut ep| {
            if let Some(r) = cfg.success_radius {
                ep.success_radius = r;
            }
            ep
        })
        .collect();

    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.parallelism).build()?;
    let logs: Vec<TrajectoryLog> = pool.install(|| {
        episodes
            .par_iter()
            .map(|ep| {
                let session = backend.for_episode();
                let log = run_episode(map, &graph, ep, &*session, &runner);
                match &log.report.error {
                    Some(e) => log::error!("episode {}: {}", ep.id, e),
                    None => log::info!("episode {}: {} steps, SR {}", ep.id, log.report.steps, log.report.metrics.sr),
                }
                log
            })
            .collect()
    });

    let report = summarize(&format!("{:?}", backend.kind()).to_lowercase(), &logs);
    let outcome = BatchOutcome { logs, report };
    if let Some(dir) = &cfg.out_dir {
        write_outputs(dir, &outcome, cfg.dump_heatmaps)?;
    }
    Ok(outcome)
}

pub fn summarize(backend: &str, logs: &[TrajectoryLog]) -> BatchReport {
    let completed: Vec<MetricsReport> = logs
        .iter()
        .filter(|l| l.report.status == EpisodeStatus::Completed)
        .map(|l| l.report.metrics)
        .collect();
    BatchReport {
        backend: backend.to_string(),
        summary: aggregate(&completed).ok(),
        transport_failures: logs.len() - completed.len(),
        episodes: logs
            .iter()
            .map(|l| EpisodeRow {
                episode_id: l.report.episode_id.clone(),
                status: l.report.status,
                steps: l.report.steps,
                metrics: l.report.metrics,
            })
            .collect(),
    }
}

/// Plain-text table with TL NE nDTW OSR SR SPL columns.
pub fn format_table(report: &BatchReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<24} {:>6} {:>7} {:>7} {:>7} {:>7} {:>7} {:>7}", "episode", "steps", "TL", "NE", "nDTW", "OSR", "SR", "SPL");
    for row in &report.episodes {
        let m = &row.metrics;
        let flag = if row.status == EpisodeStatus::Completed { "" } else { "  (transport error)" };
        let _ = writeln!(
            out,
            "{:<24} {:>6} {:>7.2} {:>7.2} {:>7.2} {:>7.0} {:>7.0} {:>7.2}{}",
            row.episode_id,
            row.steps,
            m.tl,
            m.ne,
            100.0 * m.ndtw,
            100.0 * m.osr,
            100.0 * m.sr,
            100.0 * m.spl,
            flag
        );
    }
    let _ = writeln!(out);
    match &report.summary {
        Some(s) => {
            let _ = writeln!(
                out,
                "{:<24} {:>6} {:>7.2} {:>7.2} {:>7.2} {:>7.2} {:>7.2} {:>7.2}",
                format!("mean ({}, n={})", report.backend, s.episodes),
                "",
                s.tl,
                s.ne,
                s.ndtw,
                s.osr,
                s.sr,
                s.spl
            );
        }
        None => {
            let _ = writeln!(out, "no completed episodes");
        }
    }
    if report.transport_failures > 0 {
        let _ = writeln!(out, "transport failures: {}", report.transport_failures);
    }
    out
}

fn file_stem(id: &str) -> String {
    id.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' { c } else { '_' }).collect()
}

pub fn write_trajectory(path: &Path, log: &TrajectoryLog) -> Result<()> {
    let mut out = std::io::BufWriter::new(fs::File::create(path).with_context(|| format!("creating {}", path.display()))?);
    for step in &log.steps {
        serde_json::to_writer(&mut out, step)?;
        out.write_all(b"\n")?;
    }
    serde_json::to_writer(&mut out, &log.report)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

/// Parses a JSONL trajectory: step records, then the report on the last line.
pub fn read_trajectory(path: &Path) -> Result<TrajectoryLog> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let lines: Vec<String> = BufReader::new(file)
        .lines()
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .filter(|l| !l.trim().is_empty())
        .collect();
    let Some((last, steps)) = lines.split_last() else {
        bail!("{} is empty", path.display());
    };
    let report: EpisodeReport =
        serde_json::from_str(last).with_context(|| format!("{}: last line is not a report", path.display()))?;
    let steps = steps
        .iter()
        .enumerate()
        .map(|(i, l)| {
            serde_json::from_str::<StepRecord>(l).with_context(|| format!("{}: line {}", path.display(), i + 1))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TrajectoryLog { steps, report })
}

fn write_outputs(dir: &Path, outcome: &BatchOutcome, heatmaps: bool) -> Result<()> {
    let traj_dir = dir.join(TRAJECTORY_DIR);
    fs::create_dir_all(&traj_dir).with_context(|| format!("creating {}", traj_dir.display()))?;
    for log in &outcome.logs {
        write_trajectory(&traj_dir.join(format!("{}.jsonl", file_stem(&log.report.episode_id))), log)?;
    }
    if heatmaps {
        let heat_dir = dir.join(HEATMAP_DIR);
        fs::create_dir_all(&heat_dir)?;
        for log in &outcome.logs {
            let maps: Vec<_> = log
                .steps
                .iter()
                .filter_map(|s| s.heatmap.as_ref().map(|h| serde_json::json!({"step": s.step, "pose": s.pose, "heatmap": h})))
                .collect();
            let path = heat_dir.join(format!("{}.json", file_stem(&log.report.episode_id)));
            fs::write(&path, serde_json::to_string_pretty(&maps)? + "\n")?;
        }
    }
    fs::write(dir.join(SUMMARY_TXT), format_table(&outcome.report))?;
    fs::write(dir.join(SUMMARY_JSON), serde_json::to_string_pretty(&outcome.report)? + "\n")?;
    Ok(())
}

/// Lists `.jsonl` files under `path` (or `path` itself), sorted.
pub fn collect_logs(path: &Path) -> Result<Vec<PathBuf>> {
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut dirs = vec![path.to_path_buf()];
    let mut found = Vec::new();
    while let Some(dir) = dirs.pop() {
        for entry in fs::read_dir(&dir).with_context(|| format!("listing {}", dir.display()))? {
            let p = entry?.path();
            if p.is_dir() {
                dirs.push(p);
            } else if p.extension().is_some_and(|e| e == "jsonl") {
                found.push(p);
            }
        }
    }
    found.sort();
    Ok(found)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rescored {
    pub path: PathBuf,
    pub log: TrajectoryLog,
    pub recomputed: MetricsReport,
}

impl Rescored {
    /// Bitwise equality of every stored metric with the recomputed one.
    pub fn matches(&self) -> bool {
        let (a, b) = (&self.log.report.metrics, &self.recomputed);
        [(a.tl, b.tl), (a.ne, b.ne), (a.sr, b.sr), (a.osr, b.osr), (a.spl, b.spl), (a.ndtw, b.ndtw)]
            .iter()
            .all(|(x, y)| x.to_bits() == y.to_bits())
    }
}

pub fn rescore_file(path: &Path) -> Result<Rescored> {
    let log = read_trajectory(path)?;
    let recomputed = log.rescore().with_context(|| format!("scoring {}", path.display()))?;
    Ok(Rescored { path: path.to_path_buf(), log, recomputed })
}
