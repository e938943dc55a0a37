use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use vlnav::backend::{Backend, BackendConfig, BackendKind};
use vlnav::batch::{collect_logs, format_table, rescore_file, run_batch, summarize, RunConfig};
use vlnav::episode_file::{load_episodes, save_episodes};
use vlnav::mapfile::{load_map, resolve_map, DEMO_MAP};
use vlnav_core::episodes::{generate_synthetic, SyntheticConfig};
use vlnav_core::runner::RunnerConfig;
use vlnav_core::{WorldMap, AGENT_RADIUS};

#[derive(Parser)]
#[command(name = "vlnav", version, about = "Language-guided navigation evaluation harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run episodes with a navigator backend and score them.
    Run(RunArgs),
    /// Re-score stored trajectory logs.
    Score(ScoreArgs),
    /// Write a synthetic episode file.
    Gen(GenArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Map JSON file; defaults to the episode file's map_ref, or the demo map.
    #[arg(long)]
    map: Option<PathBuf>,
    /// Episode JSON file.
    #[arg(long, conflicts_with = "synthetic")]
    episodes: Option<PathBuf>,
    /// Generate N synthetic episodes instead of reading a file.
    #[arg(long, value_name = "N")]
    synthetic: Option<usize>,
    /// Seed for synthetic episodes.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = BackendKind::Oracle)]
    backend: BackendKind,
    /// Chat-completions server, e.g. http://localhost:11434/v1.
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long, default_value = "llama3.1")]
    model: String,
    #[arg(long, default_value_t = 0.0)]
    temperature: f64,
    /// Per-request timeout in seconds.
    #[arg(long, default_value_t = 120.0)]
    timeout: f64,
    /// Seed for the random backend.
    #[arg(long, default_value_t = 0)]
    backend_seed: u64,
    /// JSON array of canned responses for the scripted backend.
    #[arg(long)]
    script: Option<PathBuf>,
    /// Candidate waypoints per step.
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = 20)]
    max_steps: usize,
    /// Success radius in meters; overrides the episodes' own value.
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long, default_value_t = 1)]
    parallel: usize,
    #[arg(long, default_value = "runs")]
    out: PathBuf,
    /// Also write per-step waypoint heatmaps as JSON.
    #[arg(long)]
    dump_heatmaps: bool,
    /// Compare raw positions in nDTW instead of 0.25 m resampled paths.
    #[arg(long)]
    ndtw_raw: bool,
}

#[derive(Args)]
struct ScoreArgs {
    /// Trajectory files or directories containing them.
    #[arg(required = true)]
    paths: Vec<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    /// Map JSON file; the demo map when omitted.
    #[arg(long)]
    map: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    n: usize,
    #[arg(long, default_value = "episodes.json")]
    out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // clap would exit 2 on bad arguments, which is reserved for transport failures
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Score(args) => score(args),
        Command::Gen(args) => gen(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn episode_map(explicit: Option<&Path>, map_ref: &str, episodes_path: &Path) -> Result<WorldMap> {
    match explicit {
        Some(path) => load_map(path),
        None => resolve_map(map_ref, episodes_path.parent()),
    }
}

fn run(args: RunArgs) -> Result<ExitCode> {
    let (map, set) = match (&args.episodes, args.synthetic) {
        (Some(path), None) => {
            let raw = vlnav::episode_file::read_episodes(path)?;
            let map = episode_map(args.map.as_deref(), &raw.map_ref, path)?;
            (map.clone(), load_episodes(path, &map, AGENT_RADIUS)?)
        }
        (None, Some(n)) => {
            let (map, map_ref) = match &args.map {
                Some(path) => (load_map(path)?, path.display().to_string()),
                None => (vlnav_core::demo::demo_map(), DEMO_MAP.to_string()),
            };
            let cfg = SyntheticConfig { map_ref, ..SyntheticConfig::default() };
            let set = generate_synthetic(&map, args.seed, n, &cfg)?;
            (map, set)
        }
        _ => bail!("give exactly one of --episodes FILE or --synthetic N"),
    };

    let backend_cfg = BackendConfig {
        kind: args.backend,
        endpoint: args.endpoint.clone(),
        model: args.model.clone(),
        temperature: args.temperature,
        timeout: args.timeout,
        seed: args.backend_seed,
    };
    let script = match &args.script {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Some(serde_json::from_str::<Vec<String>>(&text).context("script must be a JSON array of strings")?)
        }
        None => None,
    };
    let backend = Backend::from_config(&backend_cfg, script)?;

    let cfg = RunConfig {
        runner: RunnerConfig {
            k_waypoints: args.k,
            max_steps: args.max_steps,
            resample_spacing: if args.ndtw_raw { None } else { RunnerConfig::default().resample_spacing },
            ..RunnerConfig::default()
        },
        success_radius: args.radius,
        parallelism: args.parallel,
        out_dir: Some(args.out.clone()),
        dump_heatmaps: args.dump_heatmaps,
    };
    let outcome = run_batch(&map, &set, &backend, &cfg)?;
    print!("{}", format_table(&outcome.report));
    println!("logs written to {}", args.out.display());
    Ok(if outcome.failed() { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn score(args: ScoreArgs) -> Result<ExitCode> {
    let mut files = Vec::new();
    for p in &args.paths {
        files.extend(collect_logs(p)?);
    }
    if files.is_empty() {
        bail!("no .jsonl trajectory logs found");
    }
    let mut logs = Vec::new();
    let mut mismatches = 0;
    for path in &files {
        let r = rescore_file(path)?;
        if !r.matches() {
            mismatches += 1;
            eprintln!("{}: stored {:?} but recomputed {:?}", path.display(), r.log.report.metrics, r.recomputed);
        }
        let mut log = r.log;
        log.report.metrics = r.recomputed;
        logs.push(log);
    }
    print!("{}", format_table(&summarize("rescored", &logs)));
    if mismatches > 0 {
        eprintln!("{mismatches} of {} logs disagree with their stored metrics", files.len());
        return Ok(ExitCode::from(3));
    }
    println!("{} logs re-scored; all stored metrics reproduced exactly", files.len());
    Ok(ExitCode::SUCCESS)
}

fn gen(args: GenArgs) -> Result<ExitCode> {
    let (map, map_ref) = match &args.map {
        Some(path) => (load_map(path)?, path.display().to_string()),
        None => (vlnav_core::demo::demo_map(), DEMO_MAP.to_string()),
    };
    let cfg = SyntheticConfig { map_ref, ..SyntheticConfig::default() };
    let set = generate_synthetic(&map, args.seed, args.n, &cfg)?;
    save_episodes(&set, &args.out)?;
    println!("wrote {} episodes to {}", set.episodes.len(), args.out.display());
    Ok(ExitCode::SUCCESS)
}
