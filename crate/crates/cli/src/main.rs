use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, ValueEnum};

use attitude_rta::barriers::ConstraintId;
use attitude_rta::harness::calibrate::{
    calibrate_from, CALIBRATION_EPISODES, CALIBRATION_SEED, SEARCH_START,
};
use attitude_rta::harness::{run_campaign, run_episode, InitialState};
use attitude_rta::io::{self, Config};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// One episode: trajectory CSV and plot data.
    Episode,
    /// Monte-Carlo campaign: campaign JSON.
    Campaign,
    /// Search for a tuning that passes the calibration episodes.
    Calibrate,
    /// Validate the config and run a 10-step smoke episode.
    Check,
}

/// Safety-filtered spacecraft attitude simulation.
#[derive(Debug, Parser)]
#[command(name = "attitude-rta", version)]
struct Cli {
    /// JSON config file; defaults apply to omitted keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "episode")]
    mode: Mode,
    /// Campaign (or calibration) root seed; seed of a sampled episode start.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of campaign (or calibration) episodes.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    /// Disable the safety filter.
    #[arg(long)]
    no_rta: bool,
    /// Comma-separated slacked constraints, or `none`.
    #[arg(long, value_name = "CONSTRAINT-LIST")]
    slack: Option<String>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn parse_slack(list: &str) -> Result<Vec<ConstraintId>> {
    if list.trim().eq_ignore_ascii_case("none") || list.trim().is_empty() {
        return Ok(Vec::new());
    }
    list.split(',')
        .map(|s| s.parse::<ConstraintId>().map_err(Into::into))
        .collect()
}

fn load(cli: &Cli) -> Result<Config> {
    let mut cfg = match &cli.config {
        Some(path) => io::parse_config(path)?,
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.campaign.seed = seed;
        if let InitialState::Sampled { seed: s, .. } = &mut cfg.episode.initial_state {
            *s = seed;
        }
    }
    if let Some(n) = cli.n {
        cfg.campaign.n = n;
    }
    if let Some(w) = cli.workers {
        cfg.campaign.workers = w;
    }
    if cli.no_rta {
        cfg.episode.rta_enabled = false;
        cfg.campaign.episode.rta_enabled = false;
    }
    if let Some(list) = &cli.slack {
        let slack = parse_slack(list)?;
        cfg.episode.filter.slack = slack.clone();
        cfg.campaign.episode.filter.slack = slack;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))
}

fn episode(cfg: &Config, out: &Path) -> Result<bool> {
    out_dir(out)?;
    let result = run_episode(&cfg.episode, &cfg.spacecraft)?;
    io::write_trajectory_csv(&result, &out.join("trajectory.csv"))?;
    io::emit_plot_data(&result, &cfg.spacecraft, &out.join("plot"))?;
    let violated: Vec<&str> = result.violated.iter().map(|c| c.name()).collect();
    println!(
        "episode: {} steps, passed = {}, violated = [{}], intervention rate = {:.3}",
        result.trajectory.len(),
        result.passed,
        violated.join(", "),
        result.intervention_rate
    );
    if let Some(e) = &result.error {
        println!("integration error: {e}");
    }
    Ok(true)
}

fn campaign(cfg: &Config, out: &Path) -> Result<bool> {
    out_dir(out)?;
    let summary = run_campaign(&cfg.campaign, &cfg.spacecraft)?;
    io::write_campaign_json(&summary, &out.join("campaign.json"))?;
    println!(
        "campaign: {}/{} passed, success rate {:.4}",
        summary.n_passed, summary.n_episodes, summary.success_rate
    );
    Ok(true)
}

fn calibrate(cfg: &Config, cli: &Cli, out: &Path) -> Result<bool> {
    out_dir(out)?;
    let seed = cli.seed.unwrap_or(CALIBRATION_SEED);
    let n = cli.n.unwrap_or(CALIBRATION_EPISODES);
    let report = calibrate_from(&SEARCH_START, &cfg.spacecraft, &cfg.campaign, seed, n)?;
    io::write_tuning(&report.tuning, &out.join("tuning.json"))?;
    println!(
        "calibration: {}/{} failures after {} evaluations",
        report.failures, report.episodes, report.evaluations
    );
    Ok(true)
}

fn check(cfg: &Config) -> Result<bool> {
    let mut smoke = cfg.episode.clone();
    smoke.duration = 10.0 * smoke.dt;
    let result = run_episode(&smoke, &cfg.spacecraft)?;
    if let Some(e) = &result.error {
        eprintln!("smoke episode failed: {e}");
        return Ok(false);
    }
    if !result.passed {
        let failing: Vec<&str> = result.failing().map(|c| c.name()).collect();
        eprintln!("smoke episode violated: {}", failing.join(", "));
        return Ok(false);
    }
    println!("config ok; 10-step smoke episode passed");
    Ok(true)
}

fn run(cli: &Cli) -> Result<bool> {
    let cfg = load(cli)?;
    match cli.mode {
        Mode::Episode => episode(&cfg, &cli.out),
        Mode::Campaign => campaign(&cfg, &cli.out),
        Mode::Calibrate => calibrate(&cfg, cli, &cli.out),
        Mode::Check => check(&cfg),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("RTA_LOG_LEVEL", "warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
