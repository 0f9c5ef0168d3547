//! Seed fan-out and artifact writing.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::deep::{train_dqn, train_gan_q};
use crate::error::{Error, Result};
use crate::log::TrainLog;
use crate::par::par_map;
use crate::tabular::{run_tabular, TabularKind};

use super::config::{AgentKind, RunConfig};
use super::output::{line_plot_svg, summarize, write_log_csv, write_summary_csv, Series, SummaryRow};

/// Trains one seed under `config`.
pub fn train_seed(config: &RunConfig, seed: u64) -> Result<TrainLog> {
    let spec = config.env_spec();
    match config.agent {
        AgentKind::Q => Ok(run_tabular(spec, &config.tabular_config(seed), TabularKind::Q)?.log),
        AgentKind::Dq => Ok(run_tabular(spec, &config.tabular_config(seed), TabularKind::Dq)?.log),
        AgentKind::Dqn => Ok(train_dqn(spec, &config.dqn_config(seed))?.log),
        AgentKind::GanDqn => Ok(train_gan_q(spec, &config.gan_config(seed))?.log),
    }
}

#[derive(Debug, Clone)]
pub struct RunArtifacts {
    /// One log per seed, in seed-list order.
    pub logs: Vec<TrainLog>,
    pub summary: Vec<SummaryRow>,
    pub config_hash: String,
    pub wall_clock_secs: f64,
    pub files: Vec<PathBuf>,
}

impl RunArtifacts {
    pub fn diverged_seeds(&self) -> Vec<u64> {
        self.logs.iter().filter(|l| l.diverged.is_some()).map(|l| l.seed).collect()
    }
}

/// Validates, trains every seed in parallel, then writes one CSV per seed,
/// a summary CSV, a metadata file and optionally an SVG curve.
pub fn run(config: &RunConfig) -> Result<RunArtifacts> {
    config.validate()?;
    let mut unique = config.seeds.clone();
    unique.sort_unstable();
    unique.dedup();
    if unique.len() != config.seeds.len() {
        return Err(Error::Config("seed list has duplicates".into()));
    }
    let start = Instant::now();
    let logs = par_map(&config.seeds, |&seed| train_seed(config, seed)).into_iter().collect::<Result<Vec<_>>>()?;
    let wall_clock_secs = start.elapsed().as_secs_f64();
    let refs: Vec<&TrainLog> = logs.iter().collect();
    let summary = summarize(&refs);
    let mut artifacts =
        RunArtifacts { logs, summary, config_hash: config.hash(), wall_clock_secs, files: Vec::new() };
    write_artifacts(config, &mut artifacts)?;
    Ok(artifacts)
}

fn stem(config: &RunConfig) -> String {
    format!("{}-{}", config.env, config.agent)
}

fn write_artifacts(config: &RunConfig, art: &mut RunArtifacts) -> Result<()> {
    let dir = &config.output_dir;
    fs::create_dir_all(dir)?;
    let stem = stem(config);
    for log in &art.logs {
        let path = dir.join(format!("{stem}-seed{}.csv", log.seed));
        write_log_csv(&[log], fs::File::create(&path)?)?;
        art.files.push(path);
    }
    let path = dir.join(format!("{stem}-summary.csv"));
    write_summary_csv(&art.summary, fs::File::create(&path)?)?;
    art.files.push(path);

    let mut meta = format!("config_hash = {}\nwall_clock_secs = {:.3}\n", art.config_hash, art.wall_clock_secs);
    for log in &art.logs {
        if let Some(why) = &log.diverged {
            meta += &format!("diverged seed {} = {why}\n", log.seed);
        }
    }
    meta += "\n# config\n";
    meta += &config.serialize();
    let path = dir.join(format!("{stem}-meta.txt"));
    fs::write(&path, meta)?;
    art.files.push(path);

    if config.plot {
        let path = dir.join(format!("{stem}.svg"));
        write_curve(&path, &stem, &art.summary)?;
        art.files.push(path);
    }
    Ok(())
}

fn write_curve(path: &Path, title: &str, summary: &[SummaryRow]) -> Result<()> {
    let series = Series {
        label: "mean ± std across seeds".into(),
        points: summary.iter().map(|r| (r.episode as f64, r.mean)).collect(),
        band: Some(summary.iter().map(|r| r.std).collect()),
    };
    fs::write(path, line_plot_svg(title, "episode", "reward", &[series]))?;
    Ok(())
}
