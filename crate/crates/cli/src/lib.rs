//! Experiment runner for the `kreduce` library: configuration, sample-parallel
//! execution with ordered fan-in, and CSV/JSON/SVG reports.

pub mod config;
pub mod criteria;
pub mod experiments;
pub mod output;
pub mod svg;

use std::path::PathBuf;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};

use config::ExperimentConfig;
use output::{ExperimentOutput, FileEntry, Manifest};

pub struct Report {
    pub output: ExperimentOutput,
    pub manifest: Manifest,
    pub files: Vec<PathBuf>,
}

fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    builder.build().context("building thread pool")
}

/// Runs the experiment without writing anything.
pub fn execute(config: &ExperimentConfig) -> Result<(ExperimentOutput, usize)> {
    config.validate()?;
    let pool = thread_pool(config.threads)?;
    let output = pool.install(|| experiments::dispatch(config))?;
    Ok((output, pool.current_num_threads()))
}

/// Runs the experiment and writes its tables, plots and manifest to `out_dir`.
pub fn run(config: &ExperimentConfig) -> Result<Report> {
    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    let clock = Instant::now();
    let (output, threads) = execute(config)?;
    let manifest = Manifest {
        experiment: config.experiment.name(),
        version: env!("CARGO_PKG_VERSION"),
        // the library shares the workspace version
        library_version: env!("CARGO_PKG_VERSION"),
        seed: config.seed,
        threads,
        started_unix_s: started,
        wall_time_s: clock.elapsed().as_secs_f64(),
        config: config.clone(),
        files: output
            .tables
            .iter()
            .map(|t| FileEntry {
                name: format!("{}.csv", t.name),
                rows: t.rows.len(),
            })
            .collect(),
        audit: output.audit.clone(),
        summary: output.summary.clone(),
    };
    let files = output::write_report(&config.out_dir, &output, &manifest)?;
    Ok(Report {
        output,
        manifest,
        files,
    })
}
