use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use kreduce::ensembles::EnsembleSpec;
use kreduce_cli::config::{Criterion, ExperimentConfig, ExperimentKind};

#[derive(Parser)]
#[command(
    name = "kreduce",
    version,
    about = "Schmidt-number certification experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// JSON experiment config; flags below override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Relative slack for decisions on estimated moments.
    #[arg(long, global = true)]
    slack: Option<f64>,
    /// Ensemble as JSON, e.g. '{"kind":"induced","d_a":8,"d_b":8,"ancilla":2}'.
    #[arg(long, global = true)]
    ensemble: Option<String>,
    /// Comma-separated criteria: reduction, moment:N, cm, cm-holder, third-order.
    #[arg(long, global = true, value_delimiter = ',')]
    criteria: Vec<Criterion>,
    /// Use the d = 16 scale where the preset has one.
    #[arg(long, global = true)]
    full_scale: bool,
    #[arg(long, global = true)]
    no_svg: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Certify Schmidt numbers of a state (default: the four-level example state).
    Certify,
    /// Detection ratios of an ensemble.
    Ratio,
    /// Two-qutrit simplex scan of the moment criteria.
    Triangle,
    /// Isotropic-state closed forms and third-order verdicts.
    Isotropic,
    /// k-reduction negativity of depolarized maximally entangled states.
    Negativity,
    /// Classical-shadow estimator statistics and the permutation test.
    ShadowBench,
    /// Reduction versus correlation-matrix noise thresholds.
    Thresholds,
    /// Run whatever experiment the config file names.
    Run,
}

impl Command {
    fn kind(self) -> Option<ExperimentKind> {
        Some(match self {
            Self::Certify => ExperimentKind::Certify,
            Self::Ratio => ExperimentKind::DetectionRatio,
            Self::Triangle => ExperimentKind::TriangleScan,
            Self::Isotropic => ExperimentKind::IsotropicCheck,
            Self::Negativity => ExperimentKind::NegativityCurve,
            Self::ShadowBench => ExperimentKind::ShadowBenchmark,
            Self::Thresholds => ExperimentKind::ThresholdCompare,
            Self::Run => return None,
        })
    }
}

/// Desk-scale defaults per experiment when no config file is given.
fn preset(kind: ExperimentKind, full_scale: bool) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(kind);
    c.out_dir = PathBuf::from("out").join(kind.name());
    if kind == ExperimentKind::DetectionRatio {
        if full_scale {
            c.ensemble = Some(EnsembleSpec::Induced {
                d_a: 16,
                d_b: 16,
                ancilla: 2,
            });
            c.criteria = vec![Criterion::Reduction, Criterion::Cm];
        } else {
            c.ensemble = Some(EnsembleSpec::FixedSnPure {
                r: 6,
                d_a: 8,
                d_b: 8,
            });
            c.criteria = std::iter::once(Criterion::Reduction)
                .chain((3..=9).map(Criterion::Moment))
                .collect();
        }
    }
    c
}

fn build_config(command: Command, common: &Common) -> Result<ExperimentConfig> {
    let mut config = match (&common.config, command.kind()) {
        (Some(path), kind) => {
            let c = ExperimentConfig::load(path)?;
            if let Some(kind) = kind {
                if c.experiment != kind {
                    bail!(
                        "config.experiment: file names {}, subcommand runs {}",
                        c.experiment.name(),
                        kind.name()
                    );
                }
            }
            c
        }
        (None, Some(kind)) => preset(kind, common.full_scale),
        (None, None) => bail!("`run` needs --config"),
    };
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(samples) = common.samples {
        config.samples = samples;
    }
    if let Some(dir) = &common.out_dir {
        config.out_dir = dir.clone();
    }
    if let Some(threads) = common.threads {
        config.threads = Some(threads);
    }
    if let Some(slack) = common.slack {
        config.slack = slack;
    }
    if let Some(json) = &common.ensemble {
        let de = &mut serde_json::Deserializer::from_str(json);
        config.ensemble = Some(
            serde_path_to_error::deserialize(de)
                .map_err(|e| anyhow::anyhow!("--ensemble.{}: {}", e.path(), e.inner()))?,
        );
    }
    if !common.criteria.is_empty() {
        config.criteria = common.criteria.clone();
    }
    if common.no_svg {
        config.svg = false;
    }
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result =
        build_config(cli.command, &cli.common).and_then(|config| kreduce_cli::run(&config));
    match result {
        Ok(report) => {
            for path in &report.files {
                println!("{}", path.display());
            }
            if let Some(audit) = &report.manifest.audit {
                println!(
                    "audit: {} moment verdicts checked, {} false positives",
                    audit.checked, audit.false_positives
                );
            }
            println!(
                "{}",
                serde_json::to_string_pretty(&report.manifest.summary).unwrap_or_default()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
