//! Fraction of an ensemble each criterion certifies as `SN > k`.

use anyhow::Result;
use kreduce::ensembles::{EnsembleSpec, RandomStream};
use serde::Serialize;
use serde_json::json;

use super::par_indexed;
use crate::config::{Criterion, ExperimentConfig};
use crate::criteria::{evaluate, Tally};
use crate::output::{Audit, Cell, ExperimentOutput, Table};
use crate::svg::{line_plot, Series};

pub const HEADER: [&str; 10] = [
    "ensemble",
    "k",
    "target_sn",
    "criterion",
    "detected",
    "samples",
    "ratio",
    "false_positives",
    "slack",
    "seed",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionRatioRow {
    pub ensemble: String,
    pub k: usize,
    pub criterion: Criterion,
    pub detected: usize,
    pub samples: usize,
    pub ratio: f64,
    pub false_positives: usize,
    pub seed: u64,
}

/// Compact `kind(key=value;…)` label for an ensemble.
pub fn ensemble_label(spec: &EnsembleSpec) -> String {
    let value = serde_json::to_value(spec).expect("ensemble serializes");
    let map = value.as_object().expect("tagged enum");
    let kind = map["kind"].as_str().unwrap_or_default();
    let params: Vec<String> = map
        .iter()
        .filter(|(key, _)| key.as_str() != "kind")
        .map(|(key, v)| format!("{key}={v}"))
        .collect();
    format!("{kind}({})", params.join(";"))
}

/// Ratios for every `(k, criterion)` plus the tally they came from.
pub fn detection_ratio(
    ensemble: &EnsembleSpec,
    criteria: &[Criterion],
    k_values: &[usize],
    samples: usize,
    seed: u64,
    slack: f64,
) -> Result<(Vec<DetectionRatioRow>, Tally)> {
    ensemble.validate()?;
    let per_sample = par_indexed(samples, |i| {
        let rho = ensemble.sample(RandomStream::new(seed, i as u64))?;
        evaluate(&rho, criteria, k_values, slack)
    })?;
    let mut tally = Tally::default();
    for evals in &per_sample {
        tally.add(evals);
    }
    let label = ensemble_label(ensemble);
    let mut rows = Vec::new();
    for &k in k_values {
        for &criterion in criteria {
            let (detected, false_positives) = tally.counts[&(k, criterion.to_string())];
            rows.push(DetectionRatioRow {
                ensemble: label.clone(),
                k,
                criterion,
                detected,
                samples,
                ratio: detected as f64 / samples as f64,
                false_positives,
                seed,
            });
        }
    }
    Ok((rows, tally))
}

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let ensemble = cfg.ensemble()?;
    let (d_a, d_b) = ensemble.dims();
    let k_values = cfg.k_values_for(d_a, d_b);
    let criteria = if cfg.criteria.is_empty() {
        vec![Criterion::Reduction]
    } else {
        cfg.criteria.clone()
    };
    let (rows, tally) = detection_ratio(
        ensemble,
        &criteria,
        &k_values,
        cfg.samples,
        cfg.seed,
        cfg.slack,
    )?;

    let mut table = Table::new("detection_ratio", &HEADER);
    for row in &rows {
        table.push(vec![
            Cell::from(row.ensemble.clone()),
            Cell::from(row.k),
            Cell::from(row.k + 1),
            Cell::from(row.criterion.to_string()),
            Cell::from(row.detected),
            Cell::from(row.samples),
            Cell::from(row.ratio),
            Cell::from(row.false_positives),
            Cell::from(cfg.slack),
            Cell::from(row.seed),
        ]);
    }
    let moment_criteria = criteria.iter().filter(|c| c.is_moment_based()).count();
    let audit = Audit {
        checked: moment_criteria * k_values.len() * cfg.samples,
        false_positives: tally.false_positives(),
    };
    let mut plots = Vec::new();
    if cfg.svg {
        let series: Vec<Series> = criteria
            .iter()
            .map(|&c| Series {
                label: c.to_string(),
                points: rows
                    .iter()
                    .filter(|r| r.criterion == c)
                    .map(|r| (r.k as f64, r.ratio))
                    .collect(),
                dashed: matches!(c, Criterion::Cm | Criterion::CmHolder),
            })
            .collect();
        let title = format!("detection ratio, {}", ensemble_label(ensemble));
        plots.push((
            "detection_ratio.svg".into(),
            line_plot(&title, "k", "ratio", &series),
        ));
    }
    Ok(ExperimentOutput {
        tables: vec![table],
        plots,
        audit: Some(audit),
        summary: json!({"rows": rows}),
    })
}
