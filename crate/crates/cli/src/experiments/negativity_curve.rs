//! `N_k(ρ_{ε,r})` against ε: dense eigensolve next to the closed form.

use anyhow::Result;
use kreduce::ensembles::me_depolarized;
use kreduce::reduction::{depolarized_negativity, depolarized_threshold, reduction_negativity};
use kreduce::SchmidtVector;
use serde_json::json;

use super::{par_indexed, unit_grid};
use crate::config::ExperimentConfig;
use crate::output::{Cell, ExperimentOutput, Table};
use crate::svg::{line_plot, Series};

pub const HEADER: [&str; 8] = [
    "r",
    "k",
    "eps",
    "negativity_dense",
    "negativity_closed_form",
    "abs_error",
    "eps_star",
    "seed",
];

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let r = cfg.r.unwrap_or(4);
    let d_a = cfg.d_a.unwrap_or(r);
    let d_b = cfg.d_b.unwrap_or(d_a);
    let k_values = if cfg.k_values.is_empty() {
        (1..r.max(2)).collect()
    } else {
        cfg.k_values.clone()
    };
    let eps_values = if cfg.eps_values.is_empty() {
        unit_grid(cfg.grid.unwrap_or(40))
    } else {
        cfg.eps_values.clone()
    };
    let lambda = SchmidtVector::uniform(r, d_a)?;

    let rows = par_indexed(eps_values.len(), |i| {
        let eps = eps_values[i];
        let rho = me_depolarized(r, d_a, d_b, eps)?;
        k_values
            .iter()
            .map(|&k| {
                let dense = reduction_negativity(&rho, k).negativity;
                let closed = depolarized_negativity(&lambda, eps, k, d_a, d_b)?;
                Ok((k, eps, dense, closed))
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut table = Table::new("negativity_curve", &HEADER);
    let mut max_error: f64 = 0.0;
    for &(k, eps, dense, closed) in rows.iter().flatten() {
        max_error = max_error.max((dense - closed).abs());
        table.push(vec![
            Cell::from(r),
            Cell::from(k),
            Cell::from(eps),
            Cell::from(dense),
            Cell::from(closed),
            Cell::from((dense - closed).abs()),
            Cell::from(depolarized_threshold(&lambda, k, d_a, d_b)),
            Cell::from(cfg.seed),
        ]);
    }

    let mut plots = Vec::new();
    if cfg.svg {
        let series: Vec<Series> = k_values
            .iter()
            .map(|&k| Series {
                label: format!("k={k}"),
                points: rows
                    .iter()
                    .flatten()
                    .filter(|row| row.0 == k)
                    .map(|row| (row.1, row.2))
                    .collect(),
                dashed: false,
            })
            .collect();
        let title = format!("k-reduction negativity, r={r}, d_A={d_a}, d_B={d_b}");
        plots.push((
            "negativity_curve.svg".into(),
            line_plot(&title, "eps", "N_k", &series),
        ));
    }
    let thresholds: Vec<_> = k_values
        .iter()
        .map(|&k| json!({"k": k, "eps_star": depolarized_threshold(&lambda, k, d_a, d_b)}))
        .collect();
    Ok(ExperimentOutput {
        tables: vec![table],
        plots,
        audit: None,
        summary: json!({"max_abs_error": max_error, "thresholds": thresholds}),
    })
}
