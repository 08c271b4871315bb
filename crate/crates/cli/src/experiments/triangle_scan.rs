//! Two-qutrit pure states `√x₁|00⟩ + √x₂|11⟩ + √(1−x₁−x₂)|22⟩` on a grid
//! over the interior of the simplex, tested with `B_N[ψ, k]`.

use anyhow::Result;
use kreduce::moments::{moment_criterion, pure_reduction_moments};
use kreduce::reduction::reduction_criterion;
use kreduce::{PureState, SchmidtVector};
use serde_json::json;

use super::par_indexed;
use crate::config::ExperimentConfig;
use crate::output::{Audit, Cell, ExperimentOutput, Table};
use crate::svg::heatmap;

pub const CELL_HEADER: [&str; 11] = [
    "i",
    "j",
    "x1",
    "x2",
    "x3",
    "distinct",
    "order",
    "detected",
    "witness",
    "dense_detected",
    "seed",
];
pub const SUMMARY_HEADER: [&str; 7] = [
    "order",
    "k",
    "cells",
    "detected",
    "fraction",
    "distinct_cells_undetected",
    "seed",
];

/// Coefficients closer than this count as equal.
const DISTINCT_TOL: f64 = 1e-10;
const D: usize = 3;

/// Cells `(i, j)` with centers `((i + ½)/n, (j + ½)/n)` strictly inside the simplex.
pub fn interior_cells(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| i + j + 1 < n)
        .collect()
}

struct CellResult {
    i: usize,
    j: usize,
    x: [f64; 3],
    distinct: bool,
    dense: bool,
    verdicts: Vec<(usize, bool, f64)>,
}

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let n = cfg.grid.unwrap_or(60);
    let k = cfg.k_values.first().copied().unwrap_or(2);
    let orders = if cfg.orders.is_empty() {
        vec![3, 4, 5, 6, 7, 11]
    } else {
        cfg.orders.clone()
    };
    let max_order = *orders.iter().max().expect("orders nonempty");
    let cells = interior_cells(n);

    let results = par_indexed(cells.len(), |c| {
        let (i, j) = cells[c];
        let x1 = (i as f64 + 0.5) / n as f64;
        let x2 = (j as f64 + 0.5) / n as f64;
        let x3 = (n - i - j - 1) as f64 / n as f64;
        let lambda = SchmidtVector::new(vec![x1, x2, x3])?;
        let distinct = lambda.distinct_coefficients(DISTINCT_TOL).len() == D;
        let dense =
            reduction_criterion(&PureState::from_schmidt(&lambda, D, D)?.density(), k).detected;
        let q = pure_reduction_moments(&lambda, k, D, max_order)?;
        let verdicts = orders
            .iter()
            .map(|&order| {
                let v = moment_criterion(&q, order)?;
                Ok((order, v.detected, v.witness))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CellResult {
            i,
            j,
            x: [x1, x2, x3],
            distinct,
            dense,
            verdicts,
        })
    })?;

    let mut cell_table = Table::new("triangle_cells", &CELL_HEADER);
    let mut audit = Audit::default();
    for cell in &results {
        for &(order, detected, witness) in &cell.verdicts {
            audit.checked += 1;
            audit.false_positives += usize::from(detected && !cell.dense);
            cell_table.push(vec![
                Cell::from(cell.i),
                Cell::from(cell.j),
                Cell::from(cell.x[0]),
                Cell::from(cell.x[1]),
                Cell::from(cell.x[2]),
                Cell::from(cell.distinct),
                Cell::from(order),
                Cell::from(detected),
                Cell::from(witness),
                Cell::from(cell.dense),
                Cell::from(cfg.seed),
            ]);
        }
    }

    let mut summary_table = Table::new("triangle_summary", &SUMMARY_HEADER);
    let mut fractions = Vec::new();
    for (slot, &order) in orders.iter().enumerate() {
        let detected = results.iter().filter(|c| c.verdicts[slot].1).count();
        let missed_distinct = results
            .iter()
            .filter(|c| c.distinct && !c.verdicts[slot].1)
            .count();
        let fraction = detected as f64 / results.len() as f64;
        fractions.push(json!({"order": order, "fraction": fraction, "distinct_cells_undetected": missed_distinct}));
        summary_table.push(vec![
            Cell::from(order),
            Cell::from(k),
            Cell::from(results.len()),
            Cell::from(detected),
            Cell::from(fraction),
            Cell::from(missed_distinct),
            Cell::from(cfg.seed),
        ]);
    }

    let mut plots = Vec::new();
    if cfg.svg {
        // color each cell by the smallest order that detects it
        let mut sorted = orders.clone();
        sorted.sort_unstable();
        let first_detect: Vec<(usize, usize, Option<f64>)> = results
            .iter()
            .map(|c| {
                let first = sorted
                    .iter()
                    .find(|&&o| c.verdicts.iter().any(|v| v.0 == o && v.1))
                    .map(|&o| o as f64);
                (c.i, c.j, Some(first.unwrap_or(0.0)))
            })
            .collect();
        let mut levels: Vec<(f64, String)> = sorted
            .iter()
            .map(|&o| (o as f64, format!("N={o}")))
            .collect();
        levels.push((0.0, "none".into()));
        let title = format!("first detecting order, k={k}, {n}x{n} grid");
        plots.push((
            "triangle_scan.svg".into(),
            heatmap(&title, "x1", "x2", n, &first_detect, &levels),
        ));
    }

    Ok(ExperimentOutput {
        tables: vec![cell_table, summary_table],
        plots,
        audit: Some(audit),
        summary: json!({"cells": results.len(), "k": k, "fractions": fractions}),
    })
}
