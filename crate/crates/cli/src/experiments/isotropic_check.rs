//! Isotropic states: closed-form correlation norms against the SVD path and
//! the third-order verdicts against `SN = ⌈dF⌉`.

use anyhow::Result;
use kreduce::correlation::{
    cm_holder_criterion, correlation_matrix, isotropic_cm_values, schatten_norm,
};
use kreduce::ensembles::{isotropic_schmidt_number, isotropic_state};
use kreduce::moments::{third_order_criterion_with_slack, MomentTuple};
use serde_json::json;

use super::{par_indexed, unit_grid};
use crate::config::ExperimentConfig;
use crate::output::{Cell, ExperimentOutput, Table};

pub const HEADER: [&str; 15] = [
    "d",
    "fidelity",
    "schmidt_number",
    "k",
    "t1_closed",
    "t1_numeric",
    "t2sq_closed",
    "t2sq_numeric",
    "t4quad_closed",
    "t4quad_numeric",
    "max_norm_error",
    "third_order_detected",
    "expected_detected",
    "cm_holder_detected",
    "seed",
];

struct Point {
    d: usize,
    f: f64,
    sn: usize,
    closed: (f64, f64, f64),
    numeric: (f64, f64, f64),
    verdicts: Vec<(usize, bool, bool)>,
}

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let dims = if cfg.dims.is_empty() {
        (2..=8).collect()
    } else {
        cfg.dims.clone()
    };
    let fidelities = if cfg.fidelities.is_empty() {
        unit_grid(20)
    } else {
        cfg.fidelities.clone()
    };
    let grid: Vec<(usize, f64)> = dims
        .iter()
        .flat_map(|&d| fidelities.iter().map(move |&f| (d, f)))
        .collect();

    let points = par_indexed(grid.len(), |i| {
        let (d, f) = grid[i];
        let rho = isotropic_state(d, f)?;
        let t = correlation_matrix(&rho)?;
        let numeric = (
            schatten_norm(&t, 1)?,
            schatten_norm(&t, 2)?.powi(2),
            schatten_norm(&t, 4)?.powi(4),
        );
        let closed = isotropic_cm_values(d, f)?;
        let tuple = MomentTuple::exact(&rho);
        let verdicts = (1..=d)
            .map(|k| {
                let third = third_order_criterion_with_slack(&tuple, d, k, cfg.slack).detected;
                let holder = cm_holder_criterion(closed.1, closed.2, k, d)?.detected;
                Ok((k, third, holder))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Point {
            d,
            f,
            sn: isotropic_schmidt_number(d, f),
            closed,
            numeric,
            verdicts,
        })
    })?;

    let mut table = Table::new("isotropic_check", &HEADER);
    let mut max_error: f64 = 0.0;
    let mut mismatches = 0;
    for p in &points {
        let error = (p.closed.0 - p.numeric.0)
            .abs()
            .max((p.closed.1 - p.numeric.1).abs())
            .max((p.closed.2 - p.numeric.2).abs());
        max_error = max_error.max(error);
        for &(k, third, holder) in &p.verdicts {
            let expected = k < p.sn;
            mismatches += usize::from(third != expected);
            table.push(vec![
                Cell::from(p.d),
                Cell::from(p.f),
                Cell::from(p.sn),
                Cell::from(k),
                Cell::from(p.closed.0),
                Cell::from(p.numeric.0),
                Cell::from(p.closed.1),
                Cell::from(p.numeric.1),
                Cell::from(p.closed.2),
                Cell::from(p.numeric.2),
                Cell::from(error),
                Cell::from(third),
                Cell::from(expected),
                Cell::from(holder),
                Cell::from(cfg.seed),
            ]);
        }
    }
    Ok(ExperimentOutput {
        tables: vec![table],
        plots: Vec::new(),
        audit: None,
        summary: json!({"max_norm_error": max_error, "third_order_mismatches": mismatches}),
    })
}
