//! Schmidt-number certification and lower bounds on a given state, or on samples of an ensemble.

use anyhow::{bail, Result};
use kreduce::ensembles::RandomStream;
use kreduce::moments::{best_lower_bound, certify_sn_ge};
use kreduce::reduction::reduction_criterion;
use kreduce::{BipartiteDensity, PureState, SchmidtVector};
use serde_json::json;

use super::par_indexed;
use crate::config::{ExperimentConfig, SchmidtStateSpec};
use crate::output::{Audit, Cell, ExperimentOutput, Table};

pub const HEADER: [&str; 9] = [
    "sample",
    "target_sn",
    "map_k",
    "certified",
    "order",
    "witness",
    "dense_detected",
    "best_lower_bound",
    "seed",
];

/// `√(4/5)|00⟩ + √(1/15)(|11⟩ + |22⟩ + |33⟩)` with `d = 4`.
pub fn example_state() -> SchmidtStateSpec {
    SchmidtStateSpec {
        coefficients: vec![4.0 / 5.0, 1.0 / 15.0, 1.0 / 15.0, 1.0 / 15.0],
        d_a: 4,
        d_b: 4,
    }
}

pub fn schmidt_state(spec: &SchmidtStateSpec) -> Result<BipartiteDensity> {
    let lambda = SchmidtVector::from_weights(&spec.coefficients)?;
    Ok(PureState::from_schmidt(&lambda, spec.d_a, spec.d_b)?.density())
}

struct Certified {
    rows: Vec<(usize, bool, Option<usize>, f64, bool)>,
    best: usize,
}

fn certify_state(rho: &BipartiteDensity, n_max: usize, r_max: usize) -> Result<Certified> {
    let rows = (2..=r_max)
        .map(|target| {
            let v = certify_sn_ge(rho, target, n_max)?;
            Ok((
                target,
                v.detected,
                v.order,
                v.witness,
                reduction_criterion(rho, target - 1).detected,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Certified {
        rows,
        best: best_lower_bound(rho, n_max, r_max)?,
    })
}

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let n_max = cfg.n_max.unwrap_or(7);
    let states: Vec<BipartiteDensity> = match (&cfg.state, &cfg.ensemble) {
        (Some(state), _) => vec![schmidt_state(state)?],
        (None, Some(spec)) => par_indexed(cfg.samples, |i| {
            Ok(spec.sample(RandomStream::new(cfg.seed, i as u64))?)
        })?,
        (None, None) => vec![schmidt_state(&example_state())?],
    };
    let d = states[0].d_a().min(states[0].d_b());
    let r_max = cfg.r_max.unwrap_or(d);
    if r_max > d {
        bail!("config.r_max: {r_max} exceeds min(d_a, d_b) = {d}");
    }
    let results = par_indexed(states.len(), |i| certify_state(&states[i], n_max, r_max))?;

    let mut table = Table::new("certify", &HEADER);
    let mut audit = Audit::default();
    for (sample, res) in results.iter().enumerate() {
        for &(target, certified, order, witness, dense) in &res.rows {
            audit.checked += 1;
            audit.false_positives += usize::from(certified && !dense);
            table.push(vec![
                Cell::from(sample),
                Cell::from(target),
                Cell::from(target - 1),
                Cell::from(certified),
                order.map_or(Cell::from(""), Cell::from),
                Cell::from(witness),
                Cell::from(dense),
                Cell::from(res.best),
                Cell::from(cfg.seed),
            ]);
        }
    }
    let bounds: Vec<usize> = results.iter().map(|r| r.best).collect();
    Ok(ExperimentOutput {
        tables: vec![table],
        plots: Vec::new(),
        audit: Some(audit),
        summary: json!({"n_max": n_max, "r_max": r_max, "best_lower_bounds": bounds}),
    })
}
