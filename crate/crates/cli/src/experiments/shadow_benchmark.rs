//! Repeated classical-shadow estimation of `(p₂, p₃, a₂, a₃, t₂)` and the
//! permutation-test purity estimate.

use anyhow::Result;
use kreduce::ensembles::{haar_vector, EnsembleSpec, RandomStream};
use kreduce::linalg;
use kreduce::moments::{third_order_criterion_with_slack, MomentTuple};
use kreduce::shadows::{
    collect_shadows, estimate_moment_tuple_from, p2_variance_bound, permutation_test_estimate,
    MomentTupleEstimate,
};
use kreduce::Side;
use serde_json::json;

use super::par_indexed;
use crate::config::{ExperimentConfig, ShadowParams};
use crate::output::{Cell, ExperimentOutput, Table};

pub const REP_HEADER: [&str; 13] = [
    "rep",
    "p2",
    "p2_se",
    "p3",
    "p3_se",
    "a2",
    "a2_se",
    "a3",
    "a3_se",
    "t2",
    "t2_se",
    "certified_sn",
    "seed",
];
pub const SUMMARY_HEADER: [&str; 9] = [
    "quantity",
    "exact",
    "mean",
    "pooled_se",
    "z_score",
    "empirical_var",
    "var_bound",
    "repetitions",
    "seed",
];
pub const PERMUTATION_HEADER: [&str; 11] = [
    "dim",
    "state",
    "shots",
    "repetitions",
    "exact",
    "mean",
    "std_dev",
    "max_abs_error",
    "error_bound",
    "shots_for_target_error",
    "seed",
];

/// Absolute error (one standard deviation) for `shots_for_target_error`.
pub const PERMUTATION_TARGET_ERROR: f64 = 0.01;

/// Stream index of the benchmarked state; repetitions use `1 + rep`.
const STATE_STREAM: u64 = 0;
/// Permutation-test streams start here, offset by `dim · 2³²`.
const PERMUTATION_STREAM: u64 = 1 << 40;

fn quantities(t: &MomentTuple) -> [(&'static str, f64); 5] {
    [
        ("p2", t.p2),
        ("p3", t.p3),
        ("a2", t.a2),
        ("a3", t.a3),
        ("t2", t.t2),
    ]
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn sample_variance(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() - 1) as f64
}

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let default_spec = EnsembleSpec::Isotropic {
        d: 4,
        fidelity: 0.9,
    };
    let spec = cfg.ensemble.as_ref().unwrap_or(&default_spec);
    let params = cfg.shadows.clone().unwrap_or_default();
    let ShadowParams {
        m,
        l,
        repetitions,
        shots,
        triple_budget,
    } = params;
    let rho = spec.sample(RandomStream::new(cfg.seed, STATE_STREAM))?;
    let (d_a, d_b) = (rho.d_a(), rho.d_b());
    let rho_a = rho.partial_trace(Side::A);
    let exact = MomentTuple::exact(&rho);

    let estimates: Vec<MomentTupleEstimate> = par_indexed(repetitions, |rep| {
        let mut rng = RandomStream::new(cfg.seed, 1 + rep as u64).rng();
        let global = collect_shadows(rho.matrix(), m, &mut rng)?;
        let local = collect_shadows(&rho_a, l, &mut rng)?;
        Ok(estimate_moment_tuple_from(
            &global,
            &local,
            d_a,
            d_b,
            triple_budget,
            &mut rng,
        )?)
    })?;

    let mut reps = Table::new("shadow_repetitions", &REP_HEADER);
    for (rep, est) in estimates.iter().enumerate() {
        let certified = (1..d_a.min(d_b))
            .take_while(|&k| {
                third_order_criterion_with_slack(&est.value, d_b, k, cfg.slack).detected
            })
            .last()
            .map_or(1, |k| k + 1);
        let mut row = vec![Cell::from(rep)];
        for ((_, v), (_, se)) in quantities(&est.value)
            .into_iter()
            .zip(quantities(&est.std_error))
        {
            row.push(Cell::from(v));
            row.push(Cell::from(se));
        }
        row.push(Cell::from(certified));
        row.push(Cell::from(cfg.seed));
        reps.push(row);
    }

    let mut summary = Table::new("shadow_summary", &SUMMARY_HEADER);
    let mut summary_json = Vec::new();
    for (slot, (name, exact_value)) in quantities(&exact).into_iter().enumerate() {
        let values: Vec<f64> = estimates
            .iter()
            .map(|e| quantities(&e.value)[slot].1)
            .collect();
        let ses: Vec<f64> = estimates
            .iter()
            .map(|e| quantities(&e.std_error)[slot].1)
            .collect();
        let pooled = ses.iter().map(|s| s * s).sum::<f64>().sqrt() / repetitions as f64;
        let avg = mean(&values);
        let z = if pooled > 0.0 {
            (avg - exact_value) / pooled
        } else {
            0.0
        };
        let var = sample_variance(&values);
        let bound = if name == "p2" {
            Cell::from(p2_variance_bound(exact.p2, exact.p3, d_a * d_b, m)?)
        } else {
            Cell::from("")
        };
        summary_json.push(json!({"quantity": name, "exact": exact_value, "mean": avg, "pooled_se": pooled, "z": z, "empirical_var": var, "var_bound": bound.as_f64()}));
        summary.push(vec![
            Cell::from(name),
            Cell::from(exact_value),
            Cell::from(avg),
            Cell::from(pooled),
            Cell::from(z),
            Cell::from(var),
            bound,
            Cell::from(repetitions),
            Cell::from(cfg.seed),
        ]);
    }

    let perm_dims = if cfg.dims.is_empty() {
        vec![4, 16]
    } else {
        cfg.dims.clone()
    };
    let mut permutation = Table::new("permutation_test", &PERMUTATION_HEADER);
    for &dim in &perm_dims {
        let base = PERMUTATION_STREAM + ((dim as u64) << 32);
        let psi = linalg::projector(&haar_vector(
            dim,
            &mut RandomStream::new(cfg.seed, base).rng(),
        ));
        let half_mixed = (&psi + linalg::identity(dim) * linalg::c64(1.0 / dim as f64, 0.0))
            * linalg::c64(0.5, 0.0);
        for (label, offset, state) in [("pure", 0u64, psi), ("half-mixed", 1 << 31, half_mixed)] {
            let exact_p2 = linalg::trace_product(&state, &state).re;
            let values = par_indexed(repetitions, |rep| {
                let mut rng = RandomStream::new(cfg.seed, base + offset + 1 + rep as u64).rng();
                Ok(
                    permutation_test_estimate(&[state.clone(), state.clone()], shots, &mut rng)?
                        .value,
                )
            })?;
            let spread = sample_variance(&values).sqrt();
            let per_shot = spread * (shots as f64).sqrt();
            permutation.push(vec![
                Cell::from(dim),
                Cell::from(label),
                Cell::from(shots),
                Cell::from(repetitions),
                Cell::from(exact_p2),
                Cell::from(mean(&values)),
                Cell::from(spread),
                Cell::from(
                    values
                        .iter()
                        .map(|v| (v - exact_p2).abs())
                        .fold(0.0, f64::max),
                ),
                Cell::from(5.0 / (shots as f64).sqrt()),
                Cell::from((per_shot / PERMUTATION_TARGET_ERROR).powi(2).ceil()),
                Cell::from(cfg.seed),
            ]);
        }
    }

    Ok(ExperimentOutput {
        tables: vec![reps, summary, permutation],
        plots: Vec::new(),
        audit: None,
        summary: json!({"dims": [d_a, d_b], "m": m, "l": l, "repetitions": repetitions, "estimators": summary_json}),
    })
}
