//! Noise thresholds of `ρ_{ε,r}` for the `(r−1)`-reduction and the
//! correlation-matrix criteria as functions of `d`.

use anyhow::{bail, Result};
use kreduce::correlation::{correlation_matrix, schatten_norm};
use kreduce::ensembles::me_depolarized;
use kreduce::reduction::noise_threshold_rm;
use serde_json::json;

use super::par_indexed;
use crate::config::ExperimentConfig;
use crate::output::{Cell, ExperimentOutput, Table};
use crate::svg::{line_plot, Series};

pub const HEADER: [&str; 6] = [
    "d",
    "r",
    "eps_c_rm",
    "eps_c_cm",
    "trace_norm_t_pure",
    "seed",
];

/// Largest ε with `(1 − ε)‖T_ψ‖₁ ≥ r − 1 − 1/d`, using that `T` is linear
/// in `ρ` and vanishes on `I/d²`.
pub fn cm_threshold(trace_norm_pure: f64, r: usize, d: usize) -> f64 {
    let bound = r as f64 - 1.0 - 1.0 / d as f64;
    (1.0 - bound / trace_norm_pure).max(0.0)
}

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let r = cfg.r.unwrap_or(4);
    let dims = if cfg.dims.is_empty() {
        (r.max(2)..=10).collect()
    } else {
        cfg.dims.clone()
    };
    if let Some(d) = dims.iter().find(|&&d| d < r) {
        bail!("config.dims: d = {d} is below r = {r}");
    }
    let rows = par_indexed(dims.len(), |i| {
        let d = dims[i];
        let t = correlation_matrix(&me_depolarized(r, d, d, 0.0)?)?;
        let norm = schatten_norm(&t, 1)?;
        Ok((
            d,
            noise_threshold_rm(r, d, d)?,
            cm_threshold(norm, r, d),
            norm,
        ))
    })?;
    let mut table = Table::new("threshold_compare", &HEADER);
    for &(d, rm, cm, norm) in &rows {
        table.push(vec![
            Cell::from(d),
            Cell::from(r),
            Cell::from(rm),
            Cell::from(cm),
            Cell::from(norm),
            Cell::from(cfg.seed),
        ]);
    }
    let mut plots = Vec::new();
    if cfg.svg {
        let series = [
            Series {
                label: "RM".into(),
                points: rows.iter().map(|row| (row.0 as f64, row.1)).collect(),
                dashed: false,
            },
            Series {
                label: "CM".into(),
                points: rows.iter().map(|row| (row.0 as f64, row.2)).collect(),
                dashed: true,
            },
        ];
        let title = format!("noise thresholds, r={r}");
        plots.push((
            "threshold_compare.svg".into(),
            line_plot(&title, "d", "eps_c", &series),
        ));
    }
    let rm_dominates = rows.iter().all(|row| row.1 >= row.2);
    Ok(ExperimentOutput {
        tables: vec![table],
        plots,
        audit: None,
        summary: json!({"rm_threshold_dominates": rm_dominates}),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maximally_entangled_cm_threshold() {
        // ‖T‖₁ of |+_d⟩ is d − 1/d, so r = d gives ε_c = 1/(d − 1/d)
        let d = 4;
        let eps = cm_threshold(d as f64 - 0.25, d, d);
        assert!((eps - 1.0 / 3.75).abs() < 1e-15);
        assert_eq!(cm_threshold(1.0, 4, 4), 0.0);
    }
}
