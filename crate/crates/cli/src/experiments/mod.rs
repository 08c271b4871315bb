//! One module per experiment kind. Each returns its tables, plots and audit
//! without touching the filesystem.

use anyhow::Result;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::output::ExperimentOutput;

pub mod certify;
pub mod detection_ratio;
pub mod isotropic_check;
pub mod negativity_curve;
pub mod shadow_benchmark;
pub mod threshold_compare;
pub mod triangle_scan;

pub fn dispatch(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    match config.experiment {
        ExperimentKind::NegativityCurve => negativity_curve::run(config),
        ExperimentKind::ThresholdCompare => threshold_compare::run(config),
        ExperimentKind::DetectionRatio => detection_ratio::run(config),
        ExperimentKind::TriangleScan => triangle_scan::run(config),
        ExperimentKind::IsotropicCheck => isotropic_check::run(config),
        ExperimentKind::ShadowBenchmark => shadow_benchmark::run(config),
        ExperimentKind::Certify => certify::run(config),
    }
}

/// Parallel map over `0..n`; results come back in index order.
pub(crate) fn par_indexed<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// `0, 1/steps, …, 1`.
pub(crate) fn unit_grid(steps: usize) -> Vec<f64> {
    (0..=steps).map(|i| i as f64 / steps as f64).collect()
}
