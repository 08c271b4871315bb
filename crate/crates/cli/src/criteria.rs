//! Evaluates a list of criteria on one state, sharing the expensive pieces
//! (moment sequences, correlation matrix, dense reduction verdicts).

use std::collections::BTreeMap;

use anyhow::Result;
use kreduce::correlation::{cm_criterion, cm_holder_criterion, correlation_matrix, schatten_norm};
use kreduce::moments::{
    moment_criterion_with_slack, reduction_moments, third_order_criterion_with_slack, MomentTuple,
};
use kreduce::reduction::reduction_criterion;
use kreduce::{BipartiteDensity, CriterionVerdict};

use crate::config::Criterion;

/// Verdict of one criterion at one `k`, together with the dense oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub k: usize,
    pub criterion: Criterion,
    pub verdict: CriterionVerdict,
    /// Exact k-reduction verdict on the same state.
    pub dense_detected: bool,
}

impl Evaluation {
    /// A moment-based detection the dense oracle does not confirm.
    pub fn is_false_positive(&self) -> bool {
        self.criterion.is_moment_based() && self.verdict.detected && !self.dense_detected
    }
}

/// All `(k, criterion)` verdicts for `rho`, ordered by `k` then by the
/// position of the criterion in `criteria`.
pub fn evaluate(
    rho: &BipartiteDensity,
    criteria: &[Criterion],
    k_values: &[usize],
    slack: f64,
) -> Result<Vec<Evaluation>> {
    let max_order = criteria
        .iter()
        .filter_map(|c| match c {
            Criterion::Moment(n) => Some(*n),
            _ => None,
        })
        .max();
    let tuple = criteria
        .contains(&Criterion::ThirdOrder)
        .then(|| MomentTuple::exact(rho));
    let holder_norms = if criteria.contains(&Criterion::CmHolder) {
        let t = correlation_matrix(rho)?;
        Some((schatten_norm(&t, 2)?.powi(2), schatten_norm(&t, 4)?.powi(4)))
    } else {
        None
    };
    let d = rho.d_a();
    let mut out = Vec::with_capacity(criteria.len() * k_values.len());
    for &k in k_values {
        let dense = reduction_criterion(rho, k);
        let q = max_order.map(|n| reduction_moments(rho, k, n));
        for &criterion in criteria {
            let verdict = match criterion {
                Criterion::Reduction => dense,
                Criterion::Moment(n) => {
                    moment_criterion_with_slack(q.as_ref().expect("moment order set"), n, slack)?
                }
                Criterion::Cm => cm_criterion(rho, k)?,
                Criterion::CmHolder => {
                    let (n2sq, n4quad) = holder_norms.expect("holder norms computed");
                    cm_holder_criterion(n2sq, n4quad, k, d)?
                }
                Criterion::ThirdOrder => third_order_criterion_with_slack(
                    tuple.as_ref().expect("tuple computed"),
                    rho.d_b(),
                    k,
                    slack,
                ),
            };
            out.push(Evaluation {
                k,
                criterion,
                verdict,
                dense_detected: dense.detected,
            });
        }
    }
    Ok(out)
}

/// Detection and false-positive counts per `(k, criterion)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Tally {
    pub counts: BTreeMap<(usize, String), (usize, usize)>,
}

impl Tally {
    pub fn add(&mut self, evals: &[Evaluation]) {
        for e in evals {
            let entry = self
                .counts
                .entry((e.k, e.criterion.to_string()))
                .or_default();
            entry.0 += usize::from(e.verdict.detected);
            entry.1 += usize::from(e.is_false_positive());
        }
    }

    pub fn detected(&self, k: usize, criterion: Criterion) -> usize {
        self.counts
            .get(&(k, criterion.to_string()))
            .map_or(0, |c| c.0)
    }

    pub fn false_positives(&self) -> usize {
        self.counts.values().map(|c| c.1).sum()
    }
}
