use serde::{Deserialize, Serialize};

/// Outcome of a single certification test.
///
/// `detected == true` certifies `SN(ρ) > k`. `witness` is the quantity the
/// decision was made on: the smallest eigenvalue of the tested operator
/// (dense reduction test), of the diagonally normalized Hankel matrix
/// (moment tests), or the signed bound margin for the correlation-matrix
/// tests. Negative values mean the bound is violated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriterionVerdict {
    pub detected: bool,
    pub k: usize,
    /// Moment order used, when the test is moment based.
    pub order: Option<usize>,
    pub witness: f64,
}

impl CriterionVerdict {
    pub fn new(detected: bool, k: usize, order: Option<usize>, witness: f64) -> Self {
        Self {
            detected,
            k,
            order,
            witness,
        }
    }
}
