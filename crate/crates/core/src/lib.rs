//! Certification of the Schmidt number (entanglement dimensionality) of
//! bipartite states through the k-reduction map and its moments.
//!
//! Composite indices follow `i * d_b + j` for `|i⟩_A ⊗ |j⟩_B` throughout.

pub mod correlation;
pub mod ensembles;
mod error;
pub mod linalg;
pub mod moments;
pub mod reduction;
pub mod shadows;
pub mod state;
mod verdict;

pub use error::{Error, Result};
pub use linalg::ComplexMatrix;
pub use state::{BipartiteDensity, PureState, SchmidtVector, Side};
pub use verdict::CriterionVerdict;
