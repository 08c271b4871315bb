//! Bipartite states, Schmidt decomposition and partial traces.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::{self, c64, ComplexMatrix, ComplexVector, RANK_TOL};
use crate::{Error, Result};

const TRACE_TOL: f64 = 1e-12;
const NORM_TOL: f64 = 1e-12;
const MIN_EIG_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

/// Density matrix on `H_A ⊗ H_B`.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteDensity {
    d_a: usize,
    d_b: usize,
    rho: ComplexMatrix,
}

impl BipartiteDensity {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(d_a: usize, d_b: usize, rho: ComplexMatrix) -> Result<Self> {
        let state = Self::from_matrix_unchecked(d_a, d_b, rho)?;
        let tr = linalg::trace(&state.rho);
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let min_eig = linalg::hermitian_spectrum(&state.rho)?[0];
        if min_eig < -MIN_EIG_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(state)
    }

    /// Checks shapes and Hermiticity only. Used for constructions that are
    /// valid states by design (mixtures, partial traces of valid states).
    pub(crate) fn from_matrix_unchecked(
        d_a: usize,
        d_b: usize,
        rho: ComplexMatrix,
    ) -> Result<Self> {
        if d_a == 0 || d_b == 0 {
            return Err(Error::out_of_range(
                "d_a, d_b",
                "local dimensions must be positive",
            ));
        }
        let dim = d_a * d_b;
        if rho.nrows() != dim || rho.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: rho.nrows(),
            });
        }
        linalg::check_hermitian(&rho)?;
        Ok(Self { d_a, d_b, rho })
    }

    pub fn maximally_mixed(d_a: usize, d_b: usize) -> Self {
        let dim = d_a * d_b;
        let rho = linalg::identity(dim).scale(1.0 / dim as f64);
        Self { d_a, d_b, rho }
    }

    pub fn d_a(&self) -> usize {
        self.d_a
    }

    pub fn d_b(&self) -> usize {
        self.d_b
    }

    pub fn dim(&self) -> usize {
        self.d_a * self.d_b
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.rho
    }

    /// `ρ_A = Tr_B ρ` for [`Side::A`], `ρ_B = Tr_A ρ` for [`Side::B`].
    pub fn partial_trace(&self, keep: Side) -> ComplexMatrix {
        partial_trace(&self.rho, self.d_a, self.d_b, keep)
    }

    pub fn purity(&self) -> f64 {
        linalg::trace_product(&self.rho, &self.rho).re
    }

    /// Convex combination `(1 − ε) ρ + ε I/D`.
    pub fn depolarize(&self, eps: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::out_of_range("eps", format!("{eps} not in [0, 1]")));
        }
        let dim = self.dim();
        let mixed = self.rho.scale(1.0 - eps) + linalg::identity(dim).scale(eps / dim as f64);
        Ok(Self {
            d_a: self.d_a,
            d_b: self.d_b,
            rho: mixed,
        })
    }

    /// `(U_A ⊗ U_B) ρ (U_A ⊗ U_B)†`.
    pub fn local_unitary(&self, u_a: &ComplexMatrix, u_b: &ComplexMatrix) -> Result<Self> {
        if u_a.nrows() != self.d_a || u_b.nrows() != self.d_b {
            return Err(Error::DimensionMismatch {
                expected: self.d_a,
                found: u_a.nrows(),
            });
        }
        let u = linalg::kron(u_a, u_b);
        let rho = &u * &self.rho * u.adjoint();
        Self::from_matrix_unchecked(self.d_a, self.d_b, rho)
    }
}

/// Partial trace of a `d_a·d_b` square matrix, keeping the given side.
pub fn partial_trace(m: &ComplexMatrix, d_a: usize, d_b: usize, keep: Side) -> ComplexMatrix {
    match keep {
        Side::A => ComplexMatrix::from_fn(d_a, d_a, |i, k| {
            (0..d_b).map(|j| m[(i * d_b + j, k * d_b + j)]).sum()
        }),
        Side::B => ComplexMatrix::from_fn(d_b, d_b, |j, l| {
            (0..d_a).map(|i| m[(i * d_b + j, i * d_b + l)]).sum()
        }),
    }
}

/// Unit vector in `H_A ⊗ H_B`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    d_a: usize,
    d_b: usize,
    amplitudes: ComplexVector,
}

impl PureState {
    pub fn new(d_a: usize, d_b: usize, amplitudes: ComplexVector) -> Result<Self> {
        if d_a == 0 || d_b == 0 {
            return Err(Error::out_of_range(
                "d_a, d_b",
                "local dimensions must be positive",
            ));
        }
        if amplitudes.len() != d_a * d_b {
            return Err(Error::DimensionMismatch {
                expected: d_a * d_b,
                found: amplitudes.len(),
            });
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!(
                "amplitude norm {norm} is not 1"
            )));
        }
        Ok(Self {
            d_a,
            d_b,
            amplitudes,
        })
    }

    /// Rescales nonzero amplitudes to unit norm.
    pub fn normalized(d_a: usize, d_b: usize, amplitudes: ComplexVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Self::new(d_a, d_b, amplitudes.unscale(norm))
    }

    /// `Σ √λ_i |i⟩_A ⊗ |i⟩_B` in the computational bases.
    pub fn from_schmidt(lambda: &SchmidtVector, d_a: usize, d_b: usize) -> Result<Self> {
        let d = d_a.min(d_b);
        if lambda.len() > d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: lambda.len(),
            });
        }
        let mut amps = ComplexVector::zeros(d_a * d_b);
        for (i, &l) in lambda.values().iter().enumerate() {
            amps[i * d_b + i] = c64(l.max(0.0).sqrt(), 0.0);
        }
        Self::normalized(d_a, d_b, amps)
    }

    pub fn d_a(&self) -> usize {
        self.d_a
    }

    pub fn d_b(&self) -> usize {
        self.d_b
    }

    pub fn amplitudes(&self) -> &ComplexVector {
        &self.amplitudes
    }

    /// The `d_a × d_b` coefficient matrix `C_ij = ⟨ij|ψ⟩`.
    pub fn coefficient_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.d_a, self.d_b, |i, j| self.amplitudes[i * self.d_b + j])
    }

    pub fn density(&self) -> BipartiteDensity {
        BipartiteDensity {
            d_a: self.d_a,
            d_b: self.d_b,
            rho: linalg::projector(&self.amplitudes),
        }
    }
}

/// Maximally entangled state `|+_r⟩ = r^{-1/2} Σ_{i<r} |ii⟩`.
pub fn maximally_entangled(r: usize, d_a: usize, d_b: usize) -> Result<PureState> {
    if r == 0 || r > d_a.min(d_b) {
        return Err(Error::out_of_range(
            "r",
            format!("{r} not in 1..={}", d_a.min(d_b)),
        ));
    }
    let mut amps = ComplexVector::zeros(d_a * d_b);
    let a = 1.0 / (r as f64).sqrt();
    for i in 0..r {
        amps[i * d_b + i] = c64(a, 0.0);
    }
    PureState::new(d_a, d_b, amps)
}

/// Nonincreasing probability vector of Schmidt coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SchmidtVector(Vec<f64>);

impl SchmidtVector {
    /// Sorts nonincreasing; requires entries ≥ −1e-14 and unit sum within 1e-12.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidSchmidtVector("empty".into()));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v < -1e-14) {
            return Err(Error::InvalidSchmidtVector(format!(
                "entry {bad} is negative"
            )));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidSchmidtVector(format!("entries sum to {sum}")));
        }
        for v in values.iter_mut() {
            *v = v.max(0.0);
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Self(values))
    }

    /// Normalizes a nonnegative weight vector first.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if sum <= 0.0 || !sum.is_finite() {
            return Err(Error::InvalidSchmidtVector(format!("weights sum to {sum}")));
        }
        Self::new(weights.iter().map(|w| w / sum).collect())
    }

    /// `(1/r, …, 1/r, 0, …)` of length `d`.
    pub fn uniform(r: usize, d: usize) -> Result<Self> {
        if r == 0 || r > d {
            return Err(Error::out_of_range("r", format!("{r} not in 1..={d}")));
        }
        let mut v = vec![0.0; d];
        v[..r].fill(1.0 / r as f64);
        Ok(Self(v))
    }

    /// Zero-pads to length `d`.
    pub fn padded(&self, d: usize) -> Result<Self> {
        if d < self.0.len() {
            return Err(Error::DimensionMismatch {
                expected: self.0.len(),
                found: d,
            });
        }
        let mut v = self.0.clone();
        v.resize(d, 0.0);
        Ok(Self(v))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of coefficients above [`RANK_TOL`].
    pub fn rank(&self) -> usize {
        self.0.iter().filter(|&&l| l > RANK_TOL).count()
    }

    pub fn power_sum(&self, n: u32) -> f64 {
        self.0.iter().map(|l| l.powi(n as i32)).sum()
    }

    /// Distinct nonzero coefficients `ℓ_j` (descending) with multiplicities,
    /// merging values closer than `tol`.
    pub fn distinct_coefficients(&self, tol: f64) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        for &l in self.0.iter().filter(|&&l| l > RANK_TOL) {
            match out.last_mut() {
                Some((value, mult)) if (*value - l).abs() <= tol => {
                    // keep a running mean so the weights still sum to one
                    *value = (*value * *mult as f64 + l) / (*mult + 1) as f64;
                    *mult += 1;
                }
                _ => out.push((l, 1)),
            }
        }
        out
    }
}

impl TryFrom<Vec<f64>> for SchmidtVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<SchmidtVector> for Vec<f64> {
    fn from(v: SchmidtVector) -> Self {
        v.0
    }
}

/// Result of [`schmidt_decompose`]. Column `i` of `basis_a`/`basis_b` is the
/// local vector paired with `lambda[i]`.
#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    pub lambda: SchmidtVector,
    pub basis_a: ComplexMatrix,
    pub basis_b: ComplexMatrix,
}

impl SchmidtDecomposition {
    pub fn schmidt_number(&self) -> usize {
        self.lambda.rank()
    }

    /// Rebuilds `Σ √λ_i |a_i⟩ ⊗ |b_i⟩`.
    pub fn reconstruct(&self) -> ComplexVector {
        let (d_a, d_b) = (self.basis_a.nrows(), self.basis_b.nrows());
        let mut amps = ComplexVector::zeros(d_a * d_b);
        for (i, &l) in self.lambda.values().iter().enumerate() {
            let s = l.sqrt();
            for a in 0..d_a {
                for b in 0..d_b {
                    amps[a * d_b + b] += self.basis_a[(a, i)] * self.basis_b[(b, i)] * s;
                }
            }
        }
        amps
    }
}

/// Schmidt decomposition through the eigendecomposition of `ρ_A = C C†`.
pub fn schmidt_decompose(psi: &PureState) -> Result<SchmidtDecomposition> {
    let (d_a, d_b) = (psi.d_a, psi.d_b);
    let d = d_a.min(d_b);
    let c = psi.coefficient_matrix();
    let rho_a = &c * c.adjoint();
    let (vals, vecs) = linalg::hermitian_eigh(&rho_a)?;

    // eigh sorts ascending; Schmidt order is descending
    let order: Vec<usize> = (0..d_a).rev().collect();
    let basis_a = ComplexMatrix::from_fn(d_a, d_a, |r, col| vecs[(r, order[col])]);
    let lambda_raw: Vec<f64> = order.iter().take(d).map(|&i| vals[i].max(0.0)).collect();
    let total: f64 = lambda_raw.iter().sum();
    let lambda = SchmidtVector::new(lambda_raw.iter().map(|l| l / total).collect())?;

    // |b_i⟩ = (⟨a_i| ⊗ I)|ψ⟩ / √λ_i, i.e. Cᵀ conj(a_i) / √λ_i
    let mut columns: Vec<ComplexVector> = Vec::with_capacity(d_b);
    for (i, &l) in lambda_raw.iter().enumerate() {
        if l <= RANK_TOL {
            break;
        }
        let a_i = basis_a.column(i).map(|z| z.conj());
        let b_i = c.transpose() * a_i;
        columns.push(b_i.unscale(l.sqrt()));
    }
    let basis_b = complete_orthonormal(columns, d_b);
    Ok(SchmidtDecomposition {
        lambda,
        basis_a,
        basis_b,
    })
}

/// Extends orthonormal columns to a unitary by Gram–Schmidt against the
/// computational basis.
fn complete_orthonormal(mut columns: Vec<ComplexVector>, dim: usize) -> ComplexMatrix {
    let mut e = 0;
    while columns.len() < dim && e < dim {
        let mut v = ComplexVector::zeros(dim);
        v[e] = Complex64::new(1.0, 0.0);
        e += 1;
        for _ in 0..2 {
            for u in &columns {
                let overlap = u.dotc(&v);
                v -= u * overlap;
            }
        }
        let n = v.norm();
        if n > 1e-8 {
            columns.push(v.unscale(n));
        }
    }
    ComplexMatrix::from_columns(&columns)
}

/// Product state `σ ⊗ τ`.
pub fn product_state(sigma: &ComplexMatrix, tau: &ComplexMatrix) -> Result<BipartiteDensity> {
    BipartiteDensity::new(sigma.nrows(), tau.nrows(), linalg::kron(sigma, tau))
}
