//! Correlation-matrix criterion `‖T‖₁ ≤ k − 1/d` and its Hölder moment variant.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::DMatrix;

use crate::linalg::{self, c64, ComplexMatrix};
use crate::state::BipartiteDensity;
use crate::{CriterionVerdict, Error, Result};

/// Margin added to `k − 1/d` before the `‖T‖₁` test fires.
const CM_TOL: f64 = 1e-9;

/// Traceless Hermitian operators with `Tr(P_i P_j) = d δ_ij`.
#[derive(Debug, Clone)]
pub struct OperatorBasis {
    pub d: usize,
    pub ops: Vec<ComplexMatrix>,
}

fn basis_cache() -> &'static RwLock<HashMap<usize, Arc<OperatorBasis>>> {
    static CACHE: OnceLock<RwLock<HashMap<usize, Arc<OperatorBasis>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Generalized Gell-Mann matrices scaled by `√(d/2)`, memoized per `d`.
pub fn gellmann_basis(d: usize) -> Result<Arc<OperatorBasis>> {
    if d < 2 {
        return Err(Error::out_of_range("d", format!("{d} < 2")));
    }
    if let Some(basis) = basis_cache().read().expect("basis cache poisoned").get(&d) {
        return Ok(Arc::clone(basis));
    }
    let basis = Arc::new(build_gellmann(d));
    let mut cache = basis_cache().write().expect("basis cache poisoned");
    Ok(Arc::clone(cache.entry(d).or_insert(basis)))
}

fn build_gellmann(d: usize) -> OperatorBasis {
    let scale = (d as f64 / 2.0).sqrt();
    let mut ops = Vec::with_capacity(d * d - 1);
    for j in 0..d {
        for k in j + 1..d {
            let mut sym = ComplexMatrix::zeros(d, d);
            sym[(j, k)] = c64(scale, 0.0);
            sym[(k, j)] = c64(scale, 0.0);
            ops.push(sym);
            let mut anti = ComplexMatrix::zeros(d, d);
            anti[(j, k)] = c64(0.0, -scale);
            anti[(k, j)] = c64(0.0, scale);
            ops.push(anti);
        }
    }
    for l in 1..d {
        let norm = scale * (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut diag = ComplexMatrix::zeros(d, d);
        for j in 0..l {
            diag[(j, j)] = c64(norm, 0.0);
        }
        diag[(l, l)] = c64(-(l as f64) * norm, 0.0);
        ops.push(diag);
    }
    OperatorBasis { d, ops }
}

/// `T_ij = Tr[ρ (P_i ⊗ P_j)] / d` with lazily cached singular values.
#[derive(Debug, Clone)]
pub struct CorrelationMatrix {
    pub t: DMatrix<f64>,
    singular: OnceLock<Vec<f64>>,
}

impl CorrelationMatrix {
    pub fn new(t: DMatrix<f64>) -> Self {
        Self {
            t,
            singular: OnceLock::new(),
        }
    }

    /// Nonincreasing.
    pub fn singular_values(&self) -> &[f64] {
        self.singular.get_or_init(|| {
            let mut v: Vec<f64> = self.t.singular_values().iter().copied().collect();
            v.sort_by(|a, b| b.total_cmp(a));
            v
        })
    }
}

pub fn correlation_matrix(rho: &BipartiteDensity) -> Result<CorrelationMatrix> {
    let basis = gellmann_basis(rho.d_a())?;
    correlation_matrix_in(rho, &basis)
}

/// Correlation matrix with respect to an arbitrary local basis (used on both sides).
pub fn correlation_matrix_in(
    rho: &BipartiteDensity,
    basis: &OperatorBasis,
) -> Result<CorrelationMatrix> {
    let d = rho.d_a();
    if rho.d_b() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: rho.d_b(),
        });
    }
    if basis.d != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: basis.d,
        });
    }
    let m = rho.matrix();
    let n = basis.ops.len();
    let mut t = DMatrix::zeros(n, n);
    for (i, p) in basis.ops.iter().enumerate() {
        // X = Tr_A[(P ⊗ I) ρ], so that Tr[ρ (P ⊗ Q)] = Tr(X Q)
        let mut x = ComplexMatrix::zeros(d, d);
        for a in 0..d {
            for a2 in 0..d {
                let pa = p[(a2, a)];
                if pa.norm_sqr() == 0.0 {
                    continue;
                }
                for b in 0..d {
                    for b2 in 0..d {
                        x[(b, b2)] += pa * m[(a * d + b, a2 * d + b2)];
                    }
                }
            }
        }
        for (j, q) in basis.ops.iter().enumerate() {
            t[(i, j)] = linalg::trace_product(&x, q).re / d as f64;
        }
    }
    Ok(CorrelationMatrix::new(t))
}

/// `‖T‖_p = (Σ v_i^p)^{1/p}` over singular values.
pub fn schatten_norm(t: &CorrelationMatrix, p: u32) -> Result<f64> {
    if p == 0 {
        return Err(Error::out_of_range("p", "Schatten index must be positive"));
    }
    let sum: f64 = t.singular_values().iter().map(|v| v.powi(p as i32)).sum();
    Ok(sum.powf(1.0 / p as f64))
}

/// Detected iff `‖T‖₁ > k − 1/d`; the witness is `k − 1/d − ‖T‖₁`.
pub fn cm_criterion(rho: &BipartiteDensity, k: usize) -> Result<CriterionVerdict> {
    let t = correlation_matrix(rho)?;
    let bound = k as f64 - 1.0 / rho.d_a() as f64;
    let norm1: f64 = t.singular_values().iter().sum();
    Ok(CriterionVerdict::new(
        norm1 > bound + CM_TOL,
        k,
        None,
        bound - norm1,
    ))
}

/// `‖T‖₂³ / ‖T‖₄²` from `‖T‖₂²` and `‖T‖₄⁴`, with `0/0 = 0`.
pub fn holder_ratio(norm2sq: f64, norm4quad: f64) -> f64 {
    if norm4quad <= 0.0 {
        0.0
    } else {
        norm2sq.max(0.0).powf(1.5) / norm4quad.sqrt()
    }
}

/// Detected iff `‖T‖₂³ / ‖T‖₄² > k − 1/d`; the witness is the signed margin.
pub fn cm_holder_criterion(
    norm2sq: f64,
    norm4quad: f64,
    k: usize,
    d: usize,
) -> Result<CriterionVerdict> {
    if norm2sq < 0.0 || norm4quad < 0.0 {
        return Err(Error::out_of_range(
            "norms",
            "Schatten moments must be nonnegative",
        ));
    }
    let bound = k as f64 - 1.0 / d as f64;
    let ratio = holder_ratio(norm2sq, norm4quad);
    Ok(CriterionVerdict::new(
        ratio > bound + CM_TOL,
        k,
        None,
        bound - ratio,
    ))
}

/// `(‖T‖₁, ‖T‖₂², ‖T‖₄⁴)` of the isotropic state: all `d² − 1` singular
/// values equal `|d²F − 1| / [d(d² − 1)]`.
pub fn isotropic_cm_values(d: usize, fidelity: f64) -> Result<(f64, f64, f64)> {
    if !(0.0..=1.0).contains(&fidelity) {
        return Err(Error::out_of_range(
            "F",
            format!("{fidelity} not in [0, 1]"),
        ));
    }
    let (df, n) = (d as f64, (d * d - 1) as f64);
    let v = (df * df * fidelity - 1.0).abs() / (df * n);
    Ok((n * v, n * v * v, n * v.powi(4)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{maximally_entangled, PureState, SchmidtVector};

    #[test]
    fn pauli_basis() {
        let b = gellmann_basis(2).unwrap();
        assert_eq!(b.ops.len(), 3);
        let x = ComplexMatrix::from_row_slice(
            2,
            2,
            &[c64(0., 0.), c64(1., 0.), c64(1., 0.), c64(0., 0.)],
        );
        let y = ComplexMatrix::from_row_slice(
            2,
            2,
            &[c64(0., 0.), c64(0., -1.), c64(0., 1.), c64(0., 0.)],
        );
        let z = ComplexMatrix::from_row_slice(
            2,
            2,
            &[c64(1., 0.), c64(0., 0.), c64(0., 0.), c64(-1., 0.)],
        );
        assert_eq!(b.ops, vec![x, y, z]);
    }

    #[test]
    fn basis_normalization() {
        for d in 2..=6 {
            let b = gellmann_basis(d).unwrap();
            assert_eq!(b.ops.len(), d * d - 1);
            for (i, p) in b.ops.iter().enumerate() {
                assert!(linalg::trace(p).norm() < 1e-12);
                assert!(linalg::hermiticity_error(p) < 1e-15);
                for (j, q) in b.ops.iter().enumerate() {
                    let g = linalg::trace_product(p, q);
                    let expected = if i == j { d as f64 } else { 0.0 };
                    assert!((g - c64(expected, 0.0)).norm() < 1e-10);
                }
            }
        }
        assert!(gellmann_basis(1).is_err());
        assert!(Arc::ptr_eq(
            &gellmann_basis(3).unwrap(),
            &gellmann_basis(3).unwrap()
        ));
    }

    #[test]
    fn simple_correlation_matrices() {
        let t = correlation_matrix(&BipartiteDensity::maximally_mixed(3, 3)).unwrap();
        assert!(t.t.iter().all(|x| x.abs() < 1e-15));
        assert_eq!(schatten_norm(&t, 1).unwrap(), 0.0);

        let bell = maximally_entangled(2, 2, 2).unwrap().density();
        let t = correlation_matrix(&bell).unwrap();
        for v in t.singular_values() {
            assert!((v - 0.5).abs() < 1e-12);
        }
        assert!((schatten_norm(&t, 1).unwrap() - 1.5).abs() < 1e-12);
        assert!(correlation_matrix(&BipartiteDensity::maximally_mixed(2, 3)).is_err());
    }

    /// `‖T‖₁` through the realignment `R(ρ)_{(ij),(kl)} = ρ_{(ik),(jl)}` with the
    /// identity direction projected out on both sides.
    fn realignment_norm1(rho: &BipartiteDensity) -> f64 {
        let d = rho.d_a();
        let m = rho.matrix();
        let r = ComplexMatrix::from_fn(d * d, d * d, |row, col| {
            let (i, j) = (row / d, row % d);
            let (k, l) = (col / d, col % d);
            m[(i * d + k, j * d + l)]
        });
        let e = linalg::identity(d).reshape_generic(nalgebra::Dyn(d * d), nalgebra::Const::<1>);
        let e = e.unscale((d as f64).sqrt());
        let proj = linalg::identity(d * d) - &e * e.adjoint();
        let t = &proj * r * &proj;
        t.singular_values().iter().sum()
    }

    #[test]
    fn example_state_norm() {
        let lambda = SchmidtVector::new(vec![0.8, 1.0 / 15.0, 1.0 / 15.0, 1.0 / 15.0]).unwrap();
        let psi = PureState::from_schmidt(&lambda, 4, 4).unwrap().density();
        let norm1 = schatten_norm(&correlation_matrix(&psi).unwrap(), 1).unwrap();
        assert!((norm1 - realignment_norm1(&psi)).abs() < 1e-10, "{norm1}");
        assert!(norm1 < 2.75);
        assert!(!cm_criterion(&psi, 3).unwrap().detected);
        assert!(cm_criterion(&psi, 2).unwrap().detected);
    }

    #[test]
    fn holder_conventions() {
        assert!(!cm_holder_criterion(0.0, 0.0, 1, 3).unwrap().detected);
        // flat spectrum saturates Hölder: ratio equals ‖T‖₁
        let (n1, n2, n4) = isotropic_cm_values(3, 0.9).unwrap();
        assert!((holder_ratio(n2, n4) - n1).abs() < 1e-12);
        assert!(cm_holder_criterion(-1.0, 0.0, 1, 2).is_err());
    }

    #[test]
    fn isotropic_closed_forms() {
        assert_eq!(isotropic_cm_values(3, 1.0 / 9.0).unwrap(), (0.0, 0.0, 0.0));
        let (n1, _, _) = isotropic_cm_values(4, 1.0).unwrap();
        assert!((n1 - 3.75).abs() < 1e-12);
        assert!(isotropic_cm_values(4, 1.1).is_err());
    }
}
