//! Dense complex linear algebra used by every other module.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

/// Relative tolerance used when counting nonzero eigenvalues / Schmidt rank.
pub const RANK_TOL: f64 = 1e-10;
/// Default relative tolerance of [`is_psd`].
pub const PSD_TOL: f64 = 1e-9;
/// Relative tolerance on `‖M − M†‖_max` before a matrix is rejected.
pub const HERMITIAN_TOL: f64 = 1e-10;

pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn trace(m: &ComplexMatrix) -> Complex64 {
    m.diagonal().sum()
}

/// `Tr(AB)` in O(n²).
pub fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Complex64 {
    debug_assert_eq!(a.ncols(), b.nrows());
    debug_assert_eq!(a.nrows(), b.ncols());
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// `|v⟩⟨v|`
pub fn projector(v: &ComplexVector) -> ComplexMatrix {
    v * v.adjoint()
}

pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Induced ∞-norm (largest absolute row sum).
pub fn inf_norm(m: &ComplexMatrix) -> f64 {
    m.row_iter()
        .map(|row| row.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn inf_norm_real(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Largest entrywise deviation `|M_ij − conj(M_ji)|`.
pub fn hermiticity_error(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn check_hermitian(m: &ComplexMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    let deviation = hermiticity_error(m);
    if deviation > HERMITIAN_TOL * max_abs(m).max(1.0) {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(())
}

fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Full eigenvalue multiset of a Hermitian matrix, sorted nondecreasing.
pub fn hermitian_spectrum(m: &ComplexMatrix) -> Result<Vec<f64>> {
    check_hermitian(m)?;
    let mut eigs: Vec<f64> = hermitian_part(m)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    eigs.sort_by(f64::total_cmp);
    Ok(eigs)
}

/// Eigenvalues (nondecreasing) with the matching unit eigenvectors as columns.
pub fn hermitian_eigh(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    check_hermitian(m)?;
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_fn(m.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    Ok((values, vectors))
}

/// Eigenvalues of a real symmetric matrix, sorted nondecreasing.
pub fn symmetric_spectrum(m: &DMatrix<f64>) -> Vec<f64> {
    let sym = (m + m.transpose()).scale(0.5);
    let mut eigs: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    eigs.sort_by(f64::total_cmp);
    eigs
}

/// `σ_min(M) ≥ −tol · max(1, ‖M‖_∞)`.
pub fn is_psd(m: &ComplexMatrix, tol: f64) -> Result<bool> {
    let eigs = hermitian_spectrum(m)?;
    Ok(eigs[0] >= -tol * inf_norm(m).max(1.0))
}

/// Number of clusters among the nonzero entries of `values`, where sorted
/// neighbours closer than `tol` share a cluster and `|v| ≤ tol` counts as zero.
pub fn cluster_count(values: &[f64], tol: f64) -> usize {
    let mut nonzero: Vec<f64> = values.iter().copied().filter(|v| v.abs() > tol).collect();
    nonzero.sort_by(f64::total_cmp);
    let mut count = 0;
    let mut last: Option<f64> = None;
    for v in nonzero {
        match last {
            Some(prev) if v - prev <= tol => {}
            _ => count += 1,
        }
        last = Some(v);
    }
    count
}

/// Real symmetric matrix promoted to complex storage.
pub fn to_complex(m: &DMatrix<f64>) -> ComplexMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(values: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&DVector::from_iterator(
            values.len(),
            values.iter().map(|&v| c64(v, 0.0)),
        ))
    }

    #[test]
    fn spectrum_of_identity_and_diagonal() {
        assert_eq!(hermitian_spectrum(&identity(3)).unwrap(), vec![1.0; 3]);
        let eigs = hermitian_spectrum(&diag(&[2.0, -1.0])).unwrap();
        assert_eq!(eigs, vec![-1.0, 2.0]);
    }

    #[test]
    fn spectrum_of_omega_for_bell_coefficients() {
        // Ω₁((½,½)) = [[0, −½], [−½, 0]]
        let m = to_complex(&DMatrix::from_row_slice(2, 2, &[0.0, -0.5, -0.5, 0.0]));
        let eigs = hermitian_spectrum(&m).unwrap();
        assert!((eigs[0] + 0.5).abs() < 1e-14);
        assert!((eigs[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::from_row_slice(
            2,
            2,
            &[c64(1.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0)],
        );
        assert!(matches!(
            hermitian_spectrum(&m),
            Err(Error::NotHermitian { .. })
        ));
        assert!(is_psd(&m, PSD_TOL).is_err());
    }

    #[test]
    fn psd_checks() {
        assert!(is_psd(&identity(4), PSD_TOL).unwrap());
        assert!(!is_psd(&diag(&[1.0, -0.5]), PSD_TOL).unwrap());
        assert!(is_psd(&diag(&[1.0, -1e-12]), PSD_TOL).unwrap());
    }

    #[test]
    fn spectrum_sums_to_trace() {
        let m = ComplexMatrix::from_fn(5, 5, |i, j| {
            let (a, b) = (i.min(j) as f64, i.max(j) as f64);
            let im = if i < j {
                0.3 * b
            } else if i > j {
                -0.3 * b
            } else {
                0.0
            };
            c64(1.0 / (1.0 + a + b), im)
        });
        let eigs = hermitian_spectrum(&m).unwrap();
        let tr = trace(&m).re;
        assert!((eigs.iter().sum::<f64>() - tr).abs() < 1e-10 * 5.0);
    }

    #[test]
    fn eigh_reconstructs() {
        let m = ComplexMatrix::from_row_slice(
            2,
            2,
            &[c64(2.0, 0.0), c64(0.0, 1.0), c64(0.0, -1.0), c64(3.0, 0.0)],
        );
        let (vals, vecs) = hermitian_eigh(&m).unwrap();
        let rebuilt = &vecs * diag(&vals) * vecs.adjoint();
        assert!((rebuilt - m).norm() < 1e-12);
    }

    #[test]
    fn clustering() {
        assert_eq!(cluster_count(&[1.0, 1.0 + 1e-12, 2.0], 1e-8), 2);
        assert_eq!(cluster_count(&[0.0, 1e-12, 3.0], 1e-8), 1);
        assert_eq!(cluster_count(&[-0.5, 0.5, 0.5], 1e-8), 2);
    }

    #[test]
    fn trace_product_matches_full_product() {
        let a = ComplexMatrix::from_fn(3, 3, |i, j| c64(i as f64 + 1.0, j as f64 - 1.0));
        let b = ComplexMatrix::from_fn(3, 3, |i, j| c64((i * j) as f64, 0.5));
        let direct = trace(&(&a * &b));
        assert!((trace_product(&a, &b) - direct).norm() < 1e-12);
    }
}
