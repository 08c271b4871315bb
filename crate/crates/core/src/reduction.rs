//! The k-reduction map `X ↦ k Tr(X) I − X` applied to the B side,
//! its pure-state spectral theory and the k-reduction negativity.

use nalgebra::DMatrix;

use crate::linalg::{self, ComplexMatrix, PSD_TOL};
use crate::state::{BipartiteDensity, SchmidtVector, Side};
use crate::{CriterionVerdict, Error, Result};

const BISECTION_MAX_ITER: usize = 200;
const BISECTION_WIDTH: f64 = 1e-14;
/// Merging tolerance for repeated Schmidt coefficients.
const COEFF_MERGE_TOL: f64 = 1e-10;

/// `(I_A ⊗ R_k)(ρ) = k ρ_A ⊗ I_B − ρ`.
#[derive(Debug, Clone)]
pub struct ReducedOperator {
    pub k: usize,
    pub d_a: usize,
    pub d_b: usize,
    pub matrix: ComplexMatrix,
}

impl ReducedOperator {
    pub fn spectrum(&self) -> Vec<f64> {
        linalg::hermitian_spectrum(&self.matrix).expect("k-reduced operator is Hermitian")
    }
}

pub fn k_reduced_operator(rho: &BipartiteDensity, k: usize) -> ReducedOperator {
    let rho_a = rho.partial_trace(Side::A);
    let lifted = linalg::kron(&rho_a, &linalg::identity(rho.d_b()));
    ReducedOperator {
        k,
        d_a: rho.d_a(),
        d_b: rho.d_b(),
        matrix: lifted.scale(k as f64) - rho.matrix(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NegativityReport {
    pub negativity: f64,
    pub min_eig: f64,
    /// Nondecreasing.
    pub spectrum: Vec<f64>,
}

impl NegativityReport {
    fn from_spectrum(spectrum: Vec<f64>) -> Self {
        let negativity = -spectrum.iter().filter(|&&e| e < 0.0).sum::<f64>();
        Self {
            negativity: negativity.max(0.0),
            min_eig: spectrum[0],
            spectrum,
        }
    }
}

/// `N_k(ρ)`: absolute sum of the negative eigenvalues of the k-reduced operator.
pub fn reduction_negativity(rho: &BipartiteDensity, k: usize) -> NegativityReport {
    NegativityReport::from_spectrum(k_reduced_operator(rho, k).spectrum())
}

/// Dense k-reduction test: detected iff `kρ_A ⊗ I − ρ` is not PSD.
pub fn reduction_criterion(rho: &BipartiteDensity, k: usize) -> CriterionVerdict {
    let op = k_reduced_operator(rho, k);
    let spectrum = op.spectrum();
    let scale = linalg::inf_norm(&op.matrix).max(1.0);
    let min_eig = spectrum[0];
    CriterionVerdict::new(min_eig < -PSD_TOL * scale, k, None, min_eig)
}

/// `Ω_k(λ)_ij = k λ_i δ_ij − √(λ_i λ_j)`.
pub fn omega_matrix(lambda: &SchmidtVector, k: usize) -> DMatrix<f64> {
    let l = lambda.values();
    let d = l.len();
    DMatrix::from_fn(d, d, |i, j| {
        let diag = if i == j { k as f64 * l[i] } else { 0.0 };
        diag - (l[i] * l[j]).sqrt()
    })
}

/// `θ_k(λ)` evaluated along two independent routes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theta {
    /// `max(0, −σ_min(Ω_k(λ)))` from a dense eigensolve.
    pub eigen: f64,
    /// Root of `Σ λ_i / (k λ_i + y) = 1`, present when `k` is below the Schmidt rank.
    pub fixed_point: Option<f64>,
}

impl Theta {
    pub fn value(&self) -> f64 {
        self.eigen
    }
}

pub fn theta_k(lambda: &SchmidtVector, k: usize) -> Theta {
    let r = lambda.rank();
    // Ω_k(λ) ⪰ 0 exactly once k reaches the Schmidt rank
    let eigen = if k >= r {
        0.0
    } else {
        (-linalg::symmetric_spectrum(&omega_matrix(lambda, k))[0]).max(0.0)
    };
    let fixed_point = (k < r).then(|| theta_fixed_point(lambda, k, r));
    Theta { eigen, fixed_point }
}

fn theta_fixed_point(lambda: &SchmidtVector, k: usize, r: usize) -> f64 {
    let kf = k as f64;
    let g = |y: f64| -> f64 {
        lambda
            .values()
            .iter()
            .filter(|&&l| l > 0.0)
            .map(|&l| l / (kf * l + y))
            .sum()
    };
    // G is strictly decreasing in y with G(0⁺) = r/k > 1 and G(1 − k/r) ≤ 1.
    let (mut lo, mut hi) = (0.0_f64, 1.0 - kf / r as f64);
    for _ in 0..BISECTION_MAX_ITER {
        if hi - lo < BISECTION_WIDTH {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if g(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Spectrum of `R_k(|ψ⟩⟨ψ|)` for a pure state with Schmidt vector `lambda`
/// (of length `d_a ≤ d_b`), assembled as `σ(Ω_k(λ)) ∪ [kλ]^{×(d_b−1)}`.
pub fn pure_reduced_spectrum(lambda: &SchmidtVector, k: usize, d_b: usize) -> Result<Vec<f64>> {
    let d_a = lambda.len();
    if d_b < d_a {
        return Err(Error::out_of_range(
            "d_b",
            format!("{d_b} is smaller than the Schmidt vector length {d_a}"),
        ));
    }
    let mut spectrum = linalg::symmetric_spectrum(&omega_matrix(lambda, k));
    spectrum.reserve(d_a * (d_b - 1));
    for _ in 1..d_b {
        spectrum.extend(lambda.values().iter().map(|l| k as f64 * l));
    }
    spectrum.sort_by(f64::total_cmp);
    Ok(spectrum)
}

/// `Ω̃_k(λ)_ij = k ℓ_i δ_ij − √(m_i m_j ℓ_i ℓ_j)` over distinct nonzero
/// coefficients `ℓ_j` with multiplicities `m_j`.
pub fn tilde_omega(distinct: &[(f64, usize)], k: usize) -> Result<DMatrix<f64>> {
    if distinct.iter().any(|&(l, m)| l <= 0.0 || m == 0) {
        return Err(Error::InvalidSchmidtVector(
            "coefficients must be positive with positive multiplicity".into(),
        ));
    }
    let total: f64 = distinct.iter().map(|&(l, m)| l * m as f64).sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidSchmidtVector(format!(
            "weighted coefficients sum to {total}"
        )));
    }
    let n = distinct.len();
    Ok(DMatrix::from_fn(n, n, |i, j| {
        let (li, mi) = (distinct[i].0, distinct[i].1 as f64);
        let (lj, mj) = (distinct[j].0, distinct[j].1 as f64);
        let diag = if i == j { k as f64 * li } else { 0.0 };
        diag - (mi * mj * li * lj).sqrt()
    }))
}

/// `σ(Ω_k(λ))` through the compressed matrix:
/// `σ(Ω̃_k) ∪ {kℓ_j}^{×(m_j−1)} ∪ {0}^{×(d−r)}`, sorted nondecreasing.
pub fn compressed_omega_spectrum(lambda: &SchmidtVector, k: usize) -> Vec<f64> {
    let distinct = lambda.distinct_coefficients(COEFF_MERGE_TOL);
    let tilde = tilde_omega(&distinct, k).expect("Schmidt vector coefficients are valid");
    let mut spectrum = linalg::symmetric_spectrum(&tilde);
    for &(l, m) in &distinct {
        spectrum.extend(std::iter::repeat_n(k as f64 * l, m - 1));
    }
    spectrum.extend(std::iter::repeat_n(0.0, lambda.len() - lambda.rank()));
    spectrum.sort_by(f64::total_cmp);
    spectrum
}

fn validate_eps(eps: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::out_of_range("eps", format!("{eps} not in [0, 1]")));
    }
    Ok(())
}

/// `ε*` below which `(1 − ε)|ψ⟩⟨ψ| + ε I/D` keeps a positive k-reduction negativity.
pub fn depolarized_threshold(lambda: &SchmidtVector, k: usize, d_a: usize, d_b: usize) -> f64 {
    let n_psi = theta_k(lambda, k).value();
    let dd = (d_a * d_b) as f64;
    dd * n_psi / ((k * d_b) as f64 - 1.0 + dd * n_psi)
}

/// Closed-form `N_k` of a depolarized pure state.
pub fn depolarized_negativity(
    lambda: &SchmidtVector,
    eps: f64,
    k: usize,
    d_a: usize,
    d_b: usize,
) -> Result<f64> {
    validate_eps(eps)?;
    let n_psi = theta_k(lambda, k).value();
    if n_psi == 0.0 || eps >= depolarized_threshold(lambda, k, d_a, d_b) {
        return Ok(0.0);
    }
    let shift = eps * ((d_b * k) as f64 - 1.0) / (d_a * d_b) as f64;
    Ok(((1.0 - eps) * n_psi - shift).max(0.0))
}

/// Noise threshold `ε_c` of `ρ_{ε,r}` for the `(r−1)`-reduction criterion.
pub fn noise_threshold_rm(r: usize, d_a: usize, d_b: usize) -> Result<f64> {
    if r == 0 || r > d_a || d_a > d_b {
        return Err(Error::out_of_range(
            "r, d_a, d_b",
            format!("need 1 ≤ r ≤ d_a ≤ d_b, got ({r}, {d_a}, {d_b})"),
        ));
    }
    let (r, d_a, d_b) = (r as f64, d_a as f64, d_b as f64);
    Ok(1.0 / (1.0 + (r * r - r) / d_a - r / (d_a * d_b)))
}

/// Ceiling that ignores floating-point overshoot just above an integer.
fn ceil_tol(x: f64) -> usize {
    (x - 1e-9).ceil().max(0.0) as usize
}

/// Lower and upper bounds on `SN(ρ_{ε,r})`.
pub fn schmidt_number_bounds_medp(
    r: usize,
    eps: f64,
    d_a: usize,
    d_b: usize,
) -> Result<(usize, usize)> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::out_of_range("eps", format!("{eps} not in [0, 1)")));
    }
    if r == 0 || r > d_a.min(d_b) {
        return Err(Error::out_of_range(
            "r",
            format!("{r} not in 1..={}", d_a.min(d_b)),
        ));
    }
    let u = eps / ((1.0 - eps) * (d_a * d_b) as f64);
    let rf = r as f64;
    let lower = ceil_tol((1.0 + u) * rf / (1.0 + d_b as f64 * rf * u));
    let upper = ceil_tol((1.0 + u) * rf / (1.0 + rf * rf * u));
    Ok((lower, upper))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{maximally_entangled, PureState};

    fn lam(v: &[f64]) -> SchmidtVector {
        SchmidtVector::new(v.to_vec()).unwrap()
    }

    fn example() -> SchmidtVector {
        lam(&[0.8, 1.0 / 15.0, 1.0 / 15.0, 1.0 / 15.0])
    }

    fn assert_multiset(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn maximally_mixed_reduced_operator() {
        let rho = BipartiteDensity::maximally_mixed(2, 3);
        let op = k_reduced_operator(&rho, 1);
        let expected = linalg::identity(6).scale(2.0 / 6.0);
        assert!((op.matrix - expected).norm() < 1e-14);
    }

    #[test]
    fn bell_reduced_spectrum() {
        let bell = maximally_entangled(2, 2, 2).unwrap().density();
        let spectrum = k_reduced_operator(&bell, 1).spectrum();
        assert_multiset(&spectrum, &[-0.5, 0.5, 0.5, 0.5], 1e-12);
        let analytic = pure_reduced_spectrum(&lam(&[0.5, 0.5]), 1, 2).unwrap();
        assert_multiset(&analytic, &spectrum, 1e-12);
    }

    #[test]
    fn product_state_reduced_spectrum() {
        let analytic = pure_reduced_spectrum(&lam(&[1.0, 0.0]), 1, 2).unwrap();
        assert_multiset(&analytic, &[0.0, 0.0, 0.0, 1.0], 1e-14);
    }

    #[test]
    fn reduced_operator_trace() {
        let psi = PureState::from_schmidt(&example(), 4, 5).unwrap().density();
        for k in 1..5 {
            let tr = linalg::trace(&k_reduced_operator(&psi, k).matrix).re;
            assert!((tr - (k * 5) as f64 + 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn omega_examples() {
        let o = omega_matrix(&lam(&[1.0, 0.0]), 1);
        assert!(o.iter().all(|x| x.abs() < 1e-15));
        let o = omega_matrix(&lam(&[0.5, 0.5]), 1);
        assert_eq!(o, DMatrix::from_row_slice(2, 2, &[0.0, -0.5, -0.5, 0.0]));
        let eigs = linalg::symmetric_spectrum(&o);
        assert_multiset(&eigs, &[-0.5, 0.5], 1e-14);
    }

    #[test]
    fn omega_uniform_rank_one_perturbation() {
        // λ uniform over r of d entries: eigs (k − r)/r ×1, k/r ×(r−1), 0 ×(d−r)
        let (r, d) = (4, 6);
        for k in 1..r {
            let eigs = linalg::symmetric_spectrum(&omega_matrix(
                &SchmidtVector::uniform(r, d).unwrap(),
                k,
            ));
            let mut expected = vec![(k as f64 - r as f64) / r as f64];
            expected.extend(std::iter::repeat_n(0.0, d - r));
            expected.extend(std::iter::repeat_n(k as f64 / r as f64, r - 1));
            expected.sort_by(f64::total_cmp);
            assert_multiset(&eigs, &expected, 1e-12);
        }
    }

    #[test]
    fn theta_uniform_and_saturated() {
        for r in 2..7 {
            for k in 1..r {
                let t = theta_k(&SchmidtVector::uniform(r, 7).unwrap(), k);
                let expected = 1.0 - k as f64 / r as f64;
                assert!((t.eigen - expected).abs() < 1e-12);
                assert!((t.fixed_point.unwrap() - expected).abs() < 1e-12);
            }
            let t = theta_k(&SchmidtVector::uniform(r, 7).unwrap(), r);
            assert_eq!(t.fixed_point, None);
            assert!(t.eigen.abs() < 1e-12);
        }
    }

    #[test]
    fn theta_dual_path_on_example() {
        let t = theta_k(&example(), 3);
        assert!(t.eigen > 0.0);
        assert!((t.eigen - t.fixed_point.unwrap()).abs() < 1e-10);
    }

    #[test]
    fn negativity_matches_theta_and_trace_norm_form() {
        let lambda = example();
        let psi = PureState::from_schmidt(&lambda, 4, 4).unwrap().density();
        for k in 1..=4 {
            let report = reduction_negativity(&psi, k);
            assert!((report.negativity - theta_k(&lambda, k).value()).abs() < 1e-10);
            let trace_norm: f64 = report.spectrum.iter().map(|e| e.abs()).sum();
            let alt = 0.5 * (trace_norm - (k * 4) as f64 + 1.0);
            assert!((alt - report.negativity).abs() < 1e-10);
        }
    }

    #[test]
    fn maximally_entangled_negativity_saturates_bound() {
        for r in 2..=4 {
            let psi = maximally_entangled(r, 4, 4).unwrap().density();
            for k in 1..r {
                let n = reduction_negativity(&psi, k).negativity;
                assert!((n - (1.0 - k as f64 / r as f64)).abs() < 1e-10);
            }
            assert!(reduction_negativity(&psi, r).negativity < 1e-10);
        }
    }

    #[test]
    fn tilde_omega_examples() {
        let t = tilde_omega(&[(0.25, 4)], 3).unwrap();
        assert!((t[(0, 0)] - (3.0 / 4.0 - 1.0)).abs() < 1e-15);
        assert!(tilde_omega(&[(0.3, 2)], 1).is_err());

        let lambda = example();
        for k in 1..=4 {
            let via_tilde = compressed_omega_spectrum(&lambda, k);
            let dense = linalg::symmetric_spectrum(&omega_matrix(&lambda, k));
            assert_multiset(&via_tilde, &dense, 1e-12);
        }
        assert_eq!(
            tilde_omega(&lambda.distinct_coefficients(1e-10), 2)
                .unwrap()
                .nrows(),
            2
        );
    }

    #[test]
    fn depolarized_closed_form() {
        let plus4 = SchmidtVector::uniform(4, 4).unwrap();
        assert!((depolarized_negativity(&plus4, 0.0, 3, 4, 4).unwrap() - 0.25).abs() < 1e-12);
        assert_eq!(depolarized_negativity(&plus4, 1.0, 3, 4, 4).unwrap(), 0.0);
        assert!((depolarized_threshold(&plus4, 3, 4, 4) - 4.0 / 15.0).abs() < 1e-12);
        assert!(depolarized_negativity(&plus4, 1.5, 3, 4, 4).is_err());

        // against a dense eigensolve of the mixed state
        let psi = PureState::from_schmidt(&example(), 4, 4).unwrap().density();
        for &eps in &[0.0, 0.05, 0.1, 0.2, 0.4] {
            let mixed = psi.depolarize(eps).unwrap();
            for k in 1..4 {
                let dense = reduction_negativity(&mixed, k).negativity;
                let closed = depolarized_negativity(&example(), eps, k, 4, 4).unwrap();
                assert!((dense - closed).abs() < 1e-10, "eps={eps} k={k}");
            }
        }
    }

    #[test]
    fn rm_threshold_values() {
        assert!((noise_threshold_rm(4, 4, 4).unwrap() - 4.0 / 15.0).abs() < 1e-15);
        assert!((noise_threshold_rm(2, 2, 2).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        let far = noise_threshold_rm(3, 10_000, 10_000).unwrap();
        assert!(far > 0.999);
        assert!(noise_threshold_rm(5, 4, 4).is_err());
        assert!(noise_threshold_rm(2, 5, 4).is_err());
    }

    #[test]
    fn medp_bounds() {
        assert_eq!(schmidt_number_bounds_medp(4, 0.0, 16, 16).unwrap(), (4, 4));
        assert!(schmidt_number_bounds_medp(4, 1.0, 16, 16).is_err());
        // r ≤ √d_A and ε < ½ pins the Schmidt number
        for &eps in &[0.1, 0.3, 0.49] {
            let (lo, hi) = schmidt_number_bounds_medp(3, eps, 9, 9).unwrap();
            assert_eq!((lo, hi), (3, 3));
        }
        let (lo, hi) = schmidt_number_bounds_medp(4, 0.3, 16, 16).unwrap();
        assert!(lo <= hi);
    }

    #[test]
    fn medp_lower_bound_consistent_with_dense_criterion() {
        let (r, d) = (4, 16);
        let rho = maximally_entangled(r, d, d)
            .unwrap()
            .density()
            .depolarize(0.3)
            .unwrap();
        let (lo, _) = schmidt_number_bounds_medp(r, 0.3, d, d).unwrap();
        for k in 1..lo {
            assert!(reduction_criterion(&rho, k).detected, "k={k}");
        }
    }

    #[test]
    fn criterion_on_pure_states() {
        let psi = PureState::from_schmidt(&example(), 4, 4).unwrap().density();
        for k in 1..4 {
            assert!(reduction_criterion(&psi, k).detected);
        }
        assert!(!reduction_criterion(&psi, 4).detected);
        let rho = BipartiteDensity::maximally_mixed(3, 3);
        assert!(!reduction_criterion(&rho, 1).detected);
    }
}
