//! Simulated randomized measurements: classical-shadow estimators of
//! `p_2, p_3, a_2, a_3, t_2` and the permutation-test alternative.

use std::collections::HashSet;

use nalgebra::DVector;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::Binomial;
use serde::{Deserialize, Serialize};

use crate::ensembles::haar_unitary;
use crate::linalg::{self, ComplexMatrix, ComplexVector};
use crate::moments::MomentTuple;
use crate::state::{partial_trace, BipartiteDensity, Side};
use crate::{Error, Result};

/// Default number of ordered triples used by the subsampled `p_3` estimator.
pub const DEFAULT_TRIPLE_BUDGET: usize = 200_000;

/// One snapshot: the rotation `U` that was applied and the observed basis index `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadowSample {
    pub unitary: ComplexMatrix,
    pub outcome: usize,
}

impl ShadowSample {
    /// `U†|b⟩`.
    pub fn state_vector(&self) -> ComplexVector {
        let row = self.unitary.row(self.outcome);
        DVector::from_iterator(row.len(), row.iter().map(|z| z.conj()))
    }

    pub fn expand(&self) -> ComplexMatrix {
        expand_shadow(self)
    }
}

/// `(D + 1) U†|b⟩⟨b|U − I`, whose expectation is the measured state.
pub fn expand_shadow(s: &ShadowSample) -> ComplexMatrix {
    let dim = s.unitary.nrows();
    let u = s.state_vector();
    linalg::projector(&u).scale((dim + 1) as f64) - linalg::identity(dim)
}

/// Applies a Haar-random `U` to `rho` and measures in the computational basis.
pub fn sample_shadow<R: Rng + ?Sized>(rho: &ComplexMatrix, rng: &mut R) -> Result<ShadowSample> {
    let u = haar_unitary(rho.nrows(), rng);
    sample_shadow_with_unitary(rho, u, rng)
}

/// Measurement after a caller-chosen rotation.
pub fn sample_shadow_with_unitary<R: Rng + ?Sized>(
    rho: &ComplexMatrix,
    unitary: ComplexMatrix,
    rng: &mut R,
) -> Result<ShadowSample> {
    let probs = born_probabilities(rho, &unitary)?;
    let dist = WeightedIndex::new(&probs)
        .map_err(|e| Error::InvalidState(format!("Born probabilities unusable: {e}")))?;
    Ok(ShadowSample {
        unitary,
        outcome: dist.sample(rng),
    })
}

/// `⟨b|U ρ U†|b⟩` for every `b`, clipped at zero.
pub fn born_probabilities(rho: &ComplexMatrix, unitary: &ComplexMatrix) -> Result<Vec<f64>> {
    if unitary.nrows() != rho.nrows() || !unitary.is_square() {
        return Err(Error::DimensionMismatch {
            expected: rho.nrows(),
            found: unitary.nrows(),
        });
    }
    let w = unitary * rho;
    Ok((0..rho.nrows())
        .map(|b| {
            let p: f64 = (0..rho.nrows())
                .map(|j| (w[(b, j)] * unitary[(b, j)].conj()).re)
                .sum();
            p.max(0.0)
        })
        .collect())
}

/// `count` expanded snapshots of `rho`.
pub fn collect_shadows<R: Rng + ?Sized>(
    rho: &ComplexMatrix,
    count: usize,
    rng: &mut R,
) -> Result<Vec<ComplexMatrix>> {
    (0..count)
        .map(|_| Ok(sample_shadow(rho, rng)?.expand()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShadowEstimate {
    pub value: f64,
    pub std_error: f64,
    pub m: usize,
    /// Second sample count, for estimators that combine two independent runs.
    pub l: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregation {
    #[default]
    Mean,
    MedianOfMeans {
        groups: usize,
    },
}

fn require(available: usize, needed: usize) -> Result<()> {
    if available < needed {
        return Err(Error::InsufficientSamples { needed, available });
    }
    Ok(())
}

fn same_dims(shadows: &[ComplexMatrix]) -> Result<usize> {
    let dim = shadows[0].nrows();
    for s in shadows {
        if s.nrows() != dim || s.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: s.nrows(),
            });
        }
    }
    Ok(dim)
}

fn sum(shadows: &[ComplexMatrix]) -> ComplexMatrix {
    let dim = shadows[0].nrows();
    shadows
        .iter()
        .fold(ComplexMatrix::zeros(dim, dim), |acc, s| acc + s)
}

/// Delete-one jackknife standard error.
fn jackknife(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    ((n - 1.0) / n * ss).sqrt()
}

fn re_tr(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    linalg::trace_product(a, b).re
}

/// Pair U-statistic `Σ_{i≠j} Tr(ρ̂_i ρ̂_j) / (M(M−1))`, unbiased for `Tr ρ²`.
pub fn estimate_p2(shadows: &[ComplexMatrix]) -> Result<ShadowEstimate> {
    estimate_p2_with(shadows, Aggregation::Mean)
}

pub fn estimate_p2_with(
    shadows: &[ComplexMatrix],
    aggregation: Aggregation,
) -> Result<ShadowEstimate> {
    require(shadows.len(), 2)?;
    same_dims(shadows)?;
    match aggregation {
        Aggregation::Mean => Ok(p2_mean(shadows)),
        Aggregation::MedianOfMeans { groups } => {
            if groups == 0 {
                return Err(Error::out_of_range("groups", "must be positive"));
            }
            let size = shadows.len() / groups;
            require(size, 2)?;
            let mut estimates: Vec<f64> = shadows
                .chunks_exact(size)
                .take(groups)
                .map(|chunk| p2_mean(chunk).value)
                .collect();
            estimates.sort_by(f64::total_cmp);
            let g = estimates.len() as f64;
            let mean = estimates.iter().sum::<f64>() / g;
            let sd = if estimates.len() > 1 {
                (estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (g - 1.0)).sqrt()
            } else {
                0.0
            };
            let median = if estimates.len() % 2 == 1 {
                estimates[estimates.len() / 2]
            } else {
                0.5 * (estimates[estimates.len() / 2 - 1] + estimates[estimates.len() / 2])
            };
            Ok(ShadowEstimate {
                value: median,
                // asymptotic efficiency of the median of normal group means
                std_error: (std::f64::consts::PI / 2.0).sqrt() * sd / g.sqrt(),
                m: shadows.len(),
                l: None,
            })
        }
    }
}

fn p2_mean(shadows: &[ComplexMatrix]) -> ShadowEstimate {
    let m = shadows.len();
    let s = sum(shadows);
    let tr_s2 = re_tr(&s, &s);
    let squares: Vec<f64> = shadows.iter().map(|a| re_tr(a, a)).collect();
    let sum_sq: f64 = squares.iter().sum();
    let pair = |tr_s2: f64, sum_sq: f64, n: usize| (tr_s2 - sum_sq) / (n * (n - 1)) as f64;
    let value = pair(tr_s2, sum_sq, m);
    let std_error = if m > 2 {
        let loo: Vec<f64> = shadows
            .iter()
            .zip(&squares)
            .map(|(a, &a2)| pair(tr_s2 - 2.0 * re_tr(&s, a) + a2, sum_sq - a2, m - 1))
            .collect();
        jackknife(&loo)
    } else {
        0.0
    };
    ShadowEstimate {
        value,
        std_error,
        m,
        l: None,
    }
}

/// Triple U-statistic over distinct ordered triples, equal to the symmetrized
/// `Re Tr(ρ̂_i ρ̂_j ρ̂_k)` average. With `triple_budget = Some(n)` and more than
/// `n` ordered triples available, `n` distinct triples are drawn uniformly.
pub fn estimate_p3<R: Rng + ?Sized>(
    shadows: &[ComplexMatrix],
    triple_budget: Option<usize>,
    rng: &mut R,
) -> Result<ShadowEstimate> {
    require(shadows.len(), 3)?;
    same_dims(shadows)?;
    let m = shadows.len();
    match triple_budget {
        Some(budget) if (m * (m - 1) * (m - 2)) > budget => p3_subsampled(shadows, budget, rng),
        _ => Ok(p3_full(shadows)),
    }
}

fn p3_full(shadows: &[ComplexMatrix]) -> ShadowEstimate {
    let m = shadows.len();
    let s = sum(shadows);
    let squares: Vec<ComplexMatrix> = shadows.iter().map(|a| a * a).collect();
    let q = sum(&squares);
    let s2 = &s * &s;
    let tr_s3 = re_tr(&s2, &s);
    let tr_qs = re_tr(&q, &s);
    let cubes: Vec<f64> = shadows
        .iter()
        .zip(&squares)
        .map(|(a, a2)| re_tr(a2, a))
        .collect();
    let sum_cubes: f64 = cubes.iter().sum();
    let triple = |tr_s3: f64, tr_qs: f64, sum_cubes: f64, n: usize| {
        (tr_s3 - 3.0 * tr_qs + 2.0 * sum_cubes) / (n * (n - 1) * (n - 2)) as f64
    };
    let value = triple(tr_s3, tr_qs, sum_cubes, m);
    let std_error = if m > 3 {
        let loo: Vec<f64> = shadows
            .iter()
            .zip(&squares)
            .zip(&cubes)
            .map(|((a, a2), &a3)| {
                // Tr (S − A)³ and Tr[(Q − A²)(S − A)]
                let t3 = tr_s3 - 3.0 * re_tr(&s2, a) + 3.0 * re_tr(&s, a2) - a3;
                let tqs = tr_qs - re_tr(&q, a) - re_tr(a2, &s) + a3;
                triple(t3, tqs, sum_cubes - a3, m - 1)
            })
            .collect();
        jackknife(&loo)
    } else {
        0.0
    };
    ShadowEstimate {
        value,
        std_error,
        m,
        l: None,
    }
}

fn p3_subsampled<R: Rng + ?Sized>(
    shadows: &[ComplexMatrix],
    budget: usize,
    rng: &mut R,
) -> Result<ShadowEstimate> {
    if budget < 2 {
        return Err(Error::out_of_range(
            "triple_budget",
            "need at least two triples",
        ));
    }
    let m = shadows.len();
    let mut seen = HashSet::with_capacity(budget);
    let mut values = Vec::with_capacity(budget);
    while values.len() < budget {
        let i = rng.random_range(0..m);
        let j = rng.random_range(0..m);
        let k = rng.random_range(0..m);
        if i == j || j == k || i == k || !seen.insert((i, j, k)) {
            continue;
        }
        let ij = &shadows[i] * &shadows[j];
        values.push(re_tr(&ij, &shadows[k]));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(ShadowEstimate {
        value: mean,
        std_error: (var / n).sqrt(),
        m,
        l: None,
    })
}

/// `t̂_2 = Σ_{ℓ, i≠j} Tr[(â_ℓ ⊗ I) ρ̂_i ρ̂_j] / (L M (M−1))` from `M` global
/// snapshots and `L` independent snapshots of `ρ_A`.
pub fn estimate_t2(
    shadows_ab: &[ComplexMatrix],
    shadows_a: &[ComplexMatrix],
    d_a: usize,
    d_b: usize,
) -> Result<ShadowEstimate> {
    require(shadows_ab.len(), 2)?;
    require(shadows_a.len(), 1)?;
    let dim = same_dims(shadows_ab)?;
    if dim != d_a * d_b {
        return Err(Error::DimensionMismatch {
            expected: d_a * d_b,
            found: dim,
        });
    }
    if same_dims(shadows_a)? != d_a {
        return Err(Error::DimensionMismatch {
            expected: d_a,
            found: shadows_a[0].nrows(),
        });
    }
    let (m, l) = (shadows_ab.len(), shadows_a.len());
    let a_sum = sum(shadows_a);
    let a_bar = a_sum.unscale(l as f64);
    let lift = |a: &ComplexMatrix| linalg::kron(a, &linalg::identity(d_b));
    let a_big = lift(&a_bar);

    let s = sum(shadows_ab);
    let squares: Vec<ComplexMatrix> = shadows_ab.iter().map(|x| x * x).collect();
    let q = sum(&squares);
    let pair_sum = &s * &s - &q;
    let norm = (m * (m - 1)) as f64;
    let value = re_tr(&a_big, &pair_sum) / norm;

    // jackknife over the global snapshots with ā fixed
    let var_m = if m > 2 {
        let sym = &a_big * &s + &s * &a_big;
        let base = re_tr(&a_big, &pair_sum);
        let loo: Vec<f64> = shadows_ab
            .iter()
            .zip(&squares)
            .map(|(x, x2)| {
                // Tr[Ā((S − X)² − (Q − X²))] = base − Tr[(ĀS + SĀ) X] + 2 Tr[Ā X²] − Tr[Ā X²]
                let v = base - re_tr(&sym, x) + re_tr(&a_big, x2);
                v / ((m - 1) * (m - 2)) as f64
            })
            .collect();
        jackknife(&loo).powi(2)
    } else {
        0.0
    };
    // jackknife over the ρ_A snapshots with the pair sum fixed; t̂_2 is linear in ā
    let var_l = if l > 1 {
        let y_a = partial_trace(&pair_sum, d_a, d_b, Side::A).unscale(norm);
        let loo: Vec<f64> = shadows_a
            .iter()
            .map(|a| re_tr(&(&a_sum - a).unscale((l - 1) as f64), &y_a))
            .collect();
        jackknife(&loo).powi(2)
    } else {
        0.0
    };
    Ok(ShadowEstimate {
        value,
        std_error: (var_m + var_l).sqrt(),
        m,
        l: Some(l),
    })
}

/// Upper bound on `Var[p̂_2]` for global 3-design snapshots of a `D`-dimensional state.
pub fn p2_variance_bound(p2: f64, p3: f64, dim: usize, m: usize) -> Result<f64> {
    require(m, 2)?;
    let (d, mf) = (dim as f64, m as f64);
    let pairs = mf * (mf - 1.0);
    Ok(4.0 * (mf - 2.0) / pairs * (p2 + 2.0 * p3)
        + 2.0 / pairs * ((d + 1.0).powi(2) + 2.0 * d * p2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentTupleEstimate {
    pub value: MomentTuple,
    pub std_error: MomentTuple,
    pub m: usize,
    pub l: usize,
}

/// Estimates from precomputed snapshots: `p_2, p_3` from the global ones,
/// `a_2, a_3` from the `ρ_A` ones, `t_2` from both.
pub fn estimate_moment_tuple_from<R: Rng + ?Sized>(
    shadows_ab: &[ComplexMatrix],
    shadows_a: &[ComplexMatrix],
    d_a: usize,
    d_b: usize,
    triple_budget: Option<usize>,
    rng: &mut R,
) -> Result<MomentTupleEstimate> {
    let p2 = estimate_p2(shadows_ab)?;
    let p3 = estimate_p3(shadows_ab, triple_budget, rng)?;
    let a2 = estimate_p2(shadows_a)?;
    let a3 = estimate_p3(shadows_a, triple_budget, rng)?;
    let t2 = estimate_t2(shadows_ab, shadows_a, d_a, d_b)?;
    Ok(MomentTupleEstimate {
        value: MomentTuple {
            p2: p2.value,
            p3: p3.value,
            a2: a2.value,
            a3: a3.value,
            t2: t2.value,
        },
        std_error: MomentTuple {
            p2: p2.std_error,
            p3: p3.std_error,
            a2: a2.std_error,
            a3: a3.std_error,
            t2: t2.std_error,
        },
        m: shadows_ab.len(),
        l: shadows_a.len(),
    })
}

/// Full pipeline: `m` global snapshots of `rho` and `l` snapshots of its
/// exact marginal `ρ_A`, the latter standing in for local measurements on A.
pub fn estimate_moment_tuple<R: Rng + ?Sized>(
    rho: &BipartiteDensity,
    m: usize,
    l: usize,
    rng: &mut R,
) -> Result<MomentTupleEstimate> {
    require(m, 3)?;
    require(l, 3)?;
    let global = collect_shadows(rho.matrix(), m, rng)?;
    let local = collect_shadows(&rho.partial_trace(Side::A), l, rng)?;
    estimate_moment_tuple_from(&global, &local, rho.d_a(), rho.d_b(), None, rng)
}

/// Simulates the `N`-copy cyclic permutation test: the ancilla reads `+`
/// with probability `½ + ½ Re Tr(ρ_1 ⋯ ρ_N)`. Returns `P₊ − P₋`.
pub fn permutation_test_estimate<R: Rng + ?Sized>(
    states: &[ComplexMatrix],
    shots: u64,
    rng: &mut R,
) -> Result<ShadowEstimate> {
    require(states.len(), 1)?;
    if shots == 0 {
        return Err(Error::InsufficientSamples {
            needed: 1,
            available: 0,
        });
    }
    same_dims(states)?;
    let product = states[1..].iter().fold(states[0].clone(), |acc, s| acc * s);
    let overlap = linalg::trace(&product).re;
    let p_plus = (0.5 + 0.5 * overlap).clamp(0.0, 1.0);
    let plus = Binomial::new(shots, p_plus)
        .map_err(|e| Error::out_of_range("P+", e.to_string()))?
        .sample(rng);
    let freq = plus as f64 / shots as f64;
    Ok(ShadowEstimate {
        value: 2.0 * freq - 1.0,
        std_error: 2.0 * (freq * (1.0 - freq) / shots as f64).sqrt(),
        m: shots as usize,
        l: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{isotropic_state, RandomStream};
    use crate::linalg::c64;
    use crate::state::maximally_entangled;
    use rand_chacha::ChaCha8Rng;

    fn rng(i: u64) -> ChaCha8Rng {
        RandomStream::new(99, i).rng()
    }

    fn ket0(dim: usize) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(dim, dim);
        m[(0, 0)] = c64(1.0, 0.0);
        m
    }

    #[test]
    fn forced_identity_measures_zero() {
        let mut r = rng(0);
        for _ in 0..50 {
            let s = sample_shadow_with_unitary(&ket0(4), linalg::identity(4), &mut r).unwrap();
            assert_eq!(s.outcome, 0);
        }
    }

    #[test]
    fn snapshot_structure() {
        let mut r = rng(1);
        let rho = isotropic_state(2, 0.8).unwrap();
        let s = sample_shadow(rho.matrix(), &mut r).unwrap();
        let x = s.expand();
        assert!((linalg::trace(&x) - c64(1.0, 0.0)).norm() < 1e-12);
        let eigs = linalg::hermitian_spectrum(&x).unwrap();
        for e in &eigs[..3] {
            assert!((e + 1.0).abs() < 1e-12);
        }
        assert!((eigs[3] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn born_distribution_chi_squared() {
        let mut r = rng(2);
        let rho = isotropic_state(2, 0.7).unwrap();
        let u = haar_unitary(4, &mut r);
        let probs = born_probabilities(rho.matrix(), &u).unwrap();
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let draws = 10_000;
        let mut counts = [0usize; 4];
        for _ in 0..draws {
            counts[sample_shadow_with_unitary(rho.matrix(), u.clone(), &mut r)
                .unwrap()
                .outcome] += 1;
        }
        let chi2: f64 = counts
            .iter()
            .zip(&probs)
            .map(|(&c, &p)| (c as f64 - draws as f64 * p).powi(2) / (draws as f64 * p))
            .sum();
        // 3 degrees of freedom, 99.9th percentile ≈ 16.27
        assert!(chi2 < 16.27, "chi2 = {chi2}");
    }

    #[test]
    fn snapshot_mean_is_unbiased() {
        let mut r = rng(3);
        let rho = isotropic_state(2, 0.8).unwrap();
        let n = 10_000;
        let shadows = collect_shadows(rho.matrix(), n, &mut r).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let vals: Vec<_> = shadows.iter().map(|s| s[(i, j)]).collect();
                let mean = vals.iter().sum::<num_complex::Complex64>() / n as f64;
                let var = vals.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() / (n - 1) as f64;
                let se = (var / n as f64).sqrt();
                assert!(
                    (mean - rho.matrix()[(i, j)]).norm() < 5.0 * se + 1e-12,
                    "({i},{j})"
                );
            }
        }
    }

    #[test]
    fn exact_copies_reproduce_functionals() {
        let rho = isotropic_state(2, 0.8).unwrap().depolarize(0.1).unwrap();
        let exact = MomentTuple::exact(&rho);
        let copies = vec![rho.matrix().clone(); 6];
        let rho_a = rho.partial_trace(Side::A);
        let local = vec![rho_a; 4];
        let mut r = rng(4);
        let est = estimate_moment_tuple_from(&copies, &local, 2, 2, None, &mut r).unwrap();
        for (a, b) in [
            (est.value.p2, exact.p2),
            (est.value.p3, exact.p3),
            (est.value.a2, exact.a2),
            (est.value.a3, exact.a3),
            (est.value.t2, exact.t2),
        ] {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
        assert!(est.std_error.p2 < 1e-12 && est.std_error.t2 < 1e-12);
        let sub = estimate_p3(&copies, Some(20), &mut r).unwrap();
        assert!((sub.value - exact.p3).abs() < 1e-12);
    }

    #[test]
    fn estimators_on_pure_and_mixed_states() {
        let mut r = rng(5);
        let pure = maximally_entangled(2, 2, 2).unwrap().density();
        let shadows = collect_shadows(pure.matrix(), 400, &mut r).unwrap();
        let p2 = estimate_p2(&shadows).unwrap();
        assert!((p2.value - 1.0).abs() < 5.0 * p2.std_error);
        let p3 = estimate_p3(&shadows, None, &mut r).unwrap();
        assert!((p3.value - 1.0).abs() < 5.0 * p3.std_error);

        let mixed = BipartiteDensity::maximally_mixed(2, 2);
        let shadows = collect_shadows(mixed.matrix(), 400, &mut r).unwrap();
        let p2 = estimate_p2(&shadows).unwrap();
        assert!((p2.value - 0.25).abs() < 5.0 * p2.std_error);
        let p3 = estimate_p3(&shadows, None, &mut r).unwrap();
        assert!((p3.value - 1.0 / 16.0).abs() < 5.0 * p3.std_error);
        let mom = estimate_p2_with(&shadows, Aggregation::MedianOfMeans { groups: 5 }).unwrap();
        assert!((mom.value - 0.25).abs() < 5.0 * mom.std_error);
    }

    #[test]
    fn subsampled_p3_matches_full() {
        let mut r = rng(6);
        let rho = isotropic_state(2, 0.9).unwrap();
        let shadows = collect_shadows(rho.matrix(), 60, &mut r).unwrap();
        let full = estimate_p3(&shadows, None, &mut r).unwrap();
        let sub = estimate_p3(&shadows, Some(20_000), &mut r).unwrap();
        assert!((full.value - sub.value).abs() < 5.0 * sub.std_error);
    }

    #[test]
    fn jackknife_matches_brute_force() {
        let mut r = rng(7);
        let rho = isotropic_state(2, 0.6).unwrap();
        let shadows = collect_shadows(rho.matrix(), 12, &mut r).unwrap();
        let brute = |f: &dyn Fn(&[ComplexMatrix]) -> f64| {
            let loo: Vec<f64> = (0..shadows.len())
                .map(|i| {
                    let rest: Vec<ComplexMatrix> = shadows
                        .iter()
                        .enumerate()
                        .filter(|&(j, _)| j != i)
                        .map(|(_, s)| s.clone())
                        .collect();
                    f(&rest)
                })
                .collect();
            jackknife(&loo)
        };
        let p2 = estimate_p2(&shadows).unwrap();
        assert!((p2.std_error - brute(&|s| p2_mean(s).value)).abs() < 1e-9);
        let p3 = p3_full(&shadows);
        assert!((p3.std_error - brute(&|s| p3_full(s).value)).abs() < 1e-9);
    }

    #[test]
    fn t2_on_pure_state() {
        let mut r = rng(8);
        let pure = maximally_entangled(2, 2, 3).unwrap().density();
        let exact = MomentTuple::exact(&pure);
        assert!((exact.t2 - exact.a2).abs() < 1e-12);
        let global = collect_shadows(pure.matrix(), 300, &mut r).unwrap();
        let local = collect_shadows(&pure.partial_trace(Side::A), 200, &mut r).unwrap();
        let t2 = estimate_t2(&global, &local, 2, 3).unwrap();
        assert!((t2.value - exact.a2).abs() < 5.0 * t2.std_error);
        assert!(estimate_t2(&global, &local, 3, 2).is_err());
    }

    #[test]
    fn variance_bound_values() {
        let (d, m) = (16.0, 100.0);
        let expected = 12.0 * (m - 2.0) / (m * (m - 1.0))
            + 2.0 * ((d + 1.0) * (d + 1.0) + 2.0 * d) / (m * (m - 1.0));
        assert!((p2_variance_bound(1.0, 1.0, 16, 100).unwrap() - expected).abs() < 1e-14);
        assert!(p2_variance_bound(1.0, 1.0, 16, 1_000_000).unwrap() < 1e-4);
        assert!(p2_variance_bound(1.0, 1.0, 16, 1).is_err());
    }

    #[test]
    fn permutation_test() {
        let mut r = rng(9);
        let zero = ket0(4);
        let est = permutation_test_estimate(&[zero.clone(), zero], 1000, &mut r).unwrap();
        assert_eq!(est.value, 1.0);
        let mixed = BipartiteDensity::maximally_mixed(2, 2).into_matrix();
        let shots = 10_000;
        let est = permutation_test_estimate(&[mixed.clone(), mixed.clone(), mixed], shots, &mut r)
            .unwrap();
        assert!((est.value - 1.0 / 16.0).abs() < 5.0 / (shots as f64).sqrt());
        assert!(permutation_test_estimate(&[ket0(2), ket0(3)], 10, &mut r).is_err());
    }
}
