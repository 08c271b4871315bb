use kreduce::ensembles::{haar_vector, induced_mixed, isotropic_state, RandomStream};
use kreduce::linalg::{self, ComplexMatrix};
use kreduce::moments::{third_order_criterion, third_order_criterion_with_slack, MomentTuple};
use kreduce::shadows::*;
use kreduce::{BipartiteDensity, Side};

fn pure_state(dim: usize, seed: u64) -> ComplexMatrix {
    linalg::projector(&haar_vector(dim, &mut RandomStream::new(seed, 0).rng()))
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn variance(values: &[f64]) -> f64 {
    let m = mean(values);
    values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() - 1) as f64
}

/// Mean within `5σ` of `exact`, σ pooled from the per-run standard errors.
fn assert_unbiased(name: &str, estimates: &[ShadowEstimate], exact: f64) {
    let runs = estimates.len() as f64;
    let values: Vec<f64> = estimates.iter().map(|e| e.value).collect();
    let pooled = (estimates.iter().map(|e| e.std_error.powi(2)).sum::<f64>()).sqrt() / runs;
    let m = mean(&values);
    assert!(
        (m - exact).abs() < 5.0 * pooled,
        "{name}: mean {m} exact {exact} pooled se {pooled}"
    );
}

#[test]
fn moment_estimators_are_unbiased() {
    let mut rng = RandomStream::new(50, 0).rng();
    let rho = induced_mixed(2, 2, 2, &mut rng).unwrap();
    let exact = MomentTuple::exact(&rho);
    let rho_a = rho.partial_trace(Side::A);
    let (mut p2, mut p3, mut a2, mut a3, mut t2) = (vec![], vec![], vec![], vec![], vec![]);
    for run in 0..200 {
        let mut rng = RandomStream::new(51, run).rng();
        let global = collect_shadows(rho.matrix(), 60, &mut rng).unwrap();
        let local = collect_shadows(&rho_a, 40, &mut rng).unwrap();
        p2.push(estimate_p2(&global).unwrap());
        p3.push(estimate_p3(&global, None, &mut rng).unwrap());
        a2.push(estimate_p2(&local).unwrap());
        a3.push(estimate_p3(&local, None, &mut rng).unwrap());
        t2.push(estimate_t2(&global, &local, 2, 2).unwrap());
    }
    assert_unbiased("p2", &p2, exact.p2);
    assert_unbiased("p3", &p3, exact.p3);
    assert_unbiased("a2", &a2, exact.a2);
    assert_unbiased("a3", &a3, exact.a3);
    assert_unbiased("t2", &t2, exact.t2);
}

#[test]
fn subsampled_p3_is_unbiased() {
    let rho = pure_state(4, 52);
    let estimates: Vec<ShadowEstimate> = (0..200)
        .map(|run| {
            let mut rng = RandomStream::new(53, run).rng();
            let shadows = collect_shadows(&rho, 40, &mut rng).unwrap();
            estimate_p3(&shadows, Some(500), &mut rng).unwrap()
        })
        .collect();
    assert_unbiased("p3 subsampled", &estimates, 1.0);
}

#[test]
fn p2_variance_respects_bound() {
    for dim in [4, 16] {
        let rho = pure_state(dim, 54);
        for m in [50, 200] {
            let values: Vec<f64> = (0..200)
                .map(|run| {
                    let mut rng = RandomStream::new(55 + dim as u64, run * 1000 + m as u64).rng();
                    estimate_p2(&collect_shadows(&rho, m, &mut rng).unwrap())
                        .unwrap()
                        .value
                })
                .collect();
            let bound = p2_variance_bound(1.0, 1.0, dim, m).unwrap();
            let var = variance(&values);
            assert!(var <= 1.5 * bound, "D={dim} M={m}: var {var} bound {bound}");
        }
    }
}

#[test]
fn p2_error_stays_bounded_with_linear_sample_count() {
    let spreads: Vec<f64> = [4usize, 8, 16]
        .iter()
        .map(|&dim| {
            let rho = pure_state(dim, 56);
            let values: Vec<f64> = (0..300)
                .map(|run| {
                    let mut rng = RandomStream::new(57 + dim as u64, run).rng();
                    estimate_p2(&collect_shadows(&rho, 8 * dim, &mut rng).unwrap())
                        .unwrap()
                        .value
                })
                .collect();
            variance(&values).sqrt()
        })
        .collect();
    for pair in spreads.windows(2) {
        assert!(pair[1] <= 1.5 * pair[0], "spreads {spreads:?}");
    }
}

#[test]
fn estimated_tuple_reproduces_third_order_verdicts() {
    let d = 4;
    let rho = isotropic_state(d, 0.9).unwrap();
    let exact = MomentTuple::exact(&rho);
    let slack = 0.04;
    let mut rng = RandomStream::new(58, 0).rng();
    let est = estimate_moment_tuple(&rho, 1500, 800, &mut rng).unwrap();
    let mut compared = 0;
    for k in 1..=d {
        let truth = third_order_criterion(&exact, d, k);
        if truth.witness.abs() > 3.0 * slack {
            compared += 1;
            assert_eq!(
                third_order_criterion_with_slack(&est.value, d, k, slack).detected,
                truth.detected,
                "k={k}"
            );
        }
    }
    assert!(compared >= 2);
}

#[test]
fn permutation_test_sample_count_is_dimension_free() {
    let shots = 10_000;
    let errors: Vec<f64> = [4usize, 16]
        .iter()
        .map(|&dim| {
            let rho = pure_state(dim, 59);
            let values: Vec<f64> = (0..100)
                .map(|run| {
                    let mut rng = RandomStream::new(60 + dim as u64, run).rng();
                    let est =
                        permutation_test_estimate(&[rho.clone(), rho.clone()], shots, &mut rng)
                            .unwrap();
                    assert!((est.value - 1.0).abs() <= 5.0 / (shots as f64).sqrt());
                    est.value
                })
                .collect();
            variance(&values).sqrt()
        })
        .collect();
    // a pure state gives P₊ = 1 exactly, so both spreads vanish; check a mixed case too
    assert!(errors.iter().all(|&e| e == 0.0));
    let spreads: Vec<f64> = [4usize, 16]
        .iter()
        .map(|&dim| {
            let rho = BipartiteDensity::maximally_mixed(dim, 1).into_matrix();
            let half = (rho.clone() + pure_state(dim, 61)) * kreduce::linalg::c64(0.5, 0.0);
            let values: Vec<f64> = (0..200)
                .map(|run| {
                    let mut rng = RandomStream::new(62 + dim as u64, run).rng();
                    permutation_test_estimate(&[half.clone(), half.clone()], shots, &mut rng)
                        .unwrap()
                        .value
                })
                .collect();
            variance(&values).sqrt()
        })
        .collect();
    assert!(spreads[1] <= 1.5 * spreads[0], "spreads {spreads:?}");
}
