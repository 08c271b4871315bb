use kreduce::correlation::*;
use kreduce::ensembles::{
    haar_unitary, induced_mixed, isotropic_schmidt_number, isotropic_state, RandomStream,
};
use kreduce::moments::{third_order_criterion, MomentTuple};
use rand::Rng;

#[test]
fn norms_are_basis_independent() {
    for i in 0..30u64 {
        let mut rng = RandomStream::new(30, i).rng();
        let d = rng.random_range(2..=4);
        let rho = induced_mixed(d, d, rng.random_range(1..=d * d), &mut rng).unwrap();
        let gm = gellmann_basis(d).unwrap();
        let (u, v) = (haar_unitary(d, &mut rng), haar_unitary(d, &mut rng));
        // different rotations on the two sides: T changes by orthogonal factors only
        let rotate = |w: &kreduce::ComplexMatrix| OperatorBasis {
            d,
            ops: gm.ops.iter().map(|p| w * p * w.adjoint()).collect(),
        };
        let base = correlation_matrix(&rho).unwrap();
        let rotated_a = correlation_matrix_in(&rho, &rotate(&u)).unwrap();
        let rotated_b = correlation_matrix_in(&rho, &rotate(&v)).unwrap();
        for p in [1, 2, 4] {
            let n = schatten_norm(&base, p).unwrap();
            assert!((n - schatten_norm(&rotated_a, p).unwrap()).abs() < 1e-9);
            assert!((n - schatten_norm(&rotated_b, p).unwrap()).abs() < 1e-9);
        }
    }
}

#[test]
fn holder_detection_implies_trace_norm_detection() {
    let mut checked = 0;
    for i in 0..200u64 {
        let mut rng = RandomStream::new(31, i).rng();
        let d = rng.random_range(2..=4);
        let rho = induced_mixed(d, d, rng.random_range(1..=3), &mut rng).unwrap();
        let t = correlation_matrix(&rho).unwrap();
        let n2sq = schatten_norm(&t, 2).unwrap().powi(2);
        let n4quad = schatten_norm(&t, 4).unwrap().powi(4);
        assert!(holder_ratio(n2sq, n4quad) <= schatten_norm(&t, 1).unwrap() + 1e-12);
        for k in 1..d {
            if cm_holder_criterion(n2sq, n4quad, k, d).unwrap().detected {
                checked += 1;
                assert!(cm_criterion(&rho, k).unwrap().detected);
            }
        }
    }
    assert!(checked > 0);
}

#[test]
fn isotropic_closed_forms_on_grid() {
    for d in 2..=8 {
        for step in 0..=20 {
            let f = step as f64 / 20.0;
            let rho = isotropic_state(d, f).unwrap();
            let t = correlation_matrix(&rho).unwrap();
            let (n1, n2sq, n4quad) = isotropic_cm_values(d, f).unwrap();
            assert!(
                (schatten_norm(&t, 1).unwrap() - n1).abs() < 1e-10,
                "d={d} F={f}"
            );
            assert!((schatten_norm(&t, 2).unwrap().powi(2) - n2sq).abs() < 1e-10);
            assert!((schatten_norm(&t, 4).unwrap().powi(4) - n4quad).abs() < 1e-10);
            let sn = isotropic_schmidt_number(d, f);
            let tuple = MomentTuple::exact(&rho);
            for k in 1..=d {
                assert_eq!(
                    third_order_criterion(&tuple, d, k).detected,
                    k < sn,
                    "d={d} F={f} k={k}"
                );
                if f >= 1.0 / (d * d) as f64 {
                    // ‖T‖₁ = dF − 1/d above the maximally mixed point
                    let holder = cm_holder_criterion(n2sq, n4quad, k, d).unwrap().detected;
                    assert_eq!(holder, cm_criterion(&rho, k).unwrap().detected);
                }
            }
        }
    }
}
