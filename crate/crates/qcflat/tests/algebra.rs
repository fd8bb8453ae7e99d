use proptest::prelude::*;
use qcflat::algebra::{
    hyperhermitian, im_bilinear, im_decompose, qinv, qmul, qvec_norm_sq, random_unit_quaternion,
    random_unitary, structure_matrix_residual, vec_mat, AlgebraError, QuatMatrix, Quaternion, B,
    B_INT,
};
use qcflat::rng::seeded;

fn q(w: f64, x: f64, y: f64, z: f64) -> Quaternion {
    Quaternion::new(w, x, y, z)
}

#[test]
fn hamilton_table() {
    let (i, j, k) = (Quaternion::I, Quaternion::J, Quaternion::K);
    let minus_one = -Quaternion::ONE;
    assert_eq!(qmul(i, i), minus_one);
    assert_eq!(qmul(j, j), minus_one);
    assert_eq!(qmul(k, k), minus_one);
    assert_eq!(qmul(i, j), k);
    assert_eq!(qmul(j, k), i);
    assert_eq!(qmul(k, i), j);
    assert_eq!(qmul(j, i), -k);
    assert_eq!(qmul(qmul(i, j), k), minus_one);
}

#[test]
fn inverse_roundtrip() {
    let a = q(1.0, -2.0, 0.5, 3.0);
    let inv = qinv(a).unwrap();
    assert!((qmul(a, inv) - Quaternion::ONE).norm() < 1e-15);
    assert!((qmul(inv, a) - Quaternion::ONE).norm() < 1e-15);
    assert!(matches!(
        qinv(Quaternion::ZERO),
        Err(AlgebraError::ZeroDivision { .. })
    ));
}

#[test]
fn decompose_matches_components() {
    let a = q(1.5, -0.25, 2.0, -3.0);
    let (re, im) = im_decompose(a);
    assert_eq!(re, 1.5);
    assert_eq!(im, [-0.25, 2.0, -3.0]);
}

#[test]
fn structure_matrices_satisfy_relations() {
    assert_eq!(structure_matrix_residual(&B), 0.0);
    for s in 0..3 {
        for k in 0..4 {
            for j in 0..4 {
                assert_eq!(B[s][k][j], B_INT[s][k][j] as f64);
            }
        }
    }
}

#[test]
fn corrupted_structure_matrix_is_detected() {
    for s in 0..3 {
        let mut bad = B;
        bad[s][1][3] += 0.25;
        assert!(structure_matrix_residual(&bad) >= 0.25);
    }
}

#[test]
fn bilinear_form_matches_hamilton_product() {
    let mut rng = seeded(11);
    for _ in 0..50 {
        let a = random_unit_quaternion(&mut rng).scale(1.7);
        let b = random_unit_quaternion(&mut rng).scale(0.6);
        let (_, im) = im_decompose(qmul(a, b.conj()));
        for s in 0..3 {
            let form = im_bilinear(s, a.components(), b.components());
            assert!((form - im[s]).abs() < 1e-14);
        }
    }
}

#[test]
fn random_unitary_is_unitary() {
    let mut rng = seeded(3);
    for dim in 1..=3 {
        for _ in 0..20 {
            let u = random_unitary(dim, &mut rng);
            let residual = u
                .mat_mul(&u.conj_t())
                .max_entry_dist(&QuatMatrix::identity(dim));
            assert!(residual < 1e-12, "dim {dim} residual {residual:.3e}");
        }
    }
}

#[test]
fn row_vector_action_is_associative_with_matrix_product() {
    let mut rng = seeded(5);
    let dim = 3;
    let a = random_unitary(dim, &mut rng);
    let b = random_unitary(dim, &mut rng);
    let v: Vec<Quaternion> = (0..dim).map(|_| random_unit_quaternion(&mut rng)).collect();
    let lhs = vec_mat(&v, &a.mat_mul(&b));
    let rhs = vec_mat(&vec_mat(&v, &a), &b);
    for (x, y) in lhs.iter().zip(rhs.iter()) {
        assert!((*x - *y).norm() < 1e-13);
    }
}

#[test]
fn conjugate_transpose_reverses_products() {
    let mut rng = seeded(9);
    let a = random_unitary(2, &mut rng);
    let b = random_unitary(2, &mut rng);
    let lhs = a.mat_mul(&b).conj_t();
    let rhs = b.conj_t().mat_mul(&a.conj_t());
    assert!(lhs.max_entry_dist(&rhs) < 1e-14);
}

fn arb_quat() -> impl Strategy<Value = Quaternion> {
    prop::array::uniform4(-2.0f64..2.0).prop_map(Quaternion::from_components)
}

proptest! {
    #[test]
    fn product_is_associative(a in arb_quat(), b in arb_quat(), c in arb_quat()) {
        let lhs = qmul(qmul(a, b), c);
        let rhs = qmul(a, qmul(b, c));
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn norm_is_multiplicative(a in arb_quat(), b in arb_quat()) {
        prop_assert!((qmul(a, b).norm() - a.norm() * b.norm()).abs() < 1e-12);
    }

    #[test]
    fn conjugate_reverses_product(a in arb_quat(), b in arb_quat()) {
        let lhs = qmul(a, b).conj();
        let rhs = qmul(b.conj(), a.conj());
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn pairing_is_conjugate_symmetric(
        a in prop::collection::vec(arb_quat(), 2),
        b in prop::collection::vec(arb_quat(), 2),
    ) {
        let lhs = hyperhermitian(&a, &b);
        let rhs = hyperhermitian(&b, &a).conj();
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn vector_norm_is_real_part_of_pairing(v in prop::collection::vec(arb_quat(), 3)) {
        let pairing = hyperhermitian(&v, &v);
        prop_assert!((pairing.re() - qvec_norm_sq(&v)).abs() < 1e-12);
        let (_, im) = im_decompose(pairing);
        prop_assert!(im.iter().all(|x| x.abs() < 1e-12));
        prop_assert!(qvec_norm_sq(&v) >= 0.0);
    }
}
