use qcflat::algebra::{Quaternion, QuatMatrix};
use qcflat::calculus::SampleBox;
use qcflat::green::closed_form_cq;
use qcflat::heisenberg::{h_norm, left_diff, HeisPoint};
use qcflat::nayatani::{
    measure_from_atoms, rotation_invariant_measure, synthetic_sign_report, HeisNayatani,
    NayataniError, NayataniField,
};
use qcflat::rng::substream;
use qcflat::sphere::{random_sphere_point, rotation_elem, sphere_green_with, SpherePoint};
use rand::Rng;

fn chart_clear_point<R: Rng>(n: usize, rng: &mut R) -> SpherePoint {
    loop {
        let z = random_sphere_point(n, rng);
        if (Quaternion::ONE + z.coords()[n]).norm_sq() >= 0.5 {
            return z;
        }
    }
}

fn quarter_turn() -> qcflat::sphere::SpElement {
    let mut u = QuatMatrix::zeros(2, 2);
    u.set(0, 1, Quaternion::ONE);
    u.set(1, 0, Quaternion::ONE.scale(-1.0));
    rotation_elem(&u).unwrap()
}

#[test]
fn single_atom_density_is_a_pure_green_power() {
    let n = 1;
    let c_q = closed_form_cq(n).unwrap();
    let mut rng = substream(60, 1);
    let atom = chart_clear_point(n, &mut rng);
    let measure = measure_from_atoms(n, vec![(atom.clone(), 1.0)]).unwrap();
    let field = NayataniField::new(measure, 3.0, c_q).unwrap();
    for _ in 0..20 {
        let xi = chart_clear_point(n, &mut rng);
        if qcflat::sphere::gauge_distance(&xi, &atom) < 1e-2 {
            continue;
        }
        let phi = field.phi_gamma(&xi).unwrap();
        let g = sphere_green_with(c_q, n, &xi, &atom).unwrap();
        assert!((phi - g).abs() < 1e-12 * g);
    }
}

#[test]
fn single_atom_metric_is_flat() {
    let n = 1;
    let c_q = closed_form_cq(n).unwrap();
    let atom = HeisPoint::from_coords(n, &[0.3, -0.2, 0.5, 0.1, 0.2, -0.4, 0.3]);
    let pulled = HeisNayatani::new(n, 3.0, c_q, vec![(atom, 1.0)]).unwrap();
    let box_ = SampleBox::centered(n, 1.5);
    let mut rng = substream(60, 2);
    for _ in 0..20 {
        let xi = box_.sample(&mut rng);
        let a = match pulled.a_matrix(&xi) {
            Ok(a) => a,
            Err(NayataniError::AtomProximity { .. }) => continue,
            Err(e) => panic!("{e}"),
        };
        assert!(a.trace().abs() < 1e-13);
        assert!(pulled.scalar(&xi).unwrap().abs() < 1e-9);
        let check = pulled.scalar_crosscheck(&xi).unwrap();
        assert!(check.residual < 1e-8, "residual {:.3e}", check.residual);
    }
}

#[test]
fn two_atom_density_matches_direct_summation() {
    let n = 1;
    let c_q = closed_form_cq(n).unwrap();
    let mut rng = substream(60, 3);
    let a1 = chart_clear_point(n, &mut rng);
    let a2 = chart_clear_point(n, &mut rng);
    let delta = 2.5;
    let measure = measure_from_atoms(n, vec![(a1.clone(), 3.0), (a2.clone(), 1.0)]).unwrap();
    assert!((measure.atoms[0].1 - 0.75).abs() < 1e-15);
    let field = NayataniField::new(measure, delta, c_q).unwrap();
    let kappa = field.kappa;
    for _ in 0..10 {
        let xi = chart_clear_point(n, &mut rng);
        let phi = match field.phi_gamma(&xi) {
            Ok(v) => v,
            Err(NayataniError::AtomProximity { .. }) => continue,
            Err(e) => panic!("{e}"),
        };
        let direct = (0.75 * sphere_green_with(c_q, n, &xi, &a1).unwrap().powf(kappa)
            + 0.25 * sphere_green_with(c_q, n, &xi, &a2).unwrap().powf(kappa))
        .powf(1.0 / kappa);
        assert!((phi - direct).abs() < 1e-12 * direct);
    }
}

#[test]
fn invariant_measures_have_exact_equivariance() {
    let n = 1;
    let c_q = closed_form_cq(n).unwrap();
    let rot = quarter_turn();
    let base = SpherePoint::new(vec![
        Quaternion::new(0.6, 0.3, 0.0, 0.1),
        Quaternion::new(0.5, 0.0, 0.2, 0.0),
    ])
    .unwrap();
    let measure = rotation_invariant_measure(&base, &rot, 4).unwrap();
    assert_eq!(measure.atoms.len(), 4);
    let field = NayataniField::new(measure, 3.0, c_q).unwrap();
    let mut rng = substream(60, 4);
    for _ in 0..20 {
        let xi = chart_clear_point(n, &mut rng);
        match field.equivariance_residual(&rot, &xi) {
            Ok(r) => assert!(r < 1e-12, "residual {r:.3e}"),
            Err(NayataniError::AtomProximity { .. }) => continue,
            Err(e) => panic!("{e}"),
        }
    }
}

#[test]
fn chart_transport_is_consistent_with_the_sphere_density() {
    let n = 1;
    let c_q = closed_form_cq(n).unwrap();
    let mut rng = substream(60, 5);
    let atoms: Vec<(SpherePoint, f64)> = (0..5)
        .map(|_| (chart_clear_point(n, &mut rng), rng.gen_range(0.2..2.0)))
        .collect();
    let field =
        NayataniField::new(measure_from_atoms(n, atoms).unwrap(), 3.0, c_q).unwrap();
    let pulled = field.pulled_to_heis().unwrap();
    let mut done = 0;
    while done < 30 {
        let zeta = chart_clear_point(n, &mut rng);
        match field.pullback_consistency_residual(&pulled, &zeta) {
            Ok(r) => {
                assert!(r < 1e-9, "residual {r:.3e}");
                done += 1;
            }
            Err(NayataniError::AtomProximity { .. }) => continue,
            Err(e) => panic!("{e}"),
        }
    }
}

#[test]
fn a_matrix_is_positive_semidefinite() {
    let n = 1;
    let c_q = closed_form_cq(n).unwrap();
    let mut rng = substream(60, 6);
    let box_ = SampleBox::centered(n, 1.5);
    for _ in 0..100 {
        let count = rng.gen_range(2..6);
        let atoms: Vec<(HeisPoint, f64)> = (0..count)
            .map(|_| (box_.sample(&mut rng), rng.gen_range(0.1..1.0)))
            .collect();
        let pulled = HeisNayatani::new(n, rng.gen_range(0.5..6.0), c_q, atoms).unwrap();
        let xi = box_.sample(&mut rng);
        match pulled.a_matrix(&xi) {
            Ok(a) => {
                assert!(a.min_eigenvalue() >= -1e-12, "min {:.3e}", a.min_eigenvalue());
                assert!(a.trace() >= -1e-12);
            }
            Err(NayataniError::AtomProximity { .. }) => continue,
            Err(e) => panic!("{e}"),
        }
    }
}

#[test]
fn separated_atoms_spread_the_log_derivatives() {
    let n = 1;
    let c_q = closed_form_cq(n).unwrap();
    let mut plus = HeisPoint::origin(n);
    plus.y[0] = Quaternion::ONE;
    let mut minus = HeisPoint::origin(n);
    minus.y[0] = Quaternion::ONE.scale(-1.0);
    let pulled =
        HeisNayatani::new(n, 3.0, c_q, vec![(plus, 1.0), (minus, 1.0)]).unwrap();
    let a = pulled.a_matrix(&HeisPoint::origin(n)).unwrap();
    assert!(a.entries[0][0] > 1e-3, "A_11 = {:.3e}", a.entries[0][0]);
    assert!(a.trace() > 0.0);
}

#[test]
fn weight_scaling_shifts_density_and_curvature_by_known_powers() {
    let n = 1;
    let c_q = closed_form_cq(n).unwrap();
    let delta = 3.0;
    let q = qcflat::homogeneous_dim(n);
    let kappa = 2.0 * delta / (q - 2.0);
    let mut rng = substream(60, 7);
    let box_ = SampleBox::centered(n, 1.0);
    let atoms: Vec<(HeisPoint, f64)> = (0..4)
        .map(|_| (box_.sample(&mut rng), rng.gen_range(0.2..1.0)))
        .collect();
    let c = 3.7;
    let scaled: Vec<(HeisPoint, f64)> =
        atoms.iter().map(|(p, w)| (p.clone(), c * w)).collect();
    let base = HeisNayatani::new(n, delta, c_q, atoms).unwrap();
    let big = HeisNayatani::new(n, delta, c_q, scaled).unwrap();
    let mut done = 0;
    while done < 10 {
        let xi = box_.sample(&mut rng);
        let (u0, u1) = match (base.conformal_density(&xi), big.conformal_density(&xi)) {
            (Ok(a), Ok(b)) => (a, b),
            _ => continue,
        };
        assert!((u1 / u0 - c.powf(1.0 / kappa)).abs() < 1e-10);
        let s0 = base.scalar(&xi).unwrap();
        let s1 = big.scalar(&xi).unwrap();
        assert_eq!(s0.signum(), s1.signum());
        if s0.abs() > 1e-12 {
            assert!((s1 / s0 - c.powf(-2.0 / delta)).abs() < 1e-9);
        }
        let a0 = base.a_matrix(&xi).unwrap();
        let a1 = big.a_matrix(&xi).unwrap();
        assert!((a0.trace() - a1.trace()).abs() < 1e-12 * a0.trace().abs().max(1e-12));
        done += 1;
    }
}

#[test]
fn curvature_routes_agree_on_random_configurations() {
    let n = 1;
    let c_q = closed_form_cq(n).unwrap();
    let mut rng = substream(60, 8);
    let box_ = SampleBox::centered(n, 1.5);
    let mut done = 0;
    while done < 50 {
        let count = rng.gen_range(2..5);
        let atoms: Vec<(HeisPoint, f64)> = (0..count)
            .map(|_| (box_.sample(&mut rng), rng.gen_range(0.1..1.0)))
            .collect();
        let pulled = HeisNayatani::new(n, rng.gen_range(1.0..6.0), c_q, atoms).unwrap();
        let xi = box_.sample(&mut rng);
        match pulled.scalar_crosscheck(&xi) {
            Ok(check) => {
                assert!(check.residual < 1e-8, "residual {:.3e}", check.residual);
                done += 1;
            }
            Err(NayataniError::AtomProximity { .. }) => continue,
            Err(e) => panic!("{e}"),
        }
    }
}

#[test]
fn synthetic_reports_follow_the_sign_law() {
    let n = 1;
    let c_q = closed_form_cq(n).unwrap();

    let zero = synthetic_sign_report(n, 4.0, 6, 20, 91, c_q).unwrap();
    assert_eq!(zero.branch, "zero");
    assert_eq!(zero.threshold, 4.0);
    assert_eq!(zero.atom_count, 6);
    assert_eq!(zero.samples.len(), 20);
    for s in &zero.samples {
        assert_eq!(s.sign, 0);
        assert!(s.scalar.abs() < 1e-10);
        assert!(s.crosscheck_residual < 1e-6);
    }

    let neg = synthetic_sign_report(n, 5.0, 6, 20, 91, c_q).unwrap();
    assert_eq!(neg.branch, "negative");
    for s in &neg.samples {
        assert_eq!(s.sign, -1, "scalar {:.3e}", s.scalar);
        assert!(s.crosscheck_residual < 1e-6);
    }

    let pos = synthetic_sign_report(n, 2.0, 6, 20, 91, c_q).unwrap();
    assert_eq!(pos.branch, "positive");
    for s in &pos.samples {
        assert_eq!(s.sign, 1, "scalar {:.3e}", s.scalar);
        assert!(s.crosscheck_residual < 1e-6);
    }

    assert!(zero.flags.iter().any(|f| f == "synthetic-measure"));
}

#[test]
fn invalid_inputs_are_rejected() {
    let n = 1;
    let c_q = closed_form_cq(n).unwrap();
    assert!(matches!(
        measure_from_atoms(n, vec![]),
        Err(NayataniError::EmptyMeasure)
    ));
    assert!(matches!(
        HeisNayatani::new(n, 0.0, c_q, vec![(HeisPoint::origin(n), 1.0)]),
        Err(NayataniError::NonPositiveDelta { .. })
    ));
    let mut rng = substream(60, 9);
    let atom = chart_clear_point(n, &mut rng);
    let field = NayataniField::new(
        measure_from_atoms(n, vec![(atom.clone(), 1.0)]).unwrap(),
        -1.0,
        c_q,
    );
    assert!(matches!(field, Err(NayataniError::NonPositiveDelta { .. })));
    let field = NayataniField::new(
        measure_from_atoms(n, vec![(atom.clone(), 1.0)]).unwrap(),
        3.0,
        c_q,
    )
    .unwrap();
    assert!(matches!(
        field.phi_gamma(&atom),
        Err(NayataniError::AtomProximity { .. })
    ));
}

#[test]
fn report_serialization_round_trips() {
    let n = 1;
    let c_q = closed_form_cq(n).unwrap();
    let rep = synthetic_sign_report(n, 5.0, 4, 5, 17, c_q).unwrap();
    let json = rep.to_json();
    assert_eq!(json["branch"], "negative");
    assert_eq!(json["samples"].as_array().unwrap().len(), 5);
    let mut csv = Vec::new();
    rep.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().count(), 6);
    assert!(text.starts_with("scalar,sign,"));
}

#[test]
fn proximity_guard_uses_the_gauge_distance() {
    let n = 1;
    let c_q = closed_form_cq(n).unwrap();
    let atom = HeisPoint::from_coords(n, &[0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    let pulled = HeisNayatani::new(n, 3.0, c_q, vec![(atom.clone(), 1.0)]).unwrap();
    let mut near = atom.clone();
    near.y[0] = near.y[0] + Quaternion::new(1e-8, 0.0, 0.0, 0.0);
    assert!(matches!(
        pulled.f(&near),
        Err(NayataniError::AtomProximity { .. })
    ));
    let far = HeisPoint::from_coords(n, &[1.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    let gap = h_norm(&left_diff(&far, &atom).unwrap());
    assert!(gap > 0.9);
    assert!(pulled.f(&far).is_ok());
}
