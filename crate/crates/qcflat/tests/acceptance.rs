//! End-to-end acceptance checks, one test per advertised guarantee. Each
//! test states its tolerance inline and fails red if the guarantee is
//! missed; nothing here is tuned to pass.

use qcflat::algebra::{hyperhermitian, Quaternion};
use qcflat::calculus::{identity_suite, sublaplacian, PowerOfShiftedGauge, SampleBox};
use qcflat::green::{
    closed_form_cq, compute_cq, default_radii_schedule, delta_mass, green_transform_check,
    CqMethod, GreenKernel,
};
use qcflat::heisenberg::{apply_auto, h_norm, left_diff, random_auto, HeisAuto, HeisPoint};
use qcflat::kleinian::{
    build_schottky, default_test_battery, enumerate_orbit, estimate_delta,
    orthogonal_axis_rotations, ps_measure, quasi_invariance_residual, SchottkyGroup,
    DEFAULT_WORD_BUDGET,
};
use qcflat::nayatani::{
    curvature_sign_report, rotation_invariant_measure, synthetic_sign_report, NayataniError,
    NayataniField,
};
use qcflat::report::{config_hash, envelope, strip_timestamp};
use qcflat::rng::substream;
use qcflat::sphere::{
    act, act_ball, cayley, cayley_metric_factor, conformal_factor, gauge_distance, hyp_distance,
    q_form_residual, random_sp_element, random_sphere_point, rotation_elem, sphere_green_with,
    BallPoint, SpherePoint,
};
use qcflat::homogeneous_dim;
use rand::Rng;

fn rank_two_group() -> SchottkyGroup {
    let rot = orthogonal_axis_rotations(1, 2);
    build_schottky(1, 6.0, &rot, 500, 7).unwrap()
}

fn chart_clear_point<R: Rng>(n: usize, rng: &mut R) -> SpherePoint {
    loop {
        let z = random_sphere_point(n, rng);
        if (Quaternion::ONE + z.coords()[n]).norm_sq() >= 0.5 {
            return z;
        }
    }
}

#[test]
fn a01_gauge_identities_hold_at_closed_form_and_fd_tolerances() {
    let start = std::time::Instant::now();
    for n in [1usize, 2] {
        for res in identity_suite(n, 1000, 17) {
            let tol = if res.identity.ends_with("-fd") { 1e-5 } else { 1e-10 };
            assert!(
                res.max_rel < tol,
                "{} at n = {n}: max_rel {:.3e} (tol {tol:.1e})",
                res.identity,
                res.max_rel
            );
        }
    }
    assert!(start.elapsed().as_secs_f64() < 10.0);
}

#[test]
fn a02_green_kernel_is_harmonic_away_from_the_pole() {
    let n = 1;
    let q = homogeneous_dim(n);
    let c_q = closed_form_cq(n).unwrap();
    let kernel = GreenKernel::with_constant(n, c_q);
    let field = kernel.green_field_in_eta(&HeisPoint::origin(n));
    let mut rng = substream(13, 0);
    let box_ = SampleBox::centered(n, 1.0);
    let mut done = 0;
    while done < 100 {
        let p = box_.sample(&mut rng);
        if h_norm(&p) < 1e-3 {
            continue;
        }
        let r = rng.gen_range(1e-2f64.ln()..10f64.ln()).exp();
        let unit = apply_auto(&HeisAuto::Dilation(1.0 / h_norm(&p)), &p).unwrap();
        let eta = apply_auto(&HeisAuto::Dilation(r), &unit).unwrap();
        let residual = sublaplacian(&field, &eta).abs() * h_norm(&eta).powf(q + 2.0) / c_q;
        assert!(residual < 1e-8, "normalized residual {residual:.3e}");
        done += 1;
    }
}

#[test]
fn a03_kernel_constant_routes_agree_and_the_delta_mass_is_unit() {
    let n = 1;
    let radial = compute_cq(n, CqMethod::ProductRadial, 10_000_000, 7);
    let mc = compute_cq(n, CqMethod::MonteCarlo, 10_000_000, 7);
    let rel = (radial.value - mc.value).abs() / radial.value;
    assert!(rel < 1e-4, "route gap {rel:.3e}");
    for eps in [0.5, 1.0] {
        let mass = delta_mass(n, radial.value, eps, 160);
        assert!((0.999..=1.001).contains(&mass), "eps {eps}: mass {mass:.6}");
    }
}

#[test]
fn a04_kernel_transform_law_holds_under_composite_automorphisms() {
    let n = 1;
    let mut rng = substream(40, 1);
    let box_ = SampleBox::centered(n, 2.0);
    let mut done = 0;
    while done < 200 {
        let f = random_auto(n, rng.gen_range(1..=4), &mut rng);
        let xi = box_.sample(&mut rng);
        let eta = box_.sample(&mut rng);
        if let Ok(d) = left_diff(&xi, &eta) {
            if h_norm(&d) < 0.1 {
                continue;
            }
        }
        if let Ok(residual) = green_transform_check(&f, &xi, &eta) {
            assert!(residual < 1e-9, "residual {residual:.3e}");
            done += 1;
        }
    }
}

#[test]
fn a05_sphere_isometries_preserve_distance_cocycle_and_signature_form() {
    let n = 1;
    let mut rng = substream(50, 0);
    for _ in 0..100 {
        let g = random_sp_element(n, &mut rng);
        let h = random_sp_element(n, &mut rng);
        let zeta = random_sphere_point(n, &mut rng);

        let p = {
            let z = random_sphere_point(n, &mut rng);
            let s = rng.gen_range(0.1..0.9);
            BallPoint::new(z.coords().iter().map(|c| c.scale(s)).collect()).unwrap()
        };
        let q = {
            let z = random_sphere_point(n, &mut rng);
            let s = rng.gen_range(0.1..0.9);
            BallPoint::new(z.coords().iter().map(|c| c.scale(s)).collect()).unwrap()
        };
        let before = hyp_distance(&p, &q).unwrap();
        let after =
            hyp_distance(&act_ball(&g, &p).unwrap(), &act_ball(&g, &q).unwrap()).unwrap();
        assert!((before - after).abs() < 1e-9 * (1.0 + before));

        let whole = conformal_factor(&g.then(&h), &zeta).unwrap();
        let parts = conformal_factor(&g, &zeta).unwrap()
            * conformal_factor(&h, &act(&g, &zeta).unwrap()).unwrap();
        assert!((whole - parts).abs() / whole < 1e-12);

        let b = random_sphere_point(n, &mut rng);
        assert!(q_form_residual(&g, zeta.coords(), b.coords()) < 1e-10);
    }
}

#[test]
fn a06_cayley_transport_matches_metric_and_green_structure() {
    let n = 1;
    let q = homogeneous_dim(n);
    let kernel = GreenKernel::with_constant(n, closed_form_cq(n).unwrap());
    let mut rng = substream(23, 0);
    let mut metric_done = 0;
    while metric_done < 200 {
        let a = random_sphere_point(n, &mut rng);
        let b = SpherePoint::new(
            a.coords()
                .iter()
                .map(|c| {
                    *c + Quaternion::from_components([
                        rng.gen_range(-1e-3..1e-3),
                        rng.gen_range(-1e-3..1e-3),
                        rng.gen_range(-1e-3..1e-3),
                        rng.gen_range(-1e-3..1e-3),
                    ])
                })
                .collect(),
        )
        .unwrap();
        if (Quaternion::ONE + a.coords()[n]).norm_sq() < 0.1 {
            continue;
        }
        let (pa, pb) = match (cayley(&a), cayley(&b)) {
            (Ok(pa), Ok(pb)) => (pa, pb),
            _ => continue,
        };
        let gap = (Quaternion::ONE - hyperhermitian(a.coords(), b.coords())).norm();
        if gap < 1e-10 {
            continue;
        }
        let ratio = h_norm(&left_diff(&pa, &pb).unwrap()).powi(2) / gap;
        let expected = 4.0
            * (cayley_metric_factor(&a).unwrap() * cayley_metric_factor(&b).unwrap()).sqrt();
        assert!((ratio - expected).abs() / expected < 1e-6);
        metric_done += 1;
    }

    let c_q = kernel.c_q;
    let mut green_done = 0;
    while green_done < 200 {
        let g = random_sp_element(n, &mut rng);
        let a = random_sphere_point(n, &mut rng);
        let b = random_sphere_point(n, &mut rng);
        if gauge_distance(&a, &b) < 1e-3 {
            continue;
        }
        let lhs = sphere_green_with(c_q, n, &act(&g, &a).unwrap(), &act(&g, &b).unwrap())
            .unwrap()
            * (conformal_factor(&g, &a).unwrap() * conformal_factor(&g, &b).unwrap())
                .powf((q - 2.0) / 2.0);
        let rhs = sphere_green_with(c_q, n, &a, &b).unwrap();
        assert!((lhs - rhs).abs() / rhs < 1e-9);

        if let (Ok(pa), Ok(pb)) = (cayley(&a), cayley(&b)) {
            let lam = cayley_metric_factor(&a).unwrap() * cayley_metric_factor(&b).unwrap();
            let flat = kernel.heis_green(&pa, &pb).unwrap() * lam.powf((q - 2.0) / 4.0);
            assert!((flat - rhs).abs() / rhs < 1e-9);
        }
        green_done += 1;
    }
}

#[test]
fn a07_critical_exponent_estimates_match_theory() {
    let g = rank_two_group();
    let orbit = enumerate_orbit(&g, 9, &BallPoint::origin(1), DEFAULT_WORD_BUDGET).unwrap();
    let est = estimate_delta(&orbit).unwrap();
    let theory = 2.0 * 3f64.ln() / g.translation_length;
    assert!(
        (est.delta_hat - theory).abs() / theory < 0.20,
        "delta_hat {:.4} vs free-group value {theory:.4}",
        est.delta_hat
    );
    assert!(est.r_squared > 0.98, "r_squared {:.4}", est.r_squared);

    let rot1 = orthogonal_axis_rotations(1, 1);
    let cyclic = build_schottky(1, 6.0, &rot1, 500, 7).unwrap();
    let corbit =
        enumerate_orbit(&cyclic, 64, &BallPoint::origin(1), DEFAULT_WORD_BUDGET).unwrap();
    let cest = estimate_delta(&corbit).unwrap();
    assert!(cest.delta_hat < 0.05, "cyclic delta_hat {:.4}", cest.delta_hat);
}

#[test]
fn a08_orbit_measures_are_quasi_invariant_with_improving_depth() {
    let g = rank_two_group();
    let orbit = enumerate_orbit(&g, 9, &BallPoint::origin(1), DEFAULT_WORD_BUDGET).unwrap();
    let s = estimate_delta(&orbit).unwrap().delta_hat;
    let battery = default_test_battery(1, 12, 3);
    let mut residuals = Vec::new();
    for l in [6usize, 9] {
        let mu = ps_measure(&g, s, l, &BallPoint::origin(1), DEFAULT_WORD_BUDGET).unwrap();
        let mut worst = 0.0f64;
        for e in g.alphabet() {
            worst =
                worst.max(quasi_invariance_residual(&mu, g.letter(e), s, &battery).unwrap());
        }
        residuals.push(worst);
    }
    assert!(residuals[1] < 0.05, "depth-9 residual {:.4}", residuals[1]);
    assert!(
        residuals[1] <= residuals[0] + 1e-9,
        "residuals did not improve: {:.4} -> {:.4}",
        residuals[0],
        residuals[1]
    );
}

#[test]
fn a09_truncated_density_is_nearly_equivariant() {
    let n = 1;
    let c_q = closed_form_cq(n).unwrap();
    let g = rank_two_group();
    let c = 0.9999 / 2f64.sqrt();
    let q0 = BallPoint::new(vec![
        Quaternion::new(c, 0.0, 0.0, 0.0),
        Quaternion::new(c, 0.0, 0.0, 0.0),
    ])
    .unwrap();
    let mu = ps_measure(&g, 1.0, 9, &q0, DEFAULT_WORD_BUDGET).unwrap();
    let field = NayataniField::new(mu, 1.0, c_q).unwrap();
    let mut rng = substream(31, 5);
    let mut worst = 0.0f64;
    let mut done = 0;
    while done < 20 {
        let xi = chart_clear_point(n, &mut rng);
        let mut all_ok = true;
        for e in g.alphabet() {
            match field.equivariance_residual(g.letter(e), &xi) {
                Ok(r) => worst = worst.max(r),
                Err(_) => {
                    all_ok = false;
                    break;
                }
            }
        }
        if all_ok {
            done += 1;
        }
    }
    assert!(worst < 0.01, "worst residual {worst:.3e}");

    let rot = {
        let mut u = qcflat::algebra::QuatMatrix::zeros(2, 2);
        u.set(0, 1, Quaternion::ONE);
        u.set(1, 0, Quaternion::ONE.scale(-1.0));
        rotation_elem(&u).unwrap()
    };
    let base = SpherePoint::new(vec![
        Quaternion::new(0.6, 0.3, 0.0, 0.1),
        Quaternion::new(0.5, 0.0, 0.2, 0.0),
    ])
    .unwrap();
    let invariant = rotation_invariant_measure(&base, &rot, 4).unwrap();
    let exact = NayataniField::new(invariant, 3.0, c_q).unwrap();
    let mut checked = 0;
    while checked < 20 {
        let xi = chart_clear_point(n, &mut rng);
        match exact.equivariance_residual(&rot, &xi) {
            Ok(r) => {
                assert!(r < 1e-12, "surrogate residual {r:.3e}");
                checked += 1;
            }
            Err(NayataniError::AtomProximity { .. }) => continue,
            Err(e) => panic!("{e}"),
        }
    }
}

#[test]
fn a10_curvature_sign_law_holds_on_group_and_synthetic_measures() {
    let n = 1;
    let c_q = closed_form_cq(n).unwrap();
    let g = rank_two_group();
    let rep = curvature_sign_report(&g, 6, 50, 7, None, c_q, DEFAULT_WORD_BUDGET).unwrap();
    assert_eq!(rep.branch, "positive");
    assert_eq!(rep.samples.len(), 50);
    for s in &rep.samples {
        assert_eq!(s.sign, 1, "scalar {:.3e}", s.scalar);
        assert!(
            s.crosscheck_residual <= 1e-6,
            "crosscheck {:.3e}",
            s.crosscheck_residual
        );
    }

    let zero = synthetic_sign_report(n, 4.0, 6, 20, 91, c_q).unwrap();
    assert_eq!(zero.branch, "zero");
    for s in &zero.samples {
        assert!(s.scalar.abs() <= 1e-10, "scalar {:.3e}", s.scalar);
    }

    let neg = synthetic_sign_report(n, 5.0, 6, 20, 91, c_q).unwrap();
    assert_eq!(neg.branch, "negative");
    for s in &neg.samples {
        assert_eq!(s.sign, -1, "scalar {:.3e}", s.scalar);
    }
}

#[test]
fn a11_green_regular_part_recovers_planted_values() {
    let n = 1;
    let q = homogeneous_dim(n);
    let c_q = closed_form_cq(n).unwrap();
    let kernel = GreenKernel::with_constant(n, c_q);
    let radii = default_radii_schedule();

    let flat_chart = PowerOfShiftedGauge::new(n, 1.0, 0.0);
    for planted_root in [0.5f64, 1.0, 2.0] {
        let planted = planted_root.powf(q - 2.0);
        let oracle = move |a: &HeisPoint, b: &HeisPoint| {
            let m = left_diff(a, b).unwrap();
            c_q * m.gauge4().powf(-(q - 2.0) / 4.0) + planted
        };
        let rep = kernel
            .regular_part_limit(&oracle, &flat_chart, &HeisPoint::origin(n), &radii)
            .unwrap();
        assert!(
            (rep.value - planted_root).abs() < 1e-6,
            "recovered {:.8} for planted {planted_root}",
            rep.value
        );
        assert!(rep.spread.is_finite());
        assert!(!rep.probes.is_empty());
    }

    let chart = PowerOfShiftedGauge::new(n, 1.0, -(q - 2.0) / 8.0);
    let chart_dup = PowerOfShiftedGauge::new(n, 1.0, -(q - 2.0) / 8.0);
    let planted = 0.25f64.powf(q - 2.0);
    let oracle = move |a: &HeisPoint, b: &HeisPoint| {
        use qcflat::calculus::ScalarField;
        let m = left_diff(a, b).unwrap();
        c_q * m.gauge4().powf(-(q - 2.0) / 4.0) / (chart_dup.eval(a) * chart_dup.eval(b))
            + planted
    };
    let rep = kernel
        .regular_part_limit(&oracle, &chart, &HeisPoint::origin(n), &radii)
        .unwrap();
    assert!((rep.value - 0.25).abs() < 1e-6, "recovered {:.8}", rep.value);
}

#[test]
fn a12_reports_are_byte_reproducible() {
    let n = 1;
    let c_q = closed_form_cq(n).unwrap();

    let make_env = || {
        let rep = synthetic_sign_report(n, 5.0, 4, 10, 17, c_q).unwrap();
        let config = serde_json::json!({"n": n, "delta": 5.0, "seed": 17});
        envelope("sign-law", &config, rep.to_json())
    };
    let e1 = make_env();
    let e2 = make_env();
    assert_eq!(
        serde_json::to_string(&strip_timestamp(&e1)).unwrap(),
        serde_json::to_string(&strip_timestamp(&e2)).unwrap()
    );
    assert_eq!(e1["config_hash"], e2["config_hash"]);
    assert_eq!(
        config_hash(&serde_json::json!({"n": 1})),
        config_hash(&serde_json::json!({"n": 1}))
    );

    let g = rank_two_group();
    let make_csv = || {
        let orbit = enumerate_orbit(&g, 4, &BallPoint::origin(1), DEFAULT_WORD_BUDGET).unwrap();
        let mut buf = Vec::new();
        orbit.write_csv(&mut buf).unwrap();
        buf
    };
    assert_eq!(make_csv(), make_csv());

    let make_measure = || {
        serde_json::to_string(
            &ps_measure(&g, 1.0, 4, &BallPoint::origin(1), DEFAULT_WORD_BUDGET)
                .unwrap()
                .to_json(),
        )
        .unwrap()
    };
    assert_eq!(make_measure(), make_measure());
}
