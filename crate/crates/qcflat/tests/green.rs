use qcflat::calculus::{sublaplacian, PowerOfShiftedGauge, SampleBox, ScalarField};
use qcflat::green::{
    closed_form_cq, compute_cq, compute_cq_cached, default_radii_schedule, delta_mass,
    green_transform_check, CqMethod, GreenError, GreenKernel,
};
use qcflat::heisenberg::{
    apply_auto, h_norm, left_diff, random_auto, HeisAuto, HeisPoint,
};
use qcflat::rng::{seeded, substream};
use qcflat::homogeneous_dim;
use rand::Rng;

#[test]
fn radial_quadrature_hits_the_closed_forms() {
    let pi = std::f64::consts::PI;
    assert!((closed_form_cq(1).unwrap() - 1.0 / (12.0 * pi.powi(4))).abs() < 1e-18);
    assert!((closed_form_cq(2).unwrap() - 3.0 / (4.0 * pi.powi(6))).abs() < 1e-18);
    assert!(closed_form_cq(3).is_none());
    for n in [1usize, 2] {
        let est = compute_cq(n, CqMethod::ProductRadial, 60_000, 1);
        let exact = closed_form_cq(n).unwrap();
        let rel = (est.value - exact).abs() / exact;
        assert!(rel < 1e-7, "n = {n}: rel {rel:.3e}");
        assert!(rel <= 4.0 * (est.error / exact).max(1e-12));
    }
}

#[test]
fn monte_carlo_agrees_with_radial() {
    let radial = compute_cq(1, CqMethod::ProductRadial, 1_000_000, 7);
    let mc = compute_cq(1, CqMethod::MonteCarlo, 1_000_000, 7);
    let rel = (radial.value - mc.value).abs() / radial.value;
    assert!(rel < 1e-3, "rel {rel:.3e}");
    assert!((radial.value - mc.value).abs() < 5.0 * (radial.error + mc.error));
}

#[test]
fn kernel_is_harmonic_away_from_the_pole() {
    let n = 1;
    let q = homogeneous_dim(n);
    let c_q = closed_form_cq(n).unwrap();
    let kernel = GreenKernel::with_constant(n, c_q);
    let field = kernel.green_field_in_eta(&HeisPoint::origin(n));
    let mut rng = seeded(13);
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
        assert!(residual < 1e-8, "at gauge radius {r:.3e}: {residual:.3e}");
        done += 1;
    }
}

#[test]
fn transform_law_over_composite_automorphisms() {
    let n = 1;
    let mut rng = substream(40, 1);
    let box_ = SampleBox::centered(n, 2.0);
    let mut done = 0;
    let mut attempts = 0;
    while done < 200 && attempts < 20_000 {
        attempts += 1;
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
    assert_eq!(done, 200, "exhausted attempts before 200 valid triples");
}

#[test]
fn delta_mass_is_normalized() {
    let c_q = closed_form_cq(1).unwrap();
    for eps in [0.5, 1.0] {
        let mass = delta_mass(1, c_q, eps, 160);
        assert!(
            (0.999..=1.001).contains(&mass),
            "eps {eps}: mass {mass:.6}"
        );
    }
}

#[test]
fn cache_replays_the_same_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let a = compute_cq_cached(1, CqMethod::MonteCarlo, 20_000, 5, dir.path()).unwrap();
    let b = compute_cq_cached(1, CqMethod::MonteCarlo, 20_000, 5, dir.path()).unwrap();
    assert_eq!(a.value, b.value);
    assert_eq!(a.samples, b.samples);
    let fresh = compute_cq(1, CqMethod::MonteCarlo, 20_000, 5);
    assert_eq!(a.value, fresh.value);
}

#[test]
fn compute_rejects_underpowered_budgets() {
    match GreenKernel::compute(1, 400_000, 2_000, 99, None) {
        Err(GreenError::BudgetTooSmall { .. }) => {}
        Ok(kernel) => {
            let exact = closed_form_cq(1).unwrap();
            assert!((kernel.c_q - exact).abs() / exact < 1e-3);
        }
        Err(e) => panic!("unexpected error {e}"),
    }
    let kernel = GreenKernel::compute(1, 1_000_000, 1_000_000, 7, None).unwrap();
    let exact = closed_form_cq(1).unwrap();
    assert!((kernel.c_q - exact).abs() / exact < 1e-6);
    assert!(kernel.cross_check.is_some());
}

#[test]
fn singular_part_reduces_to_the_kernel_in_the_flat_chart() {
    let n = 1;
    let kernel = GreenKernel::with_constant(n, closed_form_cq(n).unwrap());
    let flat_chart = PowerOfShiftedGauge::new(n, 1.0, 0.0);
    let xi = HeisPoint::from_coords(n, &[0.2, 0.1, -0.3, 0.4, 0.0, 0.2, -0.1]);
    let eta = HeisPoint::from_coords(n, &[-0.5, 0.3, 0.2, -0.2, 0.4, 0.0, 0.3]);
    let lhs = kernel.singular_part(&flat_chart, &xi, &eta).unwrap();
    let rhs = kernel.heis_green(&xi, &eta).unwrap();
    assert!((lhs - rhs).abs() < 1e-15 * rhs);
}

#[test]
fn regular_part_recovers_a_planted_constant() {
    let n = 1;
    let q = homogeneous_dim(n);
    let c_q = closed_form_cq(n).unwrap();
    let kernel = GreenKernel::with_constant(n, c_q);
    let radii = default_radii_schedule();

    let flat_chart = PowerOfShiftedGauge::new(n, 1.0, 0.0);
    let planted = 0.5f64.powf(q - 2.0);
    let oracle = move |a: &HeisPoint, b: &HeisPoint| {
        let m = left_diff(a, b).unwrap();
        c_q * m.gauge4().powf(-(q - 2.0) / 4.0) + planted
    };
    let rep = kernel
        .regular_part_limit(&oracle, &flat_chart, &HeisPoint::origin(n), &radii)
        .unwrap();
    assert!((rep.value - 0.5).abs() < 1e-6, "value {}", rep.value);
    assert!(rep.spread < 1e-6);

    let chart = PowerOfShiftedGauge::new(n, 1.0, -(q - 2.0) / 8.0);
    let planted2 = 0.25f64.powf(q - 2.0);
    let chart2 = PowerOfShiftedGauge::new(n, 1.0, -(q - 2.0) / 8.0);
    let oracle2 = move |a: &HeisPoint, b: &HeisPoint| {
        let m = left_diff(a, b).unwrap();
        c_q * m.gauge4().powf(-(q - 2.0) / 4.0) / (chart2.eval(a) * chart2.eval(b)) + planted2
    };
    let rep2 = kernel
        .regular_part_limit(&oracle2, &chart, &HeisPoint::origin(n), &radii)
        .unwrap();
    assert!((rep2.value - 0.25).abs() < 1e-6, "value {}", rep2.value);
}

#[test]
fn zero_regular_part_is_reported_as_zero() {
    let n = 1;
    let q = homogeneous_dim(n);
    let c_q = closed_form_cq(n).unwrap();
    let kernel = GreenKernel::with_constant(n, c_q);
    let flat_chart = PowerOfShiftedGauge::new(n, 1.0, 0.0);
    let oracle = move |a: &HeisPoint, b: &HeisPoint| {
        let m = left_diff(a, b).unwrap();
        c_q * m.gauge4().powf(-(q - 2.0) / 4.0)
    };
    let rep = kernel
        .regular_part_limit(&oracle, &flat_chart, &HeisPoint::origin(n), &default_radii_schedule())
        .unwrap();
    assert_eq!(rep.value, 0.0);
}
